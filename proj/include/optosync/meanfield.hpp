#pragma once

#include <complex>
#include <vector>

#include <Eigen/Core>

#include "optosync/ode.hpp"
#include "optosync/params.hpp"

namespace optosync {

using Complex = std::complex<double>;

/// Classical first moments: positions, momenta and the complex cavity amplitude.
struct MeanState {
    double q1 = 0.0;
    double p1 = 0.0;
    double q2 = 0.0;
    double p2 = 0.0;
    Complex a{0.0, 0.0};

    static constexpr Eigen::Index kSize = 6;

    /// (Q1, P1, Q2, P2, Re A, Im A)
    void write_to(Eigen::Ref<Eigen::VectorXd> out) const;
    static MeanState read_from(const Eigen::Ref<const Eigen::VectorXd>& in);

    double q_minus() const;
    double p_minus() const;
    double q_plus() const;
    double p_plus() const;
    bool finite() const;
};

/// Right-hand side of the nonlinear mean-value equations.
MeanState mean_drift(const MeanState& state, double t, const SystemParams& params);

/// Uniformly spaced output of a mean-field integration.
struct MeanTrajectory {
    std::vector<double> times;
    std::vector<MeanState> states;
    double spacing = 0.0;
    double drive_period = 0.0;
    StepControl control;
    OdeStats stats;

    double horizon() const { return times.empty() ? 0.0 : times.back(); }
};

/// Output grid: samples at i * spacing, spacing = reference_period / samples_per_period,
/// where the reference period is 2 pi / Omega_D when the drive is modulated and
/// 2 pi / omega_m1 otherwise. The last sample is the largest multiple not beyond
/// the horizon.
struct OutputGrid {
    int samples_per_period = 128;
};

double reference_period(const SystemParams& params);
std::vector<double> output_times(const SystemParams& params, double horizon, const OutputGrid& grid);

/// Adaptive integration of the mean-value equations. Throws DivergenceError
/// when a component exceeds control.divergence_bound.
MeanTrajectory integrate_mean(const MeanState& initial, const SystemParams& params, double horizon,
                              const StepControl& control = {}, const OutputGrid& grid = {});

struct LimitCycleReport {
    double rms_q_minus = 0.0;
    double rms_p_minus = 0.0;
    double rms_q_plus = 0.0;
    double rms_p_plus = 0.0;
    double dominant_period = 0.0;
    /// max over the last period of |state(t) - state(t - T)|, T the drive period
    double recurrence_error = 0.0;
    /// recurrence_error divided by the max-norm of the state over the window
    double relative_recurrence_error = 0.0;
};

/// Classical-locking diagnostics over the trailing `window` of the trajectory.
/// Throws InputError unless the window covers at least three reference periods.
LimitCycleReport limit_cycle_metrics(const MeanTrajectory& traj, double window);

/// Period of a uniformly sampled series from the first dip of its normalized
/// squared-difference function;
/// 0 when the series carries no oscillation.
double dominant_period(std::span<const double> series, double spacing);

}  // namespace optosync
