#pragma once

#include <vector>

#include <Eigen/Core>

#include "optosync/meanfield.hpp"
#include "optosync/ode.hpp"
#include "optosync/params.hpp"

namespace optosync {

using Matrix6 = Eigen::Matrix<double, 6, 6>;

/// Symmetrized second moments over (dq1, dp1, dq2, dp2, dx, dy).
struct CovarianceState {
    Matrix6 c = 0.5 * Matrix6::Identity();

    static CovarianceState vacuum();
    /// Mechanical diagonal (2 nbar_mj + 1) / 2, cavity quadratures 1/2.
    static CovarianceState thermal(const SystemParams& params);

    double var_q_minus() const;
    double var_p_minus() const;
    double var_q_plus() const;
    double var_p_plus() const;
    double asymmetry() const;
};

struct MetricSample {
    double t = 0.0;
    double sq = 0.0;
    double ed = 0.0;
    double duan = 0.0;
    double sqm = 0.0;
};

/// Drift matrix B of the linearized fluctuations around `mean`.
Matrix6 drift_matrix(const MeanState& mean, const SystemParams& params);

/// diag[0, (2 nbar1 + 1) gamma1, 0, (2 nbar2 + 1) gamma2, kappa, kappa]
Matrix6 diffusion_matrix(const SystemParams& params);

/// Lyapunov right-hand side B C + C B^T + zeta, exactly symmetric for symmetric C.
Matrix6 covariance_rate(const Matrix6& drift, const Matrix6& cov, const Matrix6& diffusion);

/// S_q = 1 / (<dq_-^2> + <dp_-^2>). Throws DomainError if the bracket is <= 0.
double sync_measure(const CovarianceState& cov);
/// E_D = <dq_-^2> <dp_+^2>; the state is entangled when E_D < 1/4.
double entanglement_marker(const CovarianceState& cov);
/// <dq_-^2> + <dp_+^2>; entangled when < 1.
double duan_sum(const CovarianceState& cov);
/// Mari measure including the mean mismatch Q_-^2 + P_-^2.
double mari_measure(const MeanState& mean, const CovarianceState& cov);

MetricSample metrics_at(double t, const MeanState& mean, const CovarianceState& cov);

struct CovarianceSeries {
    std::vector<double> times;
    std::vector<CovarianceState> states;
    OdeStats stats;
};

/// Integrates dC/dt = B(t) C + C B(t)^T + zeta along a precomputed mean
/// trajectory (cubic Hermite interpolation between samples, with node slopes
/// from mean_drift). Output on the trajectory's grid.
CovarianceSeries propagate_covariance(const CovarianceState& initial, const MeanTrajectory& traj,
                                      const SystemParams& params, const StepControl& control = {});

/// Per-step checks gathered during a co-integrated run.
struct StepAudit {
    long steps = 0;
    double max_sq = 0.0;
    double max_asymmetry = 0.0;  // before re-symmetrization
    double min_diagonal = std::numeric_limits<double>::infinity();
    long sq_bound_violations = 0;   // steps with S_q > 1 + 1e-6
    double first_violation_time = -1.0;
    double max_sqlimit_residual = 0.0;  // |S_q - <dp+^2> / (E_D + <dp-^2><dp+^2>)|
    long duan_implication_failures = 0;  // duan < 1 but E_D >= 1/4
};

struct SimulationResult {
    MeanTrajectory mean;
    std::vector<CovarianceState> covariance;
    std::vector<MetricSample> metrics;
    StepAudit audit;
};

/// Means and covariance integrated together in one 42-component state with
/// the same adaptive stepper, so B(t) is never interpolated.
SimulationResult simulate(const MeanState& initial_mean, const CovarianceState& initial_cov,
                          const SystemParams& params, double horizon,
                          const StepControl& control = {}, const OutputGrid& grid = {});

}  // namespace optosync
