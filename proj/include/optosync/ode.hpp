#pragma once

#include <functional>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace optosync {

struct StepControl {
    double rtol = 1e-8;
    double atol = 1e-10;
    double initial_step = 0.0;  // 0 selects a step from the local derivative scale
    double max_step = std::numeric_limits<double>::infinity();
    long max_steps = 50'000'000;
    double divergence_bound = 1e12;

    void validate() const;
    StepControl tightened(double factor) const;
};

struct OdeStats {
    long accepted = 0;
    long rejected = 0;
    long evaluations = 0;
    // Sum over accepted steps of the max-norm of the embedded local error.
    double accumulated_error = 0.0;
};

struct OdeSolution {
    std::vector<double> times;
    std::vector<Eigen::VectorXd> states;
    OdeStats stats;
};

using OdeRhs = std::function<void(double t, const Eigen::VectorXd& y, Eigen::VectorXd& dydt)>;

/// Called once per accepted step with the new time and state. May project the
/// state in place (e.g. re-symmetrize a matrix block); changes should be at
/// round-off level since the step's dense output is built beforehand.
using StepHook = std::function<void(double t, Eigen::Ref<Eigen::VectorXd> y)>;

/// Adaptive Dormand-Prince 5(4) with fourth-order dense output.
///
/// `output_times` must be non-decreasing and >= t0; values equal to t0 return
/// y0. Throws DivergenceError when any component leaves
/// [-divergence_bound, divergence_bound] or becomes non-finite, and
/// ToleranceError when max_steps is exhausted or the step underflows.
OdeSolution integrate_dopri5(const OdeRhs& rhs, double t0, const Eigen::VectorXd& y0,
                             std::span<const double> output_times, const StepControl& control,
                             const StepHook& on_step = {});

/// n + 1 equally spaced points on [t0, t1].
std::vector<double> uniform_grid(double t0, double t1, std::size_t n);

}  // namespace optosync
