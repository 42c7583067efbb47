#include "optosync/covariance.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "optosync/errors.hpp"

namespace optosync {

namespace {

constexpr Eigen::Index kCovOffset = MeanState::kSize;
constexpr Eigen::Index kCombinedSize = MeanState::kSize + 36;

void symmetrize(Eigen::Ref<Eigen::VectorXd> block) {
    Eigen::Map<Matrix6> c(block.data());
    const Matrix6 s = 0.5 * (c + c.transpose());
    c = s;
}

}  // namespace

CovarianceState CovarianceState::vacuum() { return {}; }

CovarianceState CovarianceState::thermal(const SystemParams& params) {
    CovarianceState s;
    s.c(0, 0) = s.c(1, 1) = params.nbar_m1 + 0.5;
    s.c(2, 2) = s.c(3, 3) = params.nbar_m2 + 0.5;
    return s;
}

double CovarianceState::var_q_minus() const {
    return 0.5 * (c(0, 0) + c(2, 2) - c(0, 2) - c(2, 0));
}
double CovarianceState::var_p_minus() const {
    return 0.5 * (c(1, 1) + c(3, 3) - c(1, 3) - c(3, 1));
}
double CovarianceState::var_q_plus() const {
    return 0.5 * (c(0, 0) + c(2, 2) + c(0, 2) + c(2, 0));
}
double CovarianceState::var_p_plus() const {
    return 0.5 * (c(1, 1) + c(3, 3) + c(1, 3) + c(3, 1));
}
double CovarianceState::asymmetry() const { return (c - c.transpose()).cwiseAbs().maxCoeff(); }

Matrix6 drift_matrix(const MeanState& m, const SystemParams& p) {
    const CouplingCoefficients& g = p.couplings;
    const double photons = std::norm(m.a);
    const double G1 = g.g1_1 - 2.0 * g.g2_1 * m.q1 + g.g3 * m.q2;
    const double G2 = g.g1_2 - 2.0 * g.g2_2 * m.q2 + g.g3 * m.q1;
    const double F = p.detuning - g.g1_1 * m.q1 - g.g1_2 * m.q2 + g.g2_1 * m.q1 * m.q1 +
                     g.g2_2 * m.q2 * m.q2 - g.g3 * m.q1 * m.q2;
    const double re = std::numbers::sqrt2 * m.a.real();
    const double im = std::numbers::sqrt2 * m.a.imag();

    Matrix6 b = Matrix6::Zero();
    b(0, 1) = p.omega_m1;
    b(1, 0) = -p.omega_m1 - 2.0 * g.g2_1 * photons;
    b(1, 1) = -p.gamma_m1;
    b(1, 2) = g.g3 * photons;
    b(1, 4) = G1 * re;
    b(1, 5) = G1 * im;
    b(2, 3) = p.omega_m2;
    b(3, 0) = g.g3 * photons;
    b(3, 2) = -p.omega_m2 - 2.0 * g.g2_2 * photons;
    b(3, 3) = -p.gamma_m2;
    b(3, 4) = G2 * re;
    b(3, 5) = G2 * im;
    b(4, 0) = -G1 * im;
    b(4, 2) = -G2 * im;
    b(4, 4) = -p.kappa;
    b(4, 5) = F;
    b(5, 0) = G1 * re;
    b(5, 2) = G2 * re;
    b(5, 4) = -F;
    b(5, 5) = -p.kappa;
    return b;
}

Matrix6 diffusion_matrix(const SystemParams& p) {
    Matrix6 z = Matrix6::Zero();
    z(1, 1) = (2.0 * p.nbar_m1 + 1.0) * p.gamma_m1;
    z(3, 3) = (2.0 * p.nbar_m2 + 1.0) * p.gamma_m2;
    z(4, 4) = p.kappa;
    z(5, 5) = p.kappa;
    return z;
}

Matrix6 covariance_rate(const Matrix6& drift, const Matrix6& cov, const Matrix6& diffusion) {
    const Matrix6 bc = drift * cov;
    return bc + bc.transpose() + diffusion;
}

double sync_measure(const CovarianceState& cov) {
    const double bracket = cov.var_q_minus() + cov.var_p_minus();
    if (!(bracket > 0.0)) {
        throw DomainError("sync_measure: <dq_-^2> + <dp_-^2> <= 0, covariance is unphysical");
    }
    return 1.0 / bracket;
}

double entanglement_marker(const CovarianceState& cov) {
    return cov.var_q_minus() * cov.var_p_plus();
}

double duan_sum(const CovarianceState& cov) { return cov.var_q_minus() + cov.var_p_plus(); }

double mari_measure(const MeanState& mean, const CovarianceState& cov) {
    const double qm = mean.q_minus();
    const double pm = mean.p_minus();
    const double total = qm * qm + pm * pm + cov.var_q_minus() + cov.var_p_minus();
    if (!(total > 0.0)) throw DomainError("mari_measure: non-positive denominator");
    return 1.0 / total;
}

MetricSample metrics_at(double t, const MeanState& mean, const CovarianceState& cov) {
    return {t, sync_measure(cov), entanglement_marker(cov), duan_sum(cov), mari_measure(mean, cov)};
}

CovarianceSeries propagate_covariance(const CovarianceState& initial, const MeanTrajectory& traj,
                                      const SystemParams& params, const StepControl& control) {
    params.validate();
    if (traj.times.size() < 2) throw InputError("propagate_covariance: trajectory too short");
    if (initial.asymmetry() > 1e-12) {
        throw InputError("propagate_covariance: initial covariance must be symmetric");
    }

    std::vector<MeanState> slopes;
    slopes.reserve(traj.states.size());
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
        slopes.push_back(mean_drift(traj.states[i], traj.times[i], params));
    }

    const double t0 = traj.times.front();
    const double spacing = traj.spacing;
    const std::size_t last = traj.times.size() - 1;
    auto mean_at = [&](double t) {
        auto i = static_cast<std::size_t>(std::floor((t - t0) / spacing));
        i = std::min(i, last - 1);
        const double h = traj.times[i + 1] - traj.times[i];
        const double s = (t - traj.times[i]) / h;
        const double h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        const double h10 = s * (1.0 - s) * (1.0 - s);
        const double h01 = s * s * (3.0 - 2.0 * s);
        const double h11 = s * s * (s - 1.0);
        Eigen::VectorXd y0(MeanState::kSize), y1(MeanState::kSize), d0(MeanState::kSize),
            d1(MeanState::kSize);
        traj.states[i].write_to(y0);
        traj.states[i + 1].write_to(y1);
        slopes[i].write_to(d0);
        slopes[i + 1].write_to(d1);
        Eigen::VectorXd y = h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1;
        return MeanState::read_from(y);
    };

    const Matrix6 zeta = diffusion_matrix(params);
    OdeRhs rhs = [&](double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
        const Eigen::Map<const Matrix6> c(y.data());
        Eigen::Map<Matrix6> dc(dy.data());
        dc = covariance_rate(drift_matrix(mean_at(t), params), c, zeta);
    };
    StepHook hook = [](double, Eigen::Ref<Eigen::VectorXd> y) { symmetrize(y); };

    Eigen::VectorXd y0 = Eigen::Map<const Eigen::VectorXd>(initial.c.data(), 36);
    OdeSolution sol = integrate_dopri5(rhs, t0, y0, traj.times, control, hook);

    CovarianceSeries out;
    out.times = std::move(sol.times);
    out.stats = sol.stats;
    out.states.reserve(sol.states.size());
    for (auto& y : sol.states) {
        symmetrize(y);
        CovarianceState s;
        s.c = Eigen::Map<const Matrix6>(y.data());
        out.states.push_back(s);
    }
    return out;
}

SimulationResult simulate(const MeanState& initial_mean, const CovarianceState& initial_cov,
                          const SystemParams& params, double horizon, const StepControl& control,
                          const OutputGrid& grid) {
    params.validate();
    if (!initial_mean.finite()) throw InputError("initial mean state must be finite");
    if (initial_cov.asymmetry() > 1e-12) {
        throw InputError("initial covariance must be symmetric");
    }
    const std::vector<double> times = output_times(params, horizon, grid);
    const Matrix6 zeta = diffusion_matrix(params);

    OdeRhs rhs = [&](double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
        const MeanState m = MeanState::read_from(y.head<MeanState::kSize>());
        mean_drift(m, t, params).write_to(dy.head<MeanState::kSize>());
        const Eigen::Map<const Matrix6> c(y.data() + kCovOffset);
        Eigen::Map<Matrix6> dc(dy.data() + kCovOffset);
        dc = covariance_rate(drift_matrix(m, params), c, zeta);
    };

    SimulationResult result;
    StepAudit& audit = result.audit;
    StepHook hook = [&audit](double t, Eigen::Ref<Eigen::VectorXd> y) {
        Eigen::Map<Matrix6> c(y.data() + kCovOffset);
        audit.max_asymmetry = std::max(audit.max_asymmetry, (c - c.transpose()).cwiseAbs().maxCoeff());
        symmetrize(y.segment<36>(kCovOffset));
        CovarianceState cov;
        cov.c = c;
        ++audit.steps;
        audit.min_diagonal = std::min(audit.min_diagonal, cov.c.diagonal().minCoeff());
        const double qm = cov.var_q_minus();
        const double pm = cov.var_p_minus();
        const double pp = cov.var_p_plus();
        const double sq = 1.0 / (qm + pm);
        const double ed = qm * pp;
        audit.max_sq = std::max(audit.max_sq, sq);
        if (sq > 1.0 + 1e-6) {
            if (audit.sq_bound_violations == 0) audit.first_violation_time = t;
            ++audit.sq_bound_violations;
        }
        const double via_ed = pp / (ed + pm * pp);
        audit.max_sqlimit_residual = std::max(audit.max_sqlimit_residual, std::abs(sq - via_ed));
        if (qm + pp < 1.0 && !(ed < 0.25)) ++audit.duan_implication_failures;
    };

    Eigen::VectorXd y0(kCombinedSize);
    initial_mean.write_to(y0.head<MeanState::kSize>());
    y0.segment<36>(kCovOffset) = Eigen::Map<const Eigen::VectorXd>(initial_cov.c.data(), 36);
    OdeSolution sol = integrate_dopri5(rhs, 0.0, y0, times, control, hook);

    MeanTrajectory& traj = result.mean;
    traj.times = sol.times;
    traj.spacing = times.size() > 1 ? times[1] - times[0] : 0.0;
    traj.drive_period = reference_period(params);
    traj.control = control;
    traj.stats = sol.stats;
    traj.states.reserve(sol.states.size());
    result.covariance.reserve(sol.states.size());
    result.metrics.reserve(sol.states.size());
    for (std::size_t i = 0; i < sol.states.size(); ++i) {
        Eigen::VectorXd& y = sol.states[i];
        symmetrize(y.segment<36>(kCovOffset));
        const MeanState m = MeanState::read_from(y.head<MeanState::kSize>());
        CovarianceState cov;
        cov.c = Eigen::Map<const Matrix6>(y.data() + kCovOffset);
        traj.states.push_back(m);
        result.metrics.push_back(metrics_at(sol.times[i], m, cov));
        result.covariance.push_back(cov);
    }
    return result;
}

}  // namespace optosync
