#include "optosync/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "optosync/errors.hpp"

namespace optosync {

void MeanState::write_to(Eigen::Ref<Eigen::VectorXd> out) const {
    out[0] = q1;
    out[1] = p1;
    out[2] = q2;
    out[3] = p2;
    out[4] = a.real();
    out[5] = a.imag();
}

MeanState MeanState::read_from(const Eigen::Ref<const Eigen::VectorXd>& in) {
    return {in[0], in[1], in[2], in[3], Complex(in[4], in[5])};
}

double MeanState::q_minus() const { return (q1 - q2) / std::numbers::sqrt2; }
double MeanState::p_minus() const { return (p1 - p2) / std::numbers::sqrt2; }
double MeanState::q_plus() const { return (q1 + q2) / std::numbers::sqrt2; }
double MeanState::p_plus() const { return (p1 + p2) / std::numbers::sqrt2; }

bool MeanState::finite() const {
    return std::isfinite(q1) && std::isfinite(p1) && std::isfinite(q2) && std::isfinite(p2) &&
           std::isfinite(a.real()) && std::isfinite(a.imag());
}

MeanState mean_drift(const MeanState& s, double t, const SystemParams& p) {
    const CouplingCoefficients& g = p.couplings;
    const double photons = std::norm(s.a);
    // effective detuning Delta - g1 Q + g2 Q^2 - g3 Q1 Q2
    const double shift = p.detuning - g.g1_1 * s.q1 - g.g1_2 * s.q2 + g.g2_1 * s.q1 * s.q1 +
                         g.g2_2 * s.q2 * s.q2 - g.g3 * s.q1 * s.q2;
    MeanState d;
    d.q1 = p.omega_m1 * s.p1;
    d.p1 = -p.omega_m1 * s.q1 + (g.g1_1 + g.g3 * s.q2) * photons -
           2.0 * g.g2_1 * s.q1 * photons - p.gamma_m1 * s.p1;
    d.q2 = p.omega_m2 * s.p2;
    d.p2 = -p.omega_m2 * s.q2 + (g.g1_2 + g.g3 * s.q1) * photons -
           2.0 * g.g2_2 * s.q2 * photons - p.gamma_m2 * s.p2;
    d.a = -Complex(p.kappa, shift) * s.a + drive_amplitude(t, p);
    return d;
}

double reference_period(const SystemParams& params) {
    if (params.mod_depth > 0.0 && params.mod_freq > 0.0) {
        return 2.0 * std::numbers::pi / params.mod_freq;
    }
    return 2.0 * std::numbers::pi / params.omega_m1;
}

std::vector<double> output_times(const SystemParams& params, double horizon,
                                 const OutputGrid& grid) {
    if (!(horizon > 0.0)) throw InputError("horizon must be > 0");
    if (grid.samples_per_period < 8) throw InputError("samples_per_period must be >= 8");
    const double spacing = reference_period(params) / grid.samples_per_period;
    const auto count = static_cast<std::size_t>(std::floor(horizon / spacing + 1e-9));
    if (count < 1) throw InputError("horizon shorter than one output interval");
    std::vector<double> times(count + 1);
    for (std::size_t i = 0; i <= count; ++i) times[i] = static_cast<double>(i) * spacing;
    return times;
}

MeanTrajectory integrate_mean(const MeanState& initial, const SystemParams& params,
                              double horizon, const StepControl& control,
                              const OutputGrid& grid) {
    params.validate();
    if (!initial.finite()) throw InputError("initial mean state must be finite");
    const std::vector<double> times = output_times(params, horizon, grid);

    OdeRhs rhs = [&params](double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
        mean_drift(MeanState::read_from(y), t, params).write_to(dy);
    };
    Eigen::VectorXd y0(MeanState::kSize);
    initial.write_to(y0);
    OdeSolution sol = integrate_dopri5(rhs, 0.0, y0, times, control);

    MeanTrajectory traj;
    traj.times = std::move(sol.times);
    traj.states.reserve(sol.states.size());
    for (const auto& y : sol.states) traj.states.push_back(MeanState::read_from(y));
    traj.spacing = times.size() > 1 ? times[1] - times[0] : 0.0;
    traj.drive_period = reference_period(params);
    traj.control = control;
    traj.stats = sol.stats;
    return traj;
}

double dominant_period(std::span<const double> series, double spacing) {
    const std::size_t n = series.size();
    if (n < 8) return 0.0;

    // mean squared difference at each lag, normalized by its running mean
    // (the YIN estimator); it vanishes at the period of a periodic signal
    const std::size_t max_lag = n / 2;
    std::vector<double> d(max_lag + 2, 0.0);
    for (std::size_t lag = 1; lag <= max_lag + 1; ++lag) {
        double s = 0.0;
        for (std::size_t i = 0; i + lag < n; ++i) {
            const double diff = series[i] - series[i + lag];
            s += diff * diff;
        }
        d[lag] = s / static_cast<double>(n - lag);
    }
    double running = 0.0;
    std::vector<double> dn(max_lag + 2, 1.0);
    for (std::size_t lag = 1; lag <= max_lag + 1; ++lag) {
        running += d[lag];
        dn[lag] = running > 0.0 ? d[lag] * static_cast<double>(lag) / running : 1.0;
    }

    for (std::size_t lag = 2; lag <= max_lag; ++lag) {
        if (dn[lag] >= 0.1) continue;
        while (lag < max_lag && d[lag + 1] < d[lag]) ++lag;
        const double denom = d[lag - 1] - 2.0 * d[lag] + d[lag + 1];
        const double shift = denom > 0.0 ? 0.5 * (d[lag - 1] - d[lag + 1]) / denom : 0.0;
        return (static_cast<double>(lag) + std::clamp(shift, -0.5, 0.5)) * spacing;
    }
    return 0.0;
}

LimitCycleReport limit_cycle_metrics(const MeanTrajectory& traj, double window) {
    if (traj.times.size() < 2 || !(traj.spacing > 0.0)) {
        throw InputError("limit_cycle_metrics: trajectory has no samples");
    }
    const double period = traj.drive_period;
    if (!(window >= 3.0 * period - 1e-9 * period)) {
        throw InputError("limit_cycle_metrics: window must span at least three drive periods");
    }
    if (window > traj.horizon() + 1e-9) {
        throw InputError("limit_cycle_metrics: window longer than the trajectory");
    }
    const std::size_t n = traj.times.size();
    const auto window_samples =
        std::min(n - 1, static_cast<std::size_t>(std::llround(window / traj.spacing)));
    const std::size_t first = n - 1 - window_samples;

    LimitCycleReport rep;
    double sq_qm = 0.0, sq_pm = 0.0, sq_qp = 0.0, sq_pp = 0.0, scale = 0.0;
    std::vector<double> q1_series;
    q1_series.reserve(window_samples + 1);
    for (std::size_t i = first; i < n; ++i) {
        const MeanState& s = traj.states[i];
        sq_qm += s.q_minus() * s.q_minus();
        sq_pm += s.p_minus() * s.p_minus();
        sq_qp += s.q_plus() * s.q_plus();
        sq_pp += s.p_plus() * s.p_plus();
        scale = std::max({scale, std::abs(s.q1), std::abs(s.p1), std::abs(s.q2), std::abs(s.p2),
                          std::abs(s.a.real()), std::abs(s.a.imag())});
        q1_series.push_back(s.q1);
    }
    const double count = static_cast<double>(window_samples + 1);
    rep.rms_q_minus = std::sqrt(sq_qm / count);
    rep.rms_p_minus = std::sqrt(sq_pm / count);
    rep.rms_q_plus = std::sqrt(sq_qp / count);
    rep.rms_p_plus = std::sqrt(sq_pp / count);
    rep.dominant_period = dominant_period(q1_series, traj.spacing);

    const double lag_exact = period / traj.spacing;
    const auto lag = static_cast<std::size_t>(std::llround(lag_exact));
    if (std::abs(lag_exact - static_cast<double>(lag)) > 1e-6) {
        throw InputError("limit_cycle_metrics: drive period is not a multiple of the output spacing");
    }
    double rec = 0.0;
    for (std::size_t i = n - 1 - lag; i < n; ++i) {
        const MeanState& a = traj.states[i];
        const MeanState& b = traj.states[i - lag];
        rec = std::max({rec, std::abs(a.q1 - b.q1), std::abs(a.p1 - b.p1), std::abs(a.q2 - b.q2),
                        std::abs(a.p2 - b.p2), std::abs(a.a.real() - b.a.real()),
                        std::abs(a.a.imag() - b.a.imag())});
    }
    rep.recurrence_error = rec;
    rep.relative_recurrence_error = scale > 0.0 ? rec / scale : rec;
    return rep;
}

}  // namespace optosync
