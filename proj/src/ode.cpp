#include "optosync/ode.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "optosync/errors.hpp"

namespace optosync {

namespace {

// Dormand & Prince (1980) tableau; dense output after Hairer's DOPRI5.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                 a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

void check_bounded(const Eigen::VectorXd& y, double t, double bound) {
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (!std::isfinite(y[i]) || std::abs(y[i]) > bound) {
            std::ostringstream os;
            os << "integration diverged at t = " << t << " (component " << i << " = " << y[i]
               << ", bound " << bound << ")";
            throw DivergenceError(os.str(), t);
        }
    }
}

double error_norm(const Eigen::VectorXd& err, const Eigen::VectorXd& y0, const Eigen::VectorXd& y1,
                  const StepControl& control) {
    const Eigen::Index n = err.size();
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double scale =
            control.atol + control.rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        const double r = err[i] / scale;
        sum += r * r;
    }
    return std::sqrt(sum / static_cast<double>(n));
}

double initial_step(const OdeRhs& rhs, double t0, const Eigen::VectorXd& y0,
                    const Eigen::VectorXd& f0, const StepControl& control, double span) {
    const Eigen::Index n = y0.size();
    auto scaled_norm = [&](const Eigen::VectorXd& v) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double sc = control.atol + control.rtol * std::abs(y0[i]);
            s += (v[i] / sc) * (v[i] / sc);
        }
        return std::sqrt(s / static_cast<double>(n));
    };
    const double dnf = scaled_norm(f0);
    const double dny = scaled_norm(y0);
    double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * dny / dnf;
    h = std::min({h, control.max_step, span});
    Eigen::VectorXd y1 = y0 + h * f0;
    Eigen::VectorXd f1(n);
    rhs(t0 + h, y1, f1);
    const double der2 = scaled_norm(f1 - f0) / h;
    const double der = std::max(std::abs(der2), dnf);
    const double h1 = der <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der, 0.2);
    return std::min({100.0 * h, h1, control.max_step, span});
}

}  // namespace

void StepControl::validate() const {
    if (!(rtol > 0.0) || !(atol > 0.0)) throw InputError("integrator tolerances must be > 0");
    if (!(max_step > 0.0)) throw InputError("integrator max_step must be > 0");
    if (initial_step < 0.0) throw InputError("integrator initial_step must be >= 0");
    if (max_steps <= 0) throw InputError("integrator max_steps must be > 0");
    if (!(divergence_bound > 0.0)) throw InputError("divergence bound must be > 0");
}

StepControl StepControl::tightened(double factor) const {
    StepControl out = *this;
    out.rtol *= factor;
    out.atol *= factor;
    return out;
}

std::vector<double> uniform_grid(double t0, double t1, std::size_t n) {
    std::vector<double> grid(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        grid[i] = t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(n);
    }
    grid.back() = t1;
    return grid;
}

OdeSolution integrate_dopri5(const OdeRhs& rhs, double t0, const Eigen::VectorXd& y0,
                             std::span<const double> output_times, const StepControl& control,
                             const StepHook& on_step) {
    control.validate();
    if (!std::is_sorted(output_times.begin(), output_times.end())) {
        throw InputError("output times must be non-decreasing");
    }
    if (!output_times.empty() && output_times.front() < t0) {
        throw InputError("output times must not precede the initial time");
    }

    const Eigen::Index n = y0.size();
    OdeSolution sol;
    sol.times.reserve(output_times.size());
    sol.states.reserve(output_times.size());
    check_bounded(y0, t0, control.divergence_bound);

    std::size_t next_out = 0;
    while (next_out < output_times.size() && output_times[next_out] == t0) {
        sol.times.push_back(t0);
        sol.states.push_back(y0);
        ++next_out;
    }
    if (next_out == output_times.size()) return sol;

    const double t_end = output_times.back();
    Eigen::VectorXd y = y0;
    Eigen::VectorXd k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n), err(n);
    Eigen::VectorXd r1(n), r2(n), r3(n), r4(n), r5(n);
    rhs(t0, y, k1);
    sol.stats.evaluations = 1;

    double t = t0;
    double h = control.initial_step > 0.0
                   ? std::min(control.initial_step, t_end - t0)
                   : initial_step(rhs, t0, y, k1, control, t_end - t0);
    if (control.initial_step <= 0.0) sol.stats.evaluations += 1;

    bool last_rejected = false;
    long steps = 0;
    while (t < t_end) {
        if (++steps > control.max_steps) {
            throw ToleranceError("integrator exceeded max_steps before reaching the horizon");
        }
        h = std::min(h, control.max_step);
        if (t + h > t_end || t + 1.01 * h >= t_end) h = t_end - t;
        if (h <= std::abs(t) * 1e-15) {
            throw ToleranceError("integrator step size underflow");
        }

        ytmp = y + h * a21 * k1;
        rhs(t + c2 * h, ytmp, k2);
        ytmp = y + h * (a31 * k1 + a32 * k2);
        rhs(t + c3 * h, ytmp, k3);
        ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
        rhs(t + c4 * h, ytmp, k4);
        ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        rhs(t + c5 * h, ytmp, k5);
        ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        const double t_new = (t + h == t_end || t + h > t_end) ? t_end : t + h;
        rhs(t_new, ytmp, k6);
        ynew = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
        rhs(t_new, ynew, k7);
        sol.stats.evaluations += 6;

        err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        const double enorm = error_norm(err, y, ynew, control);
        if (!std::isfinite(enorm)) {
            check_bounded(ynew, t_new, control.divergence_bound);
            h *= 0.2;
            last_rejected = true;
            ++sol.stats.rejected;
            continue;
        }

        if (enorm <= 1.0) {
            // dense output on [t, t_new]
            r1 = y;
            r2 = ynew - y;
            r3 = h * k1 - r2;
            r4 = r2 - h * k7 - r3;
            r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
            while (next_out < output_times.size() && output_times[next_out] <= t_new) {
                const double to = output_times[next_out];
                Eigen::VectorXd yo;
                if (to == t_new) {
                    yo = ynew;
                } else {
                    const double th = (to - t) / h;
                    const double th1 = 1.0 - th;
                    yo = r1 + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)));
                }
                sol.times.push_back(to);
                sol.states.push_back(std::move(yo));
                ++next_out;
            }

            sol.stats.accumulated_error += err.cwiseAbs().maxCoeff();
            ++sol.stats.accepted;
            t = t_new;
            y = ynew;
            check_bounded(y, t, control.divergence_bound);
            if (on_step) on_step(t, y);
            k1 = k7;

            double fac = 0.9 * std::pow(std::max(enorm, 1e-10), -0.2);
            fac = std::clamp(fac, 0.2, last_rejected ? 1.0 : 5.0);
            h *= fac;
            last_rejected = false;
        } else {
            h *= std::max(0.2, 0.9 * std::pow(enorm, -0.2));
            last_rejected = true;
            ++sol.stats.rejected;
        }
    }
    return sol;
}

}  // namespace optosync
