#include "optosync/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "optosync/errors.hpp"

namespace optosync {

SpectralContext SpectralContext::from_floquet(const FloquetSolution& f, const SystemParams& p) {
    SpectralContext ctx;
    ctx.omega_m = p.omega_m1;
    ctx.gamma_m = p.gamma_m1;
    ctx.kappa = p.kappa;
    ctx.nbar = p.nbar_m1;
    ctx.constants = f.constants;
    const auto& g = p.couplings;
    ctx.minus_shift = (2.0 * g.g2_1 + g.g3) * f.photon_sum;
    ctx.plus_shift = (2.0 * g.g2_1 - g.g3) * f.photon_sum;
    return ctx;
}

std::complex<double> SpectralContext::d(double w) const {
    return {w * w - omega_m * omega_m - omega_m * minus_shift, w * gamma_m};
}

std::complex<double> SpectralContext::big_d(double w) const {
    const std::complex<double> mech(w * w - omega_m * omega_m - omega_m * plus_shift, w * gamma_m);
    const std::complex<double> k_iw(kappa, -w);
    const double dp = constants.delta_prime;
    return 2.0 * dp * omega_m * f1f2() + mech * (k_iw * k_iw + dp * dp);
}

double SpectralContext::f1f2() const {
    const std::complex<double> prod = constants.f1 * constants.f2;
    if (std::abs(prod.imag()) > 1e-10 * std::abs(prod) + 1e-300) {
        std::ostringstream os;
        os << "F1 F2 has a non-negligible imaginary part (" << prod << ")";
        throw NumericalError(os.str());
    }
    return prod.real();
}

MinusDensity spectral_density_minus(double w, const SpectralContext& ctx) {
    const double mu = ctx.thermal_weight() / std::norm(ctx.d(w));
    return {ctx.omega_m * ctx.omega_m * mu, w * w * mu};
}

double spectral_density_plus(double w, const SpectralContext& ctx) {
    const double dp = ctx.constants.delta_prime;
    const double k2 = ctx.kappa * ctx.kappa;
    const double rp = 2.0 * ctx.kappa * ctx.f1f2();
    const double thermal = ctx.thermal_weight() *
                           ((dp * dp + k2 - w * w) * (dp * dp + k2 - w * w) + 4.0 * k2 * w * w);
    // radiation-pressure factor kappa^2 + (Delta' + w)^2 averaged with w -> -w
    const double cavity = 0.5 * ((k2 + (dp + w) * (dp + w)) + (k2 + (dp - w) * (dp - w)));
    return w * w * (rp * cavity + thermal) / std::norm(ctx.big_d(w));
}

namespace {

struct Piecewise {
    double value = 0.0;
    double error = 0.0;
};

template <class F>
Piecewise integrate_pieces(F f, const std::vector<double>& points, const QuadratureControl& quad) {
    using boost::math::quadrature::gauss_kronrod;
    Piecewise out;
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        double err = 0.0;
        out.value += gauss_kronrod<double, 31>::integrate(f, points[i], points[i + 1],
                                                          quad.max_depth, 0.1 * quad.rel_tol, &err);
        out.error += err;
    }
    return out;
}

// Roots of D(w), a quartic; companion-matrix eigenvalues.
std::vector<std::complex<double>> plus_poles(const SpectralContext& ctx) {
    using C = std::complex<double>;
    const C I(0, 1);
    const double dp = ctx.constants.delta_prime;
    const C a[3] = {-ctx.omega_m * ctx.omega_m - ctx.omega_m * ctx.plus_shift, I * ctx.gamma_m, 1.0};
    const C b[3] = {ctx.kappa * ctx.kappa + dp * dp, -2.0 * I * ctx.kappa, -1.0};
    C c[5] = {};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) c[i + j] += a[i] * b[j];
    c[0] += 2.0 * dp * ctx.omega_m * ctx.f1f2();
    Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
    for (int i = 0; i < 4; ++i) {
        m(0, i) = -c[3 - i] / c[4];
        if (i > 0) m(i, i - 1) = 1.0;
    }
    Eigen::ComplexEigenSolver<Eigen::Matrix4cd> es(m, false);
    const auto& ev = es.eigenvalues();
    return {ev[0], ev[1], ev[2], ev[3]};
}

std::vector<double> breakpoints(const SpectralContext& ctx, double cutoff) {
    std::vector<double> pts = {0.0, cutoff};
    auto seed = [&](double centre, double width) {
        if (!(centre > 0.0) || !std::isfinite(centre)) return;
        pts.push_back(centre);
        for (double m : {1.0, 4.0, 16.0, 64.0, 256.0}) {
            pts.push_back(centre - m * width);
            pts.push_back(centre + m * width);
        }
    };
    const double width = std::max(ctx.gamma_m, 1e-9);
    const double minus_sq = ctx.omega_m * (ctx.omega_m + ctx.minus_shift);
    const double plus_sq = ctx.omega_m * ctx.constants.f0;
    if (minus_sq > 0.0) seed(std::sqrt(minus_sq), width);
    if (plus_sq > 0.0) seed(std::sqrt(plus_sq), width);
    seed(std::abs(ctx.constants.delta_prime), std::max(ctx.kappa, width));
    for (const auto& z : plus_poles(ctx)) seed(std::abs(z.real()), std::max(std::abs(z.imag()), 1e-9));
    std::erase_if(pts, [&](double x) { return x < 0.0 || x > cutoff; });
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

double largest_scale(const SpectralContext& ctx) {
    double s = std::max(ctx.omega_m, ctx.kappa);
    for (const auto& z : plus_poles(ctx)) s = std::max(s, std::abs(z));
    const double minus_sq = ctx.omega_m * (ctx.omega_m + ctx.minus_shift);
    const double plus_sq = ctx.omega_m * ctx.constants.f0;
    if (minus_sq > 0.0) s = std::max(s, std::sqrt(minus_sq));
    if (plus_sq > 0.0) s = std::max(s, std::sqrt(plus_sq));
    return std::max(s, std::abs(ctx.constants.delta_prime) + ctx.kappa);
}

}  // namespace

FluctuationMoments mean_square_fluctuations(const SpectralContext& ctx,
                                            const QuadratureControl& quad) {
    if (!(quad.rel_tol > 0.0) || !(quad.cutoff_factor > 1.0)) {
        throw InputError("quadrature tolerance must be > 0 and cutoff factor > 1");
    }
    const StabilityReport st = stability_check(ctx.constants, ctx.omega_m, ctx.gamma_m, ctx.kappa);
    if (!st.stable) {
        std::ostringstream os;
        os << "fluctuations are unstable (Routh-Hurwitz values " << st.condition1 << ", "
           << st.condition2 << "); mean-square integrals diverge";
        throw InstabilityError(os.str());
    }
    if (!(ctx.omega_m * (ctx.omega_m + ctx.minus_shift) > 0.0) || !(ctx.gamma_m > 0.0)) {
        throw InstabilityError("difference-mode fluctuations are unstable");
    }

    const double scale = largest_scale(ctx);
    const double cutoff = quad.cutoff_factor * scale;
    const std::vector<double> pts = breakpoints(ctx, cutoff);
    std::vector<double> mirrored(pts.rbegin(), pts.rend());
    for (double& x : mirrored) x = -x;

    using boost::math::quadrature::gauss_kronrod;
    struct Result {
        double value;
        double error;
        const char* name;
    };
    auto full_line = [&](auto f, const char* name) -> Result {
        const Piecewise half = integrate_pieces(f, pts, quad);
        if (quad.check_symmetry) {
            const Piecewise other = integrate_pieces(f, mirrored, quad);
            const double diff = std::abs(half.value - other.value);
            if (diff > quad.symmetry_tol * std::abs(half.value)) {
                std::ostringstream os;
                os << name << " density is not even: half-line integrals differ by " << diff;
                throw NumericalError(os.str());
            }
        }
        // tail beyond the cutoff in u = 1/w; the integrand f(1/u)/u^2 stays finite at u = 0
        auto mapped = [&](double u) { return f(1.0 / u) / (u * u); };
        double tail_err = 0.0;
        const double tail = gauss_kronrod<double, 31>::integrate(
            mapped, 0.0, 1.0 / cutoff, quad.max_depth, 0.1 * quad.rel_tol, &tail_err);
        // (1/2pi) * 2 * half line
        return {(half.value + tail) / std::numbers::pi,
                (half.error + tail_err) / std::numbers::pi, name};
    };

    auto f_q = [&](double w) { return spectral_density_minus(w, ctx).q; };
    auto f_pm = [&](double w) { return spectral_density_minus(w, ctx).p; };
    auto f_pp = [&](double w) { return spectral_density_plus(w, ctx); };

    FluctuationMoments m;
    m.cutoff = cutoff;
    const Result q = full_line(f_q, "q_minus");
    const Result pm = full_line(f_pm, "p_minus");
    const Result pp = full_line(f_pp, "p_plus");
    m.var_q_minus = q.value;
    m.err_q_minus = q.error;
    m.var_p_minus = pm.value;
    m.err_p_minus = pm.error;
    m.var_p_plus = pp.value;
    m.err_p_plus = pp.error;

    const Result all[] = {q, pm, pp};
    for (const Result& r : all) {
        if (!(r.error <= quad.rel_tol * std::abs(r.value))) {
            std::ostringstream os;
            os << r.name << " quadrature did not reach rel. tolerance " << quad.rel_tol
               << " (value " << r.value << ", error " << r.error << ")";
            throw ToleranceError(os.str());
        }
    }
    return m;
}

double k_condition(const FluctuationMoments& m) {
    if (!(m.var_p_plus > 0.0)) throw DomainError("k_condition: <dp_+^2> must be > 0");
    return 1.0 / (4.0 * m.var_p_plus) + m.var_p_minus - 1.0;
}

double sync_from_entanglement(double ed, double var_p_minus, double var_p_plus) {
    const double denom = ed + var_p_minus * var_p_plus;
    if (!(denom > 0.0)) {
        throw DomainError("sync_from_entanglement: E_D + <dp_-^2><dp_+^2> must be > 0");
    }
    return var_p_plus / denom;
}

AnalyticReport analyze(const SystemParams& params, const FloquetOptions& options,
                       const QuadratureControl& quad) {
    AnalyticReport r;
    r.floquet = solve_floquet(params, options);
    r.stability = stability_check(r.floquet.constants, params);
    if (!r.stability.stable) {
        std::ostringstream os;
        os << "Routh-Hurwitz conditions violated (" << r.stability.condition1 << ", "
           << r.stability.condition2 << ")";
        throw InstabilityError(os.str());
    }
    r.moments = mean_square_fluctuations(SpectralContext::from_floquet(r.floquet, params), quad);
    r.k = k_condition(r.moments);
    r.sq = 1.0 / (r.moments.var_q_minus + r.moments.var_p_minus);
    r.ed = r.moments.var_q_minus * r.moments.var_p_plus;
    r.duan = r.moments.var_q_minus + r.moments.var_p_plus;
    return r;
}

}  // namespace optosync
