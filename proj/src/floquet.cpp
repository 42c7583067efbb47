#include "optosync/floquet.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "optosync/errors.hpp"

namespace optosync {

namespace {

constexpr Complex I{0.0, 1.0};

bool same(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b)); }

}  // namespace

void check_floquet_preconditions(const SystemParams& params, const FloquetOptions& options) {
    params.validate();
    if (!same(params.omega_m1, params.omega_m2)) {
        throw PreconditionError("analytic path requires omega_m1 = omega_m2");
    }
    if (!params.couplings.is_symmetric()) {
        throw PreconditionError("analytic path requires g1_1 = g1_2 and g2_1 = g2_2");
    }
    if (!same(params.gamma_m1, params.gamma_m2)) {
        throw PreconditionError("analytic path requires gamma_m1 = gamma_m2");
    }
    if (!same(params.nbar_m1, params.nbar_m2)) {
        throw PreconditionError("analytic path requires nbar_m1 = nbar_m2");
    }
    if (options.require_resonance &&
        std::abs(params.mod_freq - params.omega_m1) >= options.resonance_tolerance) {
        throw PreconditionError("analytic path requires Omega_D = omega_m");
    }
}

Harmonics cavity_fourier_coefficients(const SystemParams& params, const FloquetOptions& options) {
    check_floquet_preconditions(params, options);
    const DriveComponents e = drive_components(params);
    const double Om = params.mod_freq;
    Harmonics a;
    a[0] = e.e0 / Complex(params.kappa, params.detuning);
    a[1] = e.e_plus / Complex(params.kappa, params.detuning - Om);
    a[2] = e.e_minus / Complex(params.kappa, params.detuning + Om);
    return a;
}

PhotonHarmonics photon_harmonics(const Harmonics& a) {
    PhotonHarmonics s;
    s.s0 = std::norm(a[0]) + std::norm(a[1]) + std::norm(a[2]);
    s.s_m1 = a[0] * std::conj(a[1]) + std::conj(a[0]) * a[2];
    s.s1 = std::conj(s.s_m1);
    s.s_m2 = std::conj(a[1]) * a[2];
    s.s2 = std::conj(s.s_m2);
    return s;
}

namespace {

ModeShifts scaled_shifts(const Harmonics& a, double coupling) {
    const PhotonHarmonics s = photon_harmonics(a);
    return {coupling * s.s0, coupling * s.s_m1, coupling * s.s_m2};
}

}  // namespace

ModeShifts minus_mode_shifts(const Harmonics& a, const SystemParams& params) {
    const auto& g = params.couplings;
    return scaled_shifts(a, 2.0 * g.g2_1 + g.g3);
}

ModeShifts plus_mode_shifts(const Harmonics& a, const SystemParams& params) {
    const auto& g = params.couplings;
    return scaled_shifts(a, 2.0 * g.g2_1 - g.g3);
}

Eigen::Matrix3cd harmonic_balance_matrix(const ModeShifts& s, const SystemParams& params) {
    const double w = params.omega_m1;
    const double gamma = params.gamma_m1;
    const double Om = params.mod_freq;
    // diagonal of harmonic k: omega_m - k^2 Omega^2 / omega_m - i gamma k Omega / omega_m
    auto diag = [&](int k) {
        const double kk = static_cast<double>(k);
        return Complex(w - kk * kk * Om * Om / w, -gamma * kk * Om / w);
    };
    Eigen::Matrix3cd m;
    m << diag(0) + s.w, s.w0, std::conj(s.w0),
         s.w0, s.w1, diag(-1) + s.w,
         std::conj(s.w0), diag(1) + s.w, std::conj(s.w1);
    return m;
}

double verify_minus_mode_null(const Harmonics& a, const SystemParams& params,
                              const Harmonics& q_minus) {
    const Eigen::Matrix3cd m = harmonic_balance_matrix(minus_mode_shifts(a, params), params);
    const Eigen::Vector3cd x(q_minus[0], q_minus[1], q_minus[2]);
    return (m * x).cwiseAbs().maxCoeff();
}

PlusModeSolution plus_mode_coefficients(const Harmonics& a, const SystemParams& params,
                                        const FloquetOptions& options) {
    const Eigen::Matrix3cd m = harmonic_balance_matrix(plus_mode_shifts(a, params), params);
    const PhotonHarmonics s = photon_harmonics(a);
    const double lin = std::numbers::sqrt2 * params.couplings.g1_1;
    const Eigen::Vector3cd rhs(lin * s.s0, lin * s.s_m1, lin * s.s1);

    PlusModeSolution out;
    const Eigen::PartialPivLU<Eigen::Matrix3cd> lu(m);
    const Eigen::Matrix3cd inv = lu.inverse();
    auto norm1 = [](const Eigen::Matrix3cd& x) { return x.cwiseAbs().colwise().sum().maxCoeff(); };
    out.condition_number = norm1(m) * norm1(inv);
    if (!std::isfinite(out.condition_number) || out.condition_number > options.condition_limit) {
        std::ostringstream os;
        os << "sum-mode harmonic balance is singular (condition number " << out.condition_number
           << ")";
        throw SingularSystemError(os.str(), out.condition_number);
    }
    out.ill_conditioned = out.condition_number > options.condition_warning;

    const Eigen::Vector3cd x = lu.solve(rhs);
    const double denom = norm1(m) * x.cwiseAbs().maxCoeff() + rhs.cwiseAbs().maxCoeff();
    out.residual = denom > 0.0 ? (m * x - rhs).cwiseAbs().maxCoeff() / denom : 0.0;

    const double scale = std::max(x.cwiseAbs().maxCoeff(), 1e-300);
    out.conjugacy_defect = std::abs(x[2] - std::conj(x[1])) + std::abs(x[0].imag());
    if (out.conjugacy_defect > options.conjugacy_tolerance * scale &&
        out.conjugacy_defect > 1e-300) {
        std::ostringstream os;
        os << "sum-mode solution violates Q_m1 = conj(Q_1) (defect " << out.conjugacy_defect << ")";
        throw NumericalError(os.str());
    }
    const Complex q1 = 0.5 * (x[1] + std::conj(x[2]));
    out.q_plus = {Complex(x[0].real(), 0.0), q1, std::conj(q1)};

    const double ratio = params.mod_freq / params.omega_m1;
    const int k[3] = {0, 1, -1};
    for (int i = 0; i < 3; ++i) out.p_plus[i] = -I * (static_cast<double>(k[i]) * ratio) * out.q_plus[i];
    return out;
}

EffectiveConstants effective_constants(const FloquetSolution& f, const SystemParams& params) {
    const auto& g = params.couplings;
    const double lin = std::numbers::sqrt2 * g.g1_1;
    const double quad = 2.0 * g.g2_1 - g.g3;
    const Harmonics& a = f.a;
    const Harmonics& q = f.plus.q_plus;
    const double sum = std::norm(a[0]) + std::norm(a[1]) + std::norm(a[2]);

    EffectiveConstants k;
    k.f0 = params.omega_m1 + quad * sum;
    k.f1 = lin * a[0] - quad * (q[0] * a[0] + q[1] * a[2] + q[2] * a[1]);
    k.f2 = lin * std::conj(a[0]) -
           quad * (q[0] * std::conj(a[0]) + q[1] * std::conj(a[1]) + q[2] * std::conj(a[2]));
    const Complex dp = params.detuning - lin * q[0] + 0.5 * quad * (q[0] * q[0] + 2.0 * q[1] * q[2]);
    k.delta_prime = dp.real();
    return k;
}

FloquetSolution solve_floquet(const SystemParams& params, const FloquetOptions& options) {
    FloquetSolution f;
    f.a = cavity_fourier_coefficients(params, options);
    f.photon_sum = photon_harmonics(f.a).s0;
    f.minus_null_residual = verify_minus_mode_null(f.a, params, f.q_minus);
    f.plus = plus_mode_coefficients(f.a, params, options);
    f.constants = effective_constants(f, params);
    f.weak_coupling = weak_coupling(params, options.weak_coupling_ratio);
    f.minus_shift_ratio = minus_mode_shifts(f.a, params).w / params.omega_m1;
    f.plus_shift_ratio = plus_mode_shifts(f.a, params).w / params.omega_m1;
    return f;
}

Eigen::Matrix4cd fluctuation_matrix(const EffectiveConstants& k, double omega_m, double gamma_m,
                                    double kappa) {
    const Complex u = (k.f1 + k.f2) / std::numbers::sqrt2;
    const Complex v = I * (k.f2 - k.f1) / std::numbers::sqrt2;
    Eigen::Matrix4cd f;
    f << 0.0, omega_m, 0.0, 0.0,
         -k.f0, -gamma_m, u, v,
         -v, 0.0, -kappa, k.delta_prime,
         u, 0.0, -k.delta_prime, -kappa;
    return f;
}

StabilityReport stability_check(const EffectiveConstants& k, double omega_m, double gamma_m,
                                double kappa) {
    const double d = k.delta_prime;
    const double d2 = d * d;
    const double f0w = k.f0 * omega_m;
    const double f1f2 = (k.f1 * k.f2).real();
    const double k2 = kappa * kappa;

    StabilityReport r;
    r.condition1 = kappa * gamma_m *
                       ((d2 + k2) * (d2 + k2) + (f0w + gamma_m * kappa) * (f0w + gamma_m * kappa) +
                        2.0 * gamma_m * kappa * (k2 + d2) + 2.0 * f0w * (k2 - d2) +
                        gamma_m * gamma_m * d2) +
                   f1f2 * d * omega_m * (gamma_m + 2.0 * kappa) * (gamma_m + 2.0 * kappa);
    r.condition2 = f0w * (k2 + d2) - 2.0 * f1f2 * omega_m * d;
    r.stable = r.condition1 > 0.0 && r.condition2 > 0.0;

    const Eigen::ComplexEigenSolver<Eigen::Matrix4cd> es(
        fluctuation_matrix(k, omega_m, gamma_m, kappa), false);
    r.max_real_eigenvalue = es.eigenvalues().real().maxCoeff();
    return r;
}

StabilityReport stability_check(const EffectiveConstants& k, const SystemParams& params) {
    return stability_check(k, params.omega_m1, params.gamma_m1, params.kappa);
}

}  // namespace optosync
