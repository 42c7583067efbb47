#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "optosync/errors.hpp"
#include "optosync/floquet.hpp"

using namespace optosync;

namespace {

const std::complex<double> I(0.0, 1.0);

std::complex<double> at(const Harmonics& h, double w, double t) {
    return h[0] + h[1] * std::exp(-I * w * t) + h[2] * std::exp(I * w * t);
}

// Projects the sum-mode equation
//   Q'' / w + gamma Q' / w + w Q + (2 g2 - g3) |A|^2 Q - sqrt2 g1 |A|^2 = 0
// onto the harmonics 0, -1, +1 by sampling one period. With first-harmonic A
// and Q every product landing on those harmonics is kept by the balance, so the
// projection vanishes to round-off.
std::array<std::complex<double>, 3> projected_residual(const FloquetSolution& f, const SystemParams& p) {
    const double W = p.mod_freq;
    const double w = p.omega_m1;
    const auto& g = p.couplings;
    const Harmonics& q = f.plus.q_plus;
    const int n = 256;
    std::array<std::complex<double>, 3> c{};
    for (int i = 0; i < n; ++i) {
        const double t = 2 * std::numbers::pi / W * i / n;
        const std::complex<double> e = std::exp(-I * W * t);
        const double mod2 = std::norm(at(f.a, W, t));
        const std::complex<double> Q = at(q, W, t);
        const std::complex<double> dQ = -I * W * (q[1] * e - q[2] * std::conj(e));
        const std::complex<double> ddQ = -W * W * (q[1] * e + q[2] * std::conj(e));
        const std::complex<double> r = ddQ / w + p.gamma_m1 * dQ / w + w * Q +
                                       (2 * g.g2_1 - g.g3) * mod2 * Q -
                                       std::numbers::sqrt2 * g.g1_1 * mod2;
        c[0] += r / double(n);
        c[1] += r * std::conj(e) / double(n);  // coefficient of e^{-i W t}
        c[2] += r * e / double(n);             // coefficient of e^{+i W t}
    }
    return c;
}

SystemParams identical() {
    SystemParams p = reference_parameters();
    p.omega_m2 = p.omega_m1;
    return p;
}

}  // namespace

TEST_CASE("cavity harmonics") {
    SystemParams p = identical();
    const Harmonics a = cavity_fourier_coefficients(p);
    CHECK(std::abs(a[0]) == doctest::Approx(250.0 / std::sqrt(1.01)).epsilon(1e-12));
    CHECK(std::abs(a[0]) == doctest::Approx(248.76).epsilon(1e-4));
    CHECK(a[2].real() == doctest::Approx(5000.0).epsilon(1e-12));
    CHECK(a[2].imag() == 0.0);
    CHECK(std::abs(a[1]) == doctest::Approx(500.0 / std::sqrt(0.01 + 4.0)).epsilon(1e-12));
    p.mod_depth = 0.0;
    const Harmonics b = cavity_fourier_coefficients(p);
    CHECK(std::abs(b[1]) == 0.0);
    CHECK(std::abs(b[2]) == 0.0);
}

TEST_CASE("preconditions of the analytic path") {
    SystemParams p = reference_parameters();
    CHECK_THROWS_AS(solve_floquet(p), PreconditionError);
    p = identical();
    p.couplings.g1_2 *= 2;
    CHECK_THROWS_AS(solve_floquet(p), PreconditionError);
    p = identical();
    p.mod_freq = 1.1;
    CHECK_THROWS_AS(solve_floquet(p), PreconditionError);
    FloquetOptions off;
    off.require_resonance = false;
    CHECK_NOTHROW(solve_floquet(p, off));
    p = identical();
    p.nbar_m2 = 1.0;
    CHECK_THROWS_AS(solve_floquet(p), PreconditionError);
}

TEST_CASE("difference mode: null solution and shift oracle") {
    const SystemParams p = identical();
    const Harmonics a = cavity_fourier_coefficients(p);
    CHECK(verify_minus_mode_null(a, p) == 0.0);
    CHECK(verify_minus_mode_null(a, p, {1e-3, {1e-3, 2e-3}, {1e-3, -2e-3}}) > 0.0);
    const ModeShifts s = minus_mode_shifts(a, p);
    const auto& g = p.couplings;
    double sum = 0.0;
    for (const auto& x : a) sum += x.real() * x.real() + x.imag() * x.imag();
    const double w = (2 * g.g2_1 + g.g3) * sum;
    CHECK(std::abs(s.w - w) <= 1e-12 * w);
}

TEST_CASE("sum mode: trivial and static solutions") {
    SystemParams p = identical();
    p.couplings.g1_1 = p.couplings.g1_2 = 0.0;
    PlusModeSolution s = plus_mode_coefficients(cavity_fourier_coefficients(p), p);
    for (const auto& x : s.q_plus) CHECK(std::abs(x) == 0.0);

    p = identical();
    p.couplings = CouplingCoefficients::symmetric(5e-5, 0.0, 0.0);
    p.mod_depth = 0.0;
    p.gamma_m1 = p.gamma_m2 = 1e-12;
    const Harmonics a = cavity_fourier_coefficients(p);
    s = plus_mode_coefficients(a, p);
    CHECK(s.q_plus[0].real() == doctest::Approx(std::numbers::sqrt2 * 5e-5 * std::norm(a[0])).epsilon(1e-12));
    CHECK(std::abs(s.q_plus[1]) == 0.0);
    CHECK(std::abs(s.q_plus[2]) == 0.0);
}

TEST_CASE("sum mode solves the projected equation of motion") {
    SystemParams p = identical();
    // stronger quadratic coupling so the shift terms matter
    p.couplings = CouplingCoefficients::symmetric(5e-5, 2e-7, 1e-7);
    for (double W : {1.0, 0.9, 1.15}) {
        p.mod_freq = W;
        FloquetOptions o;
        o.require_resonance = false;
        const FloquetSolution f = solve_floquet(p, o);
        const auto r = projected_residual(f, p);
        const double scale = p.omega_m1 * std::abs(f.plus.q_plus[0]) + std::abs(f.plus.q_plus[1]);
        CAPTURE(W);
        for (const auto& x : r) CHECK(std::abs(x) < 1e-9 * scale);
    }
}

TEST_CASE("sum mode at the reference point: residual and conjugacy") {
    const SystemParams p = identical();
    const FloquetSolution f = solve_floquet(p);
    CHECK(f.plus.residual < 1e-10);
    CHECK(f.plus.conjugacy_defect < 1e-8);
    CHECK(f.plus.q_plus[2] == std::conj(f.plus.q_plus[1]));
    CHECK(f.plus.q_plus[0].imag() == 0.0);
    // P_k = -i k Omega / w Q_k
    CHECK(std::abs(f.plus.p_plus[0]) == 0.0);
    CHECK(std::abs(f.plus.p_plus[1] - (-I) * f.plus.q_plus[1]) < 1e-12 * std::abs(f.plus.q_plus[1]));
    for (const auto& x : f.q_minus) CHECK(std::abs(x) == 0.0);
    CHECK(f.weak_coupling);
}

TEST_CASE("effective constants") {
    SystemParams p = identical();
    p.couplings = {};
    FloquetSolution f = solve_floquet(p);
    CHECK(f.constants.f0 == 1.0);
    CHECK(std::abs(f.constants.f1) == 0.0);
    CHECK(std::abs(f.constants.f2) == 0.0);
    CHECK(f.constants.delta_prime == -1.0);

    p = identical();
    p.couplings = CouplingCoefficients::symmetric(5e-5, 0.0, 0.0);
    f = solve_floquet(p);
    CHECK(std::abs(f.constants.f1 - std::numbers::sqrt2 * 5e-5 * f.a[0]) < 1e-15);
    CHECK(f.constants.f2 == std::conj(f.constants.f1));

    // independent re-evaluation with non-zero 2 g2 - g3
    p = identical();
    p.couplings = CouplingCoefficients::symmetric(5e-5, 2e-7, 1e-7);
    f = solve_floquet(p);
    const double l = std::numbers::sqrt2 * 5e-5;
    const double v = 2 * 2e-7 - 1e-7;
    const auto& A0 = f.a[0];
    const auto& A1 = f.a[1];
    const auto& Am = f.a[2];
    const auto& Q0 = f.plus.q_plus[0];
    const auto& Q1 = f.plus.q_plus[1];
    const auto& Qm = f.plus.q_plus[2];
    const double f0 = 1.0 + v * (std::norm(A0) + std::norm(A1) + std::norm(Am));
    const auto f1 = l * A0 - v * (Q0 * A0 + Q1 * Am + Qm * A1);
    const auto f2 = l * std::conj(A0) - v * (Q0 * std::conj(A0) + Q1 * std::conj(A1) + Qm * std::conj(Am));
    const auto dp = -1.0 - l * Q0 + 0.5 * v * (Q0 * Q0 + 2.0 * Q1 * Qm);
    CHECK(std::abs(f.constants.f0 - f0) <= 1e-12 * f0);
    CHECK(std::abs(f.constants.f1 - f1) <= 1e-12 * std::abs(f1));
    CHECK(std::abs(f.constants.f2 - f2) <= 1e-12 * std::abs(f2));
    CHECK(std::abs(f.constants.delta_prime - dp.real()) <= 1e-12 * std::abs(dp));
}

TEST_CASE("Routh-Hurwitz examples") {
    EffectiveConstants k;
    k.f0 = 1.0;
    k.delta_prime = -1.0;
    StabilityReport r = stability_check(k, 1.0, 0.009, 0.1);
    CHECK(r.condition2 == doctest::Approx(1.01));
    CHECK(r.condition1 > 0.0);
    CHECK(r.stable);
    CHECK(r.max_real_eigenvalue < 0.0);

    r = stability_check(k, 1.0, 0.0, 0.0);
    CHECK(r.condition1 == 0.0);
    CHECK_FALSE(r.stable);
}

TEST_CASE("Routh-Hurwitz verdict matches the eigenvalues") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int stable = 0, unstable = 0;
    for (int i = 0; i < 200; ++i) {
        SystemParams p;
        p.detuning = -2.0 + 4.0 * u(rng);
        p.kappa = 0.05 + 0.45 * u(rng);
        p.gamma_m1 = p.gamma_m2 = 0.001 + 0.049 * u(rng);
        p.drive = 2000.0 * u(rng);
        p.mod_depth = 5.0 * u(rng);
        p.couplings = CouplingCoefficients::symmetric(1e-3 * u(rng), 1e-5 * u(rng), 1e-5 * u(rng));
        const FloquetSolution f = solve_floquet(p);
        const StabilityReport r = stability_check(f.constants, p);
        CAPTURE(i);
        CHECK(r.stable == (r.max_real_eigenvalue < 0.0));
        (r.stable ? stable : unstable)++;
    }
    CHECK(stable > 20);
    CHECK(unstable > 20);
}

TEST_CASE("singular sum-mode system is reported") {
    SystemParams p = identical();
    // drive chosen so the static shift cancels the mechanical frequency
    p.mod_depth = 0.0;
    p.couplings = CouplingCoefficients::symmetric(5e-5, 0.0, 1e-6);
    const double s0 = std::norm(cavity_fourier_coefficients(p)[0]);
    p.couplings.g3 = 1.0 / s0;  // w + (2 g2 - g3) s0 = 0
    try {
        solve_floquet(p);
        FAIL("expected SingularSystemError");
    } catch (const SingularSystemError& e) {
        CHECK(e.condition() > 1e14);
    }
}
