#include "doctest.h"

#include <cmath>
#include <random>

#include "optosync/errors.hpp"
#include "optosync/spectrum.hpp"

using namespace optosync;

namespace {

SpectralContext bare(double nbar) {
    SpectralContext c;
    c.omega_m = 1.0;
    c.gamma_m = 0.009;
    c.kappa = 0.1;
    c.nbar = nbar;
    c.constants.f0 = 1.0;
    c.constants.delta_prime = -1.0;
    return c;
}

SystemParams identical() {
    SystemParams p = reference_parameters();
    p.omega_m2 = p.omega_m1;
    return p;
}

// D(w) D(-w) from the displayed factors, without complex conjugation shortcuts
std::complex<double> d_product(const SpectralContext& c, double w) {
    const std::complex<double> I(0, 1);
    const double dp = c.constants.delta_prime;
    const std::complex<double> f1f2 = c.constants.f1 * c.constants.f2;
    auto D = [&](double x) {
        return 2.0 * dp * c.omega_m * f1f2 +
               (x * x + I * x * c.gamma_m - c.omega_m * c.omega_m - c.omega_m * c.plus_shift) *
                   ((c.kappa - I * x) * (c.kappa - I * x) + dp * dp);
    };
    return D(w) * D(-w);
}

double nu_raw(const SpectralContext& c, double w) {
    const double dp = c.constants.delta_prime;
    const double k = c.kappa;
    const double f1f2 = (c.constants.f1 * c.constants.f2).real();
    const double num = 2 * k * f1f2 * (k * k + (dp + w) * (dp + w)) +
                       c.gamma_m * (2 * c.nbar + 1) *
                           ((dp * dp + k * k - w * w) * (dp * dp + k * k - w * w) + 4 * k * k * w * w);
    return num / d_product(c, w).real();
}

}  // namespace

TEST_CASE("difference-mode density values") {
    const SpectralContext c = bare(0.5);
    CHECK(spectral_density_minus(0.0, c).q == doctest::Approx(0.009 * 2.0));
    CHECK(spectral_density_minus(0.0, c).p == 0.0);
    const double w = 1e3;
    CHECK(spectral_density_minus(w, c).p == doctest::Approx(0.018 / (w * w)).epsilon(0.01));
}

TEST_CASE("densities are even") {
    const SystemParams p = identical();
    const SpectralContext c = SpectralContext::from_floquet(solve_floquet(p), p);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 20.0);
    for (int i = 0; i < 100; ++i) {
        const double w = u(rng);
        CHECK(spectral_density_minus(w, c).q == spectral_density_minus(-w, c).q);
        CHECK(spectral_density_minus(w, c).p == spectral_density_minus(-w, c).p);
        CHECK(spectral_density_plus(w, c) == doctest::Approx(spectral_density_plus(-w, c)).epsilon(1e-14));
    }
}

TEST_CASE("sum-mode density matches the displayed expression") {
    SystemParams p = identical();
    p.couplings = CouplingCoefficients::symmetric(5e-5, 2e-7, 1e-7);
    const SpectralContext c = SpectralContext::from_floquet(solve_floquet(p), p);
    for (double w : {0.0, 0.3, 0.99, 1.0, 1.7, 5.0, 40.0}) {
        const std::complex<double> prod = d_product(c, w);
        CHECK(std::abs(prod.imag()) <= 1e-12 * std::abs(prod.real()));
        CHECK(std::norm(c.big_d(w)) == doctest::Approx(prod.real()).epsilon(1e-10));
        const double expect = 0.5 * w * w * (nu_raw(c, w) + nu_raw(c, -w));
        CHECK(spectral_density_plus(w, c) == doctest::Approx(expect).epsilon(1e-10));
    }
}

TEST_CASE("thermal oscillator integrals") {
    for (double nbar : {0.0, 0.5, 2.0}) {
        const FluctuationMoments m = mean_square_fluctuations(bare(nbar));
        const double expect = (2 * nbar + 1) / 2;
        CAPTURE(nbar);
        CHECK(std::abs(m.var_q_minus - expect) <= 1e-6 * expect);
        CHECK(std::abs(m.var_p_minus - expect) <= 1e-6 * expect);
        CHECK(std::abs(m.var_p_plus - expect) <= 1e-6 * expect);
        CHECK(m.err_q_minus <= 1e-8 * m.var_q_minus);
        CHECK(m.err_p_plus <= 1e-8 * m.var_p_plus);
    }
}

TEST_CASE("variances grow with the bath occupation") {
    SystemParams p = identical();
    double prev[3] = {0, 0, 0};
    for (double nbar : {0.0, 0.5, 1.0, 2.0}) {
        p.set_nbar(nbar);
        const AnalyticReport r = analyze(p);
        CHECK(r.moments.var_q_minus > prev[0]);
        CHECK(r.moments.var_p_minus > prev[1]);
        CHECK(r.moments.var_p_plus > prev[2]);
        prev[0] = r.moments.var_q_minus;
        prev[1] = r.moments.var_p_minus;
        prev[2] = r.moments.var_p_plus;
    }
}

TEST_CASE("uncertainty bound on the difference mode") {
    SystemParams p = identical();
    CHECK(analyze(p).moments.uncertainty_consistent());
    // the stiffened difference mode squeezes <dq_-^2> below the vacuum bound
    // when the bath is cold; the predicate reports it
    p.set_nbar(0.0);
    const FluctuationMoments m = analyze(p).moments;
    CHECK(m.var_p_minus == doctest::Approx(0.5).epsilon(1e-8));
    CHECK_FALSE(m.uncertainty_consistent());
}

TEST_CASE("reference point is inside the K > 0 region") {
    const AnalyticReport r = analyze(identical());
    CHECK(r.stability.stable);
    CHECK(r.k > 0.0);
    CHECK(r.ed < 0.25);
}

TEST_CASE("unstable points are refused") {
    SpectralContext c = bare(0.5);
    c.constants.delta_prime = 1.0;
    c.constants.f1 = {30.0, 0.0};
    c.constants.f2 = {30.0, 0.0};
    CHECK_THROWS_AS(mean_square_fluctuations(c), InstabilityError);
    SystemParams p = identical();
    p.detuning = -0.5;
    p.drive = 2000.0;
    FloquetOptions o;
    o.require_resonance = false;
    CHECK_THROWS_AS(analyze(p, o), InstabilityError);
}

TEST_CASE("K arithmetic") {
    FluctuationMoments m;
    m.var_p_plus = m.var_p_minus = 0.5;
    CHECK(k_condition(m) == doctest::Approx(0.0));
    m.var_p_minus = 1.0;
    CHECK(k_condition(m) == doctest::Approx(0.5));
    m.var_p_plus = 1.0;
    CHECK(k_condition(m) == doctest::Approx(0.25));
    m.var_p_plus = 0.0;
    CHECK_THROWS_AS(k_condition(m), DomainError);
}

TEST_CASE("S_q in terms of E_D") {
    CHECK(sync_from_entanglement(0.25, 0.5, 0.5) == doctest::Approx(1.0));
    CHECK(sync_from_entanglement(10.0, 0.5, 0.5) == doctest::Approx(0.5 / 10.25));
    CHECK_THROWS_AS(sync_from_entanglement(-1.0, 0.5, 0.5), DomainError);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.01, 5.0);
    for (int i = 0; i < 100; ++i) {
        const double qm = u(rng), pm = u(rng), pp = u(rng);
        CHECK(sync_from_entanglement(qm * pp, pm, pp) == doctest::Approx(1.0 / (qm + pm)).epsilon(1e-13));
    }
}
