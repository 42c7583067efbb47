#include "doctest.h"

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "optosync/errors.hpp"
#include "optosync/params.hpp"

using namespace optosync;

namespace {

// Central differences of the exact resonance around (0, q20).
struct FiniteDiff {
    double f, d1, d2, d11, d22, d12;
};

FiniteDiff central(const CavityGeometry& g, double step) {
    const double q20 = g.membrane_position;
    auto f = [&](double a, double b) { return cavity_frequency(g, a, q20 + b); };
    const double h1 = step * g.length;
    const double h2 = step * g.wavelength;
    FiniteDiff d;
    d.f = f(0, 0);
    d.d1 = (f(h1, 0) - f(-h1, 0)) / (2 * h1);
    d.d2 = (f(0, h2) - f(0, -h2)) / (2 * h2);
    d.d11 = (f(h1, 0) - 2 * d.f + f(-h1, 0)) / (h1 * h1);
    d.d22 = (f(0, h2) - 2 * d.f + f(0, -h2)) / (h2 * h2);
    d.d12 = (f(h1, h2) - f(h1, -h2) - f(-h1, h2) + f(-h1, -h2)) / (4 * h1 * h2);
    return d;
}

// Richardson step on two central differences: O(h^4).
FiniteDiff finite_diff(const CavityGeometry& g) {
    const FiniteDiff a = central(g, 2e-4);
    const FiniteDiff b = central(g, 1e-4);
    auto r = [](double x, double y) { return (4 * y - x) / 3; };
    return {b.f, r(a.d1, b.d1), r(a.d2, b.d2), r(a.d11, b.d11), r(a.d22, b.d22), r(a.d12, b.d12)};
}

bool close(double a, double b, double scale, double tol) {
    return std::abs(a - b) <= tol * std::max(std::abs(b), scale);
}

}  // namespace

TEST_CASE("expansion matches finite differences of the exact resonance") {
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> length(1e-3, 1e-1);
    std::uniform_real_distribution<double> lambda(5e-7, 1.6e-6);
    std::uniform_real_distribution<double> refl(0.0, 0.95);
    std::uniform_real_distribution<double> pos(0.0, 3.0);
    for (int i = 0; i < 100; ++i) {
        CavityGeometry g;
        g.length = length(rng);
        g.wavelength = lambda(rng);
        g.reflectivity = refl(rng);
        g.membrane_position = pos(rng) * g.wavelength;
        const CavityExpansion e = taylor_coefficients(g);
        const CouplingCoefficients& c = e.couplings;
        const FiniteDiff fd = finite_diff(g);
        const double q20 = g.membrane_position;
        const double k = 4 * std::numbers::pi / g.wavelength;
        const double w = fd.f;
        CAPTURE(i);
        // derivatives of w_c - g1_1 q1 - g1_2 q2 + g2_1 q1^2 + g2_2 q2^2 - g3 q1 q2 at (0, q20)
        CHECK(close(e.omega_c - c.g1_2 * q20 + c.g2_2 * q20 * q20, fd.f, w, 1e-6));
        CHECK(close(-c.g1_1 - c.g3 * q20, fd.d1, w / g.length, 1e-6));
        CHECK(close(-c.g1_2 + 2 * c.g2_2 * q20, fd.d2, w * k, 1e-6));
        CHECK(close(2 * c.g2_1, fd.d11, w / (g.length * g.length), 1e-6));
        CHECK(close(2 * c.g2_2, fd.d22, w * k * k, 1e-6));
        CHECK(close(-c.g3, fd.d12, w * k / g.length, 1e-6));
    }
}

TEST_CASE("near-unit membrane reflectivity at a node is a domain error") {
    CavityGeometry g{1e-2, std::nextafter(1.0, 0.0), 1e-6, 299792458.0, 0.0};
    CHECK_THROWS_AS(taylor_coefficients(g), DomainError);
    g.reflectivity = 1.0;
    CHECK_THROWS_AS(taylor_coefficients(g), InputError);
}

TEST_CASE("normalization scales linear and quadratic couplings") {
    const CouplingCoefficients phys{2.0, 4.0, 6.0, 8.0, 10.0};
    const CouplingCoefficients n = normalize(phys, 2.0, 0.5);
    CHECK(n.g1_1 == doctest::Approx(0.5));
    CHECK(n.g1_2 == doctest::Approx(1.0));
    CHECK(n.g2_1 == doctest::Approx(0.75));
    CHECK(n.g2_2 == doctest::Approx(1.0));
    CHECK(n.g3 == doctest::Approx(1.25));
    CHECK_THROWS_AS(normalize(phys, 0.0, 1.0), InputError);
}

TEST_CASE("drive decomposition") {
    SystemParams p = reference_parameters();
    const DriveComponents e = drive_components(p);
    CHECK(e.e0 == 250.0);
    CHECK(e.e_plus == 500.0);
    CHECK(e.e_minus == 500.0);
    CHECK(drive_amplitude(0.0, p) == doctest::Approx(250.0 * 5.0));
    p.mod_depth = 0.0;
    CHECK(drive_amplitude(3.7, p) == 250.0);

    p = reference_parameters();
    p.mod_freq = 1.3;
    for (double t = 0.0; t < 50.0; t += 0.37) {
        const std::complex<double> z = e.e0 + e.e_plus * std::exp(std::complex<double>(0, -p.mod_freq * t)) +
                                       e.e_minus * std::exp(std::complex<double>(0, p.mod_freq * t));
        CHECK(std::abs(z.real() - drive_amplitude(t, p)) <= 1e-12 * 1250.0);
        CHECK(std::abs(z.imag()) <= 1e-12 * 1250.0);
    }
}

TEST_CASE("parameter validation names the invariant") {
    SystemParams p = reference_parameters();
    CHECK_NOTHROW(p.validate());
    p.kappa = -1.0;
    try {
        p.validate();
        FAIL("expected InputError");
    } catch (const InputError& e) {
        CHECK(std::string(e.what()).find("kappa") != std::string::npos);
    }
    p = reference_parameters();
    p.nbar_m2 = -0.1;
    CHECK_THROWS_AS(p.validate(), InputError);
    p = reference_parameters();
    p.drive = std::nan("");
    CHECK_THROWS_AS(p.validate(), InputError);
}

TEST_CASE("weak-coupling predicate") {
    SystemParams p = reference_parameters();
    CHECK(weak_coupling(p));
    p.couplings.g1_1 = 0.01;
    CHECK_FALSE(weak_coupling(p));
    CHECK(weak_coupling(p, 0.2));
}
