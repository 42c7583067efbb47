#include "optosync/params.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "optosync/errors.hpp"

namespace optosync {

namespace {

void require(bool ok, const std::string& message) {
    if (!ok) throw InputError(message);
}

bool finite(double x) { return std::isfinite(x); }

}  // namespace

void CavityGeometry::validate() const {
    require(finite(length) && length > 0.0, "geometry: cavity length L must be > 0");
    require(finite(wavelength) && wavelength > 0.0, "geometry: wavelength must be > 0");
    require(finite(light_speed) && light_speed > 0.0, "geometry: light speed must be > 0");
    require(finite(reflectivity) && reflectivity >= 0.0 && reflectivity < 1.0,
            "geometry: membrane reflectivity must satisfy 0 <= r_c < 1");
    require(finite(membrane_position), "geometry: membrane position must be finite");
}

double CouplingCoefficients::max_abs() const {
    return std::max({std::abs(g1_1), std::abs(g1_2), std::abs(g2_1), std::abs(g2_2),
                     std::abs(g3)});
}

double cavity_frequency(const CavityGeometry& geometry, double q1, double q2) {
    const double k = 4.0 * std::numbers::pi / geometry.wavelength;
    return geometry.light_speed / (geometry.length + q1) *
           std::acos(geometry.reflectivity * std::cos(k * q2));
}

CavityExpansion taylor_coefficients(const CavityGeometry& geometry) {
    geometry.validate();
    const double c = geometry.light_speed;
    const double L = geometry.length;
    const double q20 = geometry.membrane_position;
    const double k = 4.0 * std::numbers::pi / geometry.wavelength;

    // s(q2) = acos(u), u = r cos(k q2)
    const double u = geometry.reflectivity * std::cos(k * q20);
    const double du = -geometry.reflectivity * k * std::sin(k * q20);
    const double one_minus_u2 = 1.0 - u * u;
    if (!(one_minus_u2 > 1e-14)) {
        throw DomainError("taylor_coefficients: |r_c cos(4 pi q20 / lambda)| reaches 1, "
                          "cavity frequency derivative is singular");
    }
    const double root = std::sqrt(one_minus_u2);
    const double s = std::acos(u);
    const double ds = -du / root;
    const double d2s = k * k * u / root - du * du * u / (one_minus_u2 * root);

    const double w0 = c * s / L;
    const double d1 = -c * s / (L * L);      // d/dq1
    const double d11 = 2.0 * c * s / (L * L * L);
    const double d2 = c * ds / L;            // d/dq2
    const double d22 = c * d2s / L;
    const double d12 = -c * ds / (L * L);

    // Re-expansion of the Taylor series about (0, q20) in powers of the
    // absolute coordinates (q1, q2).
    CavityExpansion out;
    out.omega_c = w0 - d2 * q20 + 0.5 * d22 * q20 * q20;
    out.couplings.g1_1 = -d1 + d12 * q20;
    out.couplings.g1_2 = -d2 + d22 * q20;
    out.couplings.g2_1 = 0.5 * d11;
    out.couplings.g2_2 = 0.5 * d22;
    out.couplings.g3 = -d12;
    return out;
}

CouplingCoefficients normalize(const CouplingCoefficients& physical, double omega_ref,
                               double length_scale) {
    require(finite(omega_ref) && omega_ref > 0.0, "normalize: reference frequency must be > 0");
    require(finite(length_scale) && length_scale > 0.0, "normalize: length scale must be > 0");
    const double l1 = length_scale / omega_ref;
    const double l2 = length_scale * length_scale / omega_ref;
    return {physical.g1_1 * l1, physical.g1_2 * l1, physical.g2_1 * l2, physical.g2_2 * l2,
            physical.g3 * l2};
}

void SystemParams::validate() const {
    const double all[] = {omega_m1, omega_m2, detuning, gamma_m1,  gamma_m2,  kappa,
                          drive,    mod_depth, mod_freq, nbar_m1,  nbar_m2,   couplings.g1_1,
                          couplings.g1_2, couplings.g2_1, couplings.g2_2, couplings.g3};
    for (double v : all) require(finite(v), "parameters must be finite");
    require(omega_m1 > 0.0, "omega_m1 must be > 0");
    require(omega_m2 > 0.0, "omega_m2 must be > 0");
    require(gamma_m1 > 0.0, "gamma_m1 must be > 0");
    require(gamma_m2 > 0.0, "gamma_m2 must be > 0");
    require(kappa > 0.0, "kappa must be > 0");
    require(nbar_m1 >= 0.0, "nbar_m1 must be >= 0");
    require(nbar_m2 >= 0.0, "nbar_m2 must be >= 0");
    require(mod_depth >= 0.0, "eta_D must be >= 0");
}

SystemParams reference_parameters() {
    SystemParams p;
    p.omega_m1 = 1.0;
    p.omega_m2 = 1.005;
    p.detuning = -1.0;
    p.gamma_m1 = 0.009;
    p.gamma_m2 = 0.009;
    p.kappa = 0.1;
    p.drive = 250.0;
    p.mod_depth = 4.0;
    p.mod_freq = 1.0;
    p.set_nbar(0.5);
    const double g1 = 5e-5;
    p.couplings = CouplingCoefficients::symmetric(g1, g1 * 1e-2, 1e-6);
    return p;
}

bool weak_coupling(const SystemParams& params, double ratio) {
    const double scale = std::min({params.omega_m1, params.omega_m2, params.kappa});
    return params.couplings.max_abs() <= ratio * scale;
}

double drive_amplitude(double t, const SystemParams& params) {
    return params.drive * (1.0 + params.mod_depth * std::cos(params.mod_freq * t));
}

DriveComponents drive_components(const SystemParams& params) {
    const double side = 0.5 * params.drive * params.mod_depth;
    return {params.drive, side, side};
}

}  // namespace optosync
