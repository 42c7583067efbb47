#pragma once

#include <string>

namespace optosync {

/// Membrane-in-the-middle cavity in SI-like units. The end mirror sits at
/// q1 = 0, the membrane at q2 = membrane_position.
struct CavityGeometry {
    double length = 0.0;
    double reflectivity = 0.0;
    double wavelength = 0.0;
    double light_speed = 299792458.0;
    double membrane_position = 0.0;

    void validate() const;
};

/// Linear (g1), quadratic (g2) and cross (g3) optomechanical couplings.
/// Index 1 is the end mirror, index 2 the membrane.
struct CouplingCoefficients {
    double g1_1 = 0.0;
    double g1_2 = 0.0;
    double g2_1 = 0.0;
    double g2_2 = 0.0;
    double g3 = 0.0;

    static CouplingCoefficients symmetric(double g1, double g2, double g3) {
        return {g1, g1, g2, g2, g3};
    }
    bool is_symmetric() const { return g1_1 == g1_2 && g2_1 == g2_2; }
    double max_abs() const;
};

/// Second-order expansion of the cavity resonance around (0, q20):
///   w_cav ~ omega_c - g1_1 q1 - g1_2 q2 + g2_1 q1^2 + g2_2 q2^2 - g3 q1 q2
struct CavityExpansion {
    double omega_c = 0.0;
    CouplingCoefficients couplings;
};

/// Exact one-dimensional resonance c/(L+q1) * acos(r cos(4 pi q2 / lambda)).
double cavity_frequency(const CavityGeometry& geometry, double q1, double q2);

/// Closed-form expansion coefficients in the geometry's own units.
/// Throws DomainError when the acos argument reaches +-1.
CavityExpansion taylor_coefficients(const CavityGeometry& geometry);

/// Converts physical couplings to the dimensionless convention used by the
/// dynamics: frequencies divided by omega_ref, displacements measured in
/// units of length_scale.
CouplingCoefficients normalize(const CouplingCoefficients& physical, double omega_ref,
                               double length_scale);

/// All model constants, dimensionless with omega_m1 = 1 by convention.
struct SystemParams {
    double omega_m1 = 1.0;
    double omega_m2 = 1.0;
    double detuning = -1.0;     // Delta = omega_c - omega_l
    double gamma_m1 = 0.009;
    double gamma_m2 = 0.009;
    double kappa = 0.1;
    double drive = 0.0;         // E
    double mod_depth = 0.0;     // eta_D
    double mod_freq = 1.0;      // Omega_D
    double nbar_m1 = 0.0;
    double nbar_m2 = 0.0;
    CouplingCoefficients couplings;

    /// Throws InputError naming the first violated invariant.
    void validate() const;

    void set_nbar(double nbar) { nbar_m1 = nbar_m2 = nbar; }
};

/// Parameters of the reference limit-cycle run: omega_m1 = -Delta = 1,
/// omega_m2 = 1.005, nbar = 0.5, g1 = 5e-5, g2 = g1 * 1e-2, g3 = 1e-6,
/// gamma = 0.009, kappa = 0.1, E = 250, eta_D = 4, Omega_D = 1.
SystemParams reference_parameters();

/// True when every |g| is at most `ratio` times min(omega_m1, omega_m2, kappa).
bool weak_coupling(const SystemParams& params, double ratio = 1e-2);

/// E(t) = E [1 + eta_D cos(Omega_D t)].
double drive_amplitude(double t, const SystemParams& params);

/// E(t) = e0 + e_plus exp(-i Omega_D t) + e_minus exp(+i Omega_D t).
struct DriveComponents {
    double e0 = 0.0;
    double e_plus = 0.0;
    double e_minus = 0.0;
};

DriveComponents drive_components(const SystemParams& params);

}  // namespace optosync
