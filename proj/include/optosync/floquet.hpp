#pragma once

#include <array>
#include <complex>

#include <Eigen/Core>

#include "optosync/params.hpp"

namespace optosync {

using Complex = std::complex<double>;

/// First-harmonic expansion X(t) = x_m1 e^{+i Omega_D t} + x0 + x1 e^{-i Omega_D t}.
/// Arrays below are ordered (x0, x1, x_m1).
using Harmonics = std::array<Complex, 3>;

struct FloquetOptions {
    /// Reject Omega_D != omega_m. When false the same harmonic balance is
    /// carried out at the actual Omega_D; it reduces to the resonant
    /// equations when Omega_D = omega_m.
    bool require_resonance = true;
    double resonance_tolerance = 1e-9;
    double condition_warning = 1e8;
    double condition_limit = 1e14;
    double conjugacy_tolerance = 1e-8;
    double weak_coupling_ratio = 1e-2;
};

/// Checks the identical-oscillator assumptions (and resonance, if required).
/// Throws PreconditionError naming the violated assumption.
void check_floquet_preconditions(const SystemParams& params, const FloquetOptions& options);

/// Long-time cavity harmonics A_k = E_k / (kappa + i (Delta - k Omega_D)).
Harmonics cavity_fourier_coefficients(const SystemParams& params, const FloquetOptions& options = {});

/// Harmonics of |A(t)|^2 truncated to the products of first harmonics:
/// (s0, s1, s_m1, s2, s_m2) with s_k the coefficient of e^{-i k Omega_D t}.
struct PhotonHarmonics {
    double s0 = 0.0;
    Complex s1, s_m1, s2, s_m2;
};
PhotonHarmonics photon_harmonics(const Harmonics& a);

/// Frequency shifts of the difference mode, scaled by (2 g2 + g3).
struct ModeShifts {
    double w = 0.0;   // W
    Complex w0;       // W0
    Complex w1;       // W1
};
ModeShifts minus_mode_shifts(const Harmonics& a, const SystemParams& params);
/// Same construction with (2 g2 - g3): V, V0, V1.
ModeShifts plus_mode_shifts(const Harmonics& a, const SystemParams& params);

/// 3x3 harmonic-balance matrix acting on (x0, x1, x_m1); rows are the
/// balances of the e^0, e^{+i Omega_D t} and e^{-i Omega_D t} components.
Eigen::Matrix3cd harmonic_balance_matrix(const ModeShifts& shifts, const SystemParams& params);

/// Max |lhs| of the difference-mode balance evaluated at `q_minus`.
double verify_minus_mode_null(const Harmonics& a, const SystemParams& params,
                              const Harmonics& q_minus = {});

struct PlusModeSolution {
    Harmonics q_plus{};
    Harmonics p_plus{};
    double condition_number = 0.0;
    bool ill_conditioned = false;
    double residual = 0.0;           // relative residual of the raw solve
    double conjugacy_defect = 0.0;   // |Q_m1 - conj(Q_1)| + |Im Q_0| before symmetrization
};

/// Solves the sum-mode balance with right-hand side sqrt(2) g1 (|A|^2 harmonics),
/// then enforces Q_m1 = conj(Q_1), Q_0 real. P_k = -i k Omega_D / omega_m Q_k.
/// Throws SingularSystemError when the condition number exceeds the limit and
/// NumericalError when the conjugacy defect exceeds tolerance.
PlusModeSolution plus_mode_coefficients(const Harmonics& a, const SystemParams& params,
                                        const FloquetOptions& options = {});

struct EffectiveConstants {
    double f0 = 0.0;
    Complex f1;
    Complex f2;
    double delta_prime = 0.0;
};

struct FloquetSolution {
    Harmonics a{};
    PlusModeSolution plus;
    Harmonics q_minus{};   // identically zero
    Harmonics p_minus{};
    double minus_null_residual = 0.0;
    EffectiveConstants constants;
    double photon_sum = 0.0;    // |A0|^2 + |A1|^2 + |A_m1|^2
    bool weak_coupling = false;
    double minus_shift_ratio = 0.0;  // W / omega_m
    double plus_shift_ratio = 0.0;   // V / omega_m
};

EffectiveConstants effective_constants(const FloquetSolution& floquet, const SystemParams& params);

/// Full first-harmonic pipeline: cavity harmonics, difference-mode null check,
/// sum-mode solve and effective constants.
FloquetSolution solve_floquet(const SystemParams& params, const FloquetOptions& options = {});

struct StabilityReport {
    double condition1 = 0.0;
    double condition2 = 0.0;
    bool stable = false;
    double max_real_eigenvalue = 0.0;
};

/// 4x4 drift of (dq_+, dp_+, dx, dy).
Eigen::Matrix4cd fluctuation_matrix(const EffectiveConstants& k, double omega_m, double gamma_m,
                                    double kappa);

/// Routh-Hurwitz verdict for the sum-mode fluctuations plus an eigenvalue cross-check.
StabilityReport stability_check(const EffectiveConstants& k, double omega_m, double gamma_m,
                                double kappa);
StabilityReport stability_check(const EffectiveConstants& k, const SystemParams& params);

}  // namespace optosync
