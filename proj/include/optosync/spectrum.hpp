#pragma once

#include <complex>
#include <vector>

#include "optosync/floquet.hpp"
#include "optosync/params.hpp"

namespace optosync {

/// Everything the fluctuation spectra depend on.
struct SpectralContext {
    double omega_m = 1.0;
    double gamma_m = 0.0;
    double kappa = 0.0;
    double nbar = 0.0;
    EffectiveConstants constants;
    double minus_shift = 0.0;  // (2 g2 + g3) * photon sum
    double plus_shift = 0.0;   // (2 g2 - g3) * photon sum

    static SpectralContext from_floquet(const FloquetSolution& floquet, const SystemParams& params);

    /// d(w) = w^2 + i w gamma - omega_m^2 - omega_m * minus_shift
    std::complex<double> d(double w) const;
    /// D(w) = 2 Delta' omega_m F1 F2 + [w^2 + i w gamma - omega_m^2 - omega_m * plus_shift]
    ///        * [(kappa - i w)^2 + Delta'^2]
    std::complex<double> big_d(double w) const;
    /// Re(F1 F2); throws NumericalError if the imaginary part is not negligible.
    double f1f2() const;
    double thermal_weight() const { return gamma_m * (2.0 * nbar + 1.0); }
};

struct MinusDensity {
    double q = 0.0;  // omega_m^2 mu(w)
    double p = 0.0;  // w^2 mu(w)
};

MinusDensity spectral_density_minus(double w, const SpectralContext& ctx);

/// w^2 nu(w), averaged over +-w so the density is even.
double spectral_density_plus(double w, const SpectralContext& ctx);

struct QuadratureControl {
    double rel_tol = 1e-8;
    double cutoff_factor = 50.0;  // integrate numerically up to cutoff_factor * (largest scale)
    unsigned max_depth = 12;
    bool check_symmetry = true;
    double symmetry_tol = 1e-8;
};

struct FluctuationMoments {
    double var_q_minus = 0.0;
    double var_p_minus = 0.0;
    double var_p_plus = 0.0;
    double err_q_minus = 0.0;
    double err_p_minus = 0.0;
    double err_p_plus = 0.0;
    double cutoff = 0.0;

    /// <dq_-^2> + <dp_-^2> >= 1 - tol
    bool uncertainty_consistent(double tol = 1e-6) const { return var_q_minus + var_p_minus >= 1.0 - tol; }
};

/// (1/2pi) times the full-line integrals of the three densities: adaptive
/// Gauss-Kronrod on [0, cutoff] with breakpoints at the resonances, plus the
/// tail mapped to u = 1/w, doubled by evenness. Throws
/// InstabilityError when the fluctuations are unstable and ToleranceError when
/// the error estimate exceeds rel_tol.
FluctuationMoments mean_square_fluctuations(const SpectralContext& ctx,
                                            const QuadratureControl& quad = {});

/// K = 1 / (4 <dp_+^2>) + <dp_-^2> - 1
double k_condition(const FluctuationMoments& m);

/// S_q = <dp_+^2> / (E_D + <dp_-^2> <dp_+^2>)
double sync_from_entanglement(double ed, double var_p_minus, double var_p_plus);

/// Floquet + stability + spectral moments at one parameter point.
struct AnalyticReport {
    FloquetSolution floquet;
    StabilityReport stability;
    FluctuationMoments moments;
    double k = 0.0;
    double sq = 0.0;
    double ed = 0.0;
    double duan = 0.0;
};

/// Throws InstabilityError when the Routh-Hurwitz test fails.
AnalyticReport analyze(const SystemParams& params, const FloquetOptions& options = {},
                       const QuadratureControl& quad = {});

}  // namespace optosync
