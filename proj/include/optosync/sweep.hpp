#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "optosync/config.hpp"
#include "optosync/covariance.hpp"
#include "optosync/params.hpp"

namespace optosync {

/// Trapezoidal mean of y(t) over the trailing `window` of a sampled series.
/// A window start between samples is handled by linear interpolation.
/// Throws InputError when the window exceeds the series span or holds fewer
/// than 10 samples.
double time_average(std::span<const double> t, std::span<const double> y, double window);

/// Trailing-window averages of a co-integrated run.
struct TailAverages {
    double sq = 0.0;
    double ed = 0.0;
    double duan = 0.0;
    double sqm = 0.0;
    double var_q_minus = 0.0;
    double var_p_minus = 0.0;
    double var_p_plus = 0.0;
};
TailAverages tail_averages(const SimulationResult& run, double window);

/// Initial covariance selected by the run settings.
CovarianceState initial_covariance(const SystemParams& params, const RunSettings& run);

/// Metrics of one grid point. `status` is "ok" or a short failure class
/// (unstable, diverged, precondition, singular, tolerance, domain, input,
/// numerical); failed points keep NaN metrics and carry the message.
struct PointResult {
    double sq = 0.0;
    double ed = 0.0;
    double k = 0.0;
    double duan = 0.0;
    bool stable = false;
    double var_q_minus = 0.0;
    double var_p_minus = 0.0;
    double var_p_plus = 0.0;
    std::string status = "ok";
    std::string message;
};

/// Means + covariance to the horizon, metrics averaged over the trailing
/// window_periods reference periods. K uses the averaged variances.
PointResult evaluate_time_domain(const SystemParams& params, const RunSettings& run);
/// Floquet + stability + spectral moments.
PointResult evaluate_analytic(const SystemParams& params, const RunSettings& run);
PointResult evaluate_point(const SystemParams& params, const RunSettings& run, Engine engine);

struct SweepRow {
    double x1 = 0.0;
    double x2 = 0.0;
    SystemParams params;
    PointResult result;
};

struct SweepTable {
    SweepSpec spec;
    RunSettings run;
    std::uint64_t config_hash = 0;
    std::vector<SweepRow> rows;  // axis1 slowest, axis2 fastest

    std::vector<std::string> header() const;
    std::vector<std::vector<std::string>> cells() const;
};

/// Evaluates every grid point on `threads` workers. Row order and content do
/// not depend on the worker count.
SweepTable run_sweep(const SweepSpec& spec, const SystemParams& base, const RunSettings& run,
                     unsigned threads = 1);

/// FNV-1a of the config text, recorded in sweep metadata.
std::uint64_t config_fingerprint(std::string_view text);

}  // namespace optosync
