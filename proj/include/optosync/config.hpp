#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "optosync/floquet.hpp"
#include "optosync/ode.hpp"
#include "optosync/params.hpp"
#include "optosync/spectrum.hpp"

namespace optosync {

enum class Engine { time_domain, analytic };

/// Run-level knobs shared by the single-run subcommands and the sweep engines.
struct RunSettings {
    double horizon = 500.0;
    double window_periods = 10.0;  // trailing averaging window, in reference periods
    int samples_per_period = 128;
    bool thermal_start = false;    // C(0) thermal instead of 1/2 identity
    bool require_resonance = true;
    StepControl control;
    QuadratureControl quad;

    void validate() const;
};

struct Axis {
    std::string name;
    double min = 0.0;
    double max = 0.0;
    int count = 0;

    /// count points from min to max inclusive.
    std::vector<double> values() const;
};

/// Metric columns a sweep can report.
enum class Metric { sq, ed, k, duan, stable, moments };

struct SweepSpec {
    Axis axis1;
    std::optional<Axis> axis2;
    std::vector<Metric> metrics = {Metric::sq, Metric::ed, Metric::k,
                                   Metric::duan, Metric::stable, Metric::moments};
    Engine engine = Engine::time_domain;

    void validate() const;
    std::size_t size() const;
};

struct Config {
    SystemParams params;
    RunSettings run;
    std::optional<SweepSpec> sweep;
    std::string origin;  // file name or "<text>"
    std::string text;    // raw config text, hashed into sweep metadata
};

/// Parses a sectioned key = value config. `overrides` are "key=value" or
/// "section.key=value" strings applied after the file. Throws InputError with
/// "origin:line:" anchors for malformed lines, unknown keys and bad values,
/// and with the violated invariant for invalid parameters.
Config parse_config(std::string_view text, std::string_view origin,
                    const std::vector<std::string>& overrides = {});
Config load_config(const std::string& path, const std::vector<std::string>& overrides = {});

/// Parameter names usable as sweep axes: SystemParams fields plus nbar (both
/// baths), g1, g2 (both oscillators), g3 and delta_m (omega_m2 - omega_m1).
void set_parameter(SystemParams& params, std::string_view name, double value);
double get_parameter(const SystemParams& params, std::string_view name);
bool is_parameter(std::string_view name);

std::string_view engine_name(Engine e);
std::string_view metric_name(Metric m);

}  // namespace optosync
