// Command-line front end: simulate, floquet, spectrum, sweep, stability.
// Exit status 0 on success, 1 on input errors, 2 on numerical failures.

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "optosync/config.hpp"
#include "optosync/covariance.hpp"
#include "optosync/errors.hpp"
#include "optosync/floquet.hpp"
#include "optosync/io.hpp"
#include "optosync/meanfield.hpp"
#include "optosync/spectrum.hpp"
#include "optosync/sweep.hpp"

using namespace optosync;

namespace {

struct Common {
    std::string config;
    std::string out;
    std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config, "config file")->required();
    cmd->add_option("--out", c.out, "output path (default stdout)");
    cmd->add_option("--set", c.sets, "override, key=value or section.key=value");
}

FloquetOptions floquet_options(const Config& cfg) {
    FloquetOptions o;
    o.require_resonance = cfg.run.require_resonance;
    return o;
}

int run_simulate(const Common& c, const std::string& summary) {
    const Config cfg = load_config(c.config, c.sets);
    const SystemParams& p = cfg.params;
    const SimulationResult run = simulate(MeanState{}, initial_covariance(p, cfg.run), p, cfg.run.horizon,
                                          cfg.run.control, OutputGrid{cfg.run.samples_per_period});
    std::ostringstream csv;
    write_simulation_csv(csv, run);
    write_text(c.out, csv.str());

    if (!summary.empty()) {
        const double window = cfg.run.window_periods * reference_period(p);
        const TailAverages avg = tail_averages(run, window);
        const LimitCycleReport lc = limit_cycle_metrics(run.mean, window);
        const StepAudit& a = run.audit;
        const nlohmann::json j = {
            {"tail_window", window},
            {"Sq", avg.sq},
            {"ED", avg.ed},
            {"duan", avg.duan},
            {"Sqm", avg.sqm},
            {"var_q_minus", avg.var_q_minus},
            {"var_p_minus", avg.var_p_minus},
            {"var_p_plus", avg.var_p_plus},
            {"rms_q_minus", lc.rms_q_minus},
            {"rms_q_plus", lc.rms_q_plus},
            {"dominant_period", lc.dominant_period},
            {"relative_recurrence_error", lc.relative_recurrence_error},
            {"steps", a.steps},
            {"max_sq", a.max_sq},
            {"sq_bound_violations", a.sq_bound_violations},
            {"max_asymmetry", a.max_asymmetry},
            {"max_sqlimit_residual", a.max_sqlimit_residual},
            {"duan_implication_failures", a.duan_implication_failures}};
        write_text(summary, j.dump(2) + "\n");
    }
    return 0;
}

int run_floquet(const Common& c) {
    const Config cfg = load_config(c.config, c.sets);
    const FloquetSolution f = solve_floquet(cfg.params, floquet_options(cfg));
    const StabilityReport s = stability_check(f.constants, cfg.params);
    write_text(c.out, floquet_json(f, s).dump(2) + "\n");
    return 0;
}

int run_stability(const Common& c) {
    const Config cfg = load_config(c.config, c.sets);
    const FloquetSolution f = solve_floquet(cfg.params, floquet_options(cfg));
    const StabilityReport s = stability_check(f.constants, cfg.params);
    write_text(c.out, stability_json(f.constants, s).dump(2) + "\n");
    return 0;
}

int run_spectrum(const Common& c) {
    const Config cfg = load_config(c.config, c.sets);
    const AnalyticReport r = analyze(cfg.params, floquet_options(cfg), cfg.run.quad);
    write_text(c.out, spectrum_json(r).dump(2) + "\n");
    return 0;
}

int run_sweep_cmd(const Common& c, unsigned threads, std::string meta) {
    const Config cfg = load_config(c.config, c.sets);
    if (!cfg.sweep) throw InputError(c.config + ": no [sweep] section");
    SweepTable table = run_sweep(*cfg.sweep, cfg.params, cfg.run, threads);
    table.config_hash = config_fingerprint(cfg.text);
    std::ostringstream csv;
    write_csv(csv, table.header(), table.cells());
    write_text(c.out, csv.str());
    if (meta.empty() && !c.out.empty() && c.out != "-") meta = c.out + ".meta.json";
    if (!meta.empty()) write_text(meta, sweep_metadata_json(table).dump(2) + "\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Synchronization and entanglement of two cavity-coupled mechanical oscillators"};
    app.require_subcommand(1);

    Common common;
    std::string summary;
    std::string meta;
    unsigned threads = 1;

    auto* simulate_cmd = app.add_subcommand("simulate", "mean-field + covariance time series (CSV)");
    add_common(simulate_cmd, common);
    simulate_cmd->add_option("--summary", summary, "tail-window averages and step audit (JSON)");

    auto* floquet_cmd = app.add_subcommand("floquet", "first-harmonic steady state (JSON)");
    add_common(floquet_cmd, common);

    auto* spectrum_cmd = app.add_subcommand("spectrum", "spectral fluctuation moments and K (JSON)");
    add_common(spectrum_cmd, common);

    auto* sweep_cmd = app.add_subcommand("sweep", "parameter grid (CSV)");
    add_common(sweep_cmd, common);
    sweep_cmd->add_option("--threads", threads, "worker threads")->check(CLI::Range(1u, 1024u));
    sweep_cmd->add_option("--meta", meta, "metadata JSON (default <out>.meta.json)");

    auto* stability_cmd = app.add_subcommand("stability", "Routh-Hurwitz report (JSON)");
    add_common(stability_cmd, common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (*simulate_cmd) return run_simulate(common, summary);
        if (*floquet_cmd) return run_floquet(common);
        if (*spectrum_cmd) return run_spectrum(common);
        if (*sweep_cmd) return run_sweep_cmd(common, threads, meta);
        if (*stability_cmd) return run_stability(common);
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
