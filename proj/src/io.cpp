#include "optosync/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "optosync/errors.hpp"

namespace optosync {

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_csv(std::ostream& out, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out << ',';
            out << cells[i];
        }
        out << '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
}

void write_simulation_csv(std::ostream& out, const SimulationResult& run) {
    out << "t,Q1,P1,Q2,P2,ReA,ImA,Sq,ED,duan,Sqm\n";
    for (std::size_t i = 0; i < run.metrics.size(); ++i) {
        const MeanState& m = run.mean.states[i];
        const MetricSample& s = run.metrics[i];
        const double cols[] = {s.t,          m.q1,         m.p1, m.q2,   m.p2,  m.a.real(),
                               m.a.imag(),   s.sq,         s.ed, s.duan, s.sqm};
        for (std::size_t c = 0; c < std::size(cols); ++c) {
            if (c) out << ',';
            out << format_number(cols[c]);
        }
        out << '\n';
    }
}

namespace {

nlohmann::json complex_json(Complex z) { return {{"re", z.real()}, {"im", z.imag()}}; }

nlohmann::json harmonics_json(const Harmonics& h) {
    return {{"0", complex_json(h[0])}, {"1", complex_json(h[1])}, {"-1", complex_json(h[2])}};
}

nlohmann::json constants_json(const EffectiveConstants& k) {
    return {{"F0", k.f0}, {"F1", complex_json(k.f1)}, {"F2", complex_json(k.f2)},
            {"delta_prime", k.delta_prime}};
}

nlohmann::json report_json(const StabilityReport& s) {
    return {{"condition1", s.condition1},
            {"condition2", s.condition2},
            {"max_real_eigenvalue", s.max_real_eigenvalue},
            {"stable", s.stable}};
}

}  // namespace

nlohmann::json floquet_json(const FloquetSolution& f, const StabilityReport& s) {
    return {{"A", harmonics_json(f.a)},
            {"Q_plus", harmonics_json(f.plus.q_plus)},
            {"P_plus", harmonics_json(f.plus.p_plus)},
            {"Q_minus", harmonics_json(f.q_minus)},
            {"P_minus", harmonics_json(f.p_minus)},
            {"constants", constants_json(f.constants)},
            {"photon_sum", f.photon_sum},
            {"condition_number", f.plus.condition_number},
            {"ill_conditioned", f.plus.ill_conditioned},
            {"solve_residual", f.plus.residual},
            {"conjugacy_defect", f.plus.conjugacy_defect},
            {"minus_null_residual", f.minus_null_residual},
            {"weak_coupling", f.weak_coupling},
            {"minus_shift_ratio", f.minus_shift_ratio},
            {"plus_shift_ratio", f.plus_shift_ratio},
            {"routh_hurwitz", report_json(s)}};
}

nlohmann::json stability_json(const EffectiveConstants& k, const StabilityReport& s) {
    nlohmann::json j = report_json(s);
    j["constants"] = constants_json(k);
    return j;
}

nlohmann::json spectrum_json(const AnalyticReport& r) {
    const FluctuationMoments& m = r.moments;
    return {{"var_q_minus", m.var_q_minus},
            {"var_p_minus", m.var_p_minus},
            {"var_p_plus", m.var_p_plus},
            {"K", r.k},
            {"quad_err_q_minus", m.err_q_minus},
            {"quad_err_p_minus", m.err_p_minus},
            {"quad_err_p_plus", m.err_p_plus},
            {"cutoff", m.cutoff},
            {"uncertainty_consistent", m.uncertainty_consistent()},
            {"Sq", r.sq},
            {"ED", r.ed},
            {"duan", r.duan},
            {"constants", constants_json(r.floquet.constants)},
            {"routh_hurwitz", report_json(r.stability)}};
}

nlohmann::json sweep_metadata_json(const SweepTable& table) {
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(table.config_hash));
    nlohmann::json axes = nlohmann::json::array();
    auto axis = [](const Axis& a) {
        return nlohmann::json{{"name", a.name}, {"min", a.min}, {"max", a.max}, {"count", a.count}};
    };
    axes.push_back(axis(table.spec.axis1));
    if (table.spec.axis2) axes.push_back(axis(*table.spec.axis2));
    nlohmann::json failures = nlohmann::json::array();
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const PointResult& r = table.rows[i].result;
        if (r.status != "ok") failures.push_back({{"row", i}, {"status", r.status}, {"message", r.message}});
    }
    const RunSettings& run = table.run;
    return {{"engine", engine_name(table.spec.engine)},
            {"axes", axes},
            {"rows", table.rows.size()},
            {"config_fnv1a", hash},
            {"horizon", run.horizon},
            {"window_periods", run.window_periods},
            {"samples_per_period", run.samples_per_period},
            {"rtol", run.control.rtol},
            {"atol", run.control.atol},
            {"quad_rel_tol", run.quad.rel_tol},
            {"quad_cutoff_factor", run.quad.cutoff_factor},
            {"failures", failures}};
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError(path + ": cannot open output file");
    out << text;
    if (!out) throw InputError(path + ": write failed");
}

}  // namespace optosync
