#include "optosync/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "optosync/errors.hpp"

namespace optosync {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

double parse_double(const std::string& s) {
    double v = 0.0;
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
        throw InputError("'" + s + "' is not a finite number");
    }
    return v;
}

int parse_int(const std::string& s) {
    int v = 0;
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end) throw InputError("'" + s + "' is not an integer");
    return v;
}

bool parse_bool(const std::string& s) {
    if (s == "true" || s == "yes" || s == "1") return true;
    if (s == "false" || s == "no" || s == "0") return false;
    throw InputError("'" + s + "' is not a boolean (true/false)");
}

Engine parse_engine(const std::string& s) {
    if (s == "time_domain") return Engine::time_domain;
    if (s == "analytic") return Engine::analytic;
    throw InputError("engine must be time_domain or analytic, got '" + s + "'");
}

std::vector<Metric> parse_metrics(const std::string& s) {
    static const std::map<std::string, Metric, std::less<>> names = {
        {"sq", Metric::sq},     {"ed", Metric::ed},         {"k", Metric::k},
        {"duan", Metric::duan}, {"stable", Metric::stable}, {"moments", Metric::moments}};
    std::vector<Metric> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        auto it = names.find(item);
        if (it == names.end()) throw InputError("unknown metric '" + item + "'");
        if (std::find(out.begin(), out.end(), it->second) == out.end()) out.push_back(it->second);
    }
    if (out.empty()) throw InputError("metric list is empty");
    std::sort(out.begin(), out.end());
    return out;
}

struct Geometry {
    CavityGeometry cavity;
    double omega_ref = 0.0;
    double x_zpf = 0.0;
    std::vector<std::string> seen;
};

struct Builder {
    Config cfg;
    Geometry geo;
    bool couplings_seen = false;
    SweepSpec sweep;
    Axis axis2;
    bool sweep_seen = false;
    bool axis2_seen = false;
};

using Setter = std::function<void(Builder&, const std::string&)>;

struct KeySpec {
    const char* section;
    const char* key;
    Setter set;
};

Setter param(const char* name) {
    return [name](Builder& b, const std::string& v) { set_parameter(b.cfg.params, name, parse_double(v)); };
}

Setter coupling(const char* name) {
    return [name](Builder& b, const std::string& v) {
        b.couplings_seen = true;
        set_parameter(b.cfg.params, name, parse_double(v));
    };
}

Setter geometry(double CavityGeometry::*field, const char* key) {
    return [field, key](Builder& b, const std::string& v) {
        b.geo.cavity.*field = parse_double(v);
        b.geo.seen.emplace_back(key);
    };
}

Setter geometry_scale(double Geometry::*field, const char* key) {
    return [field, key](Builder& b, const std::string& v) {
        b.geo.*field = parse_double(v);
        b.geo.seen.emplace_back(key);
    };
}

const std::vector<KeySpec>& key_table() {
    static const std::vector<KeySpec> table = {
        {"oscillators", "omega_m1", param("omega_m1")},
        {"oscillators", "omega_m2", param("omega_m2")},
        {"oscillators", "gamma_m1", param("gamma_m1")},
        {"oscillators", "gamma_m2", param("gamma_m2")},
        {"oscillators", "gamma_m", param("gamma_m")},
        {"cavity", "kappa", param("kappa")},
        {"cavity", "detuning", param("detuning")},
        {"drive", "drive", param("drive")},
        {"drive", "mod_depth", param("mod_depth")},
        {"drive", "mod_freq", param("mod_freq")},
        {"bath", "nbar", param("nbar")},
        {"bath", "nbar_m1", param("nbar_m1")},
        {"bath", "nbar_m2", param("nbar_m2")},
        {"couplings", "g1", coupling("g1")},
        {"couplings", "g2", coupling("g2")},
        {"couplings", "g3", coupling("g3")},
        {"couplings", "g1_1", coupling("g1_1")},
        {"couplings", "g1_2", coupling("g1_2")},
        {"couplings", "g2_1", coupling("g2_1")},
        {"couplings", "g2_2", coupling("g2_2")},
        {"geometry", "length", geometry(&CavityGeometry::length, "length")},
        {"geometry", "reflectivity", geometry(&CavityGeometry::reflectivity, "reflectivity")},
        {"geometry", "wavelength", geometry(&CavityGeometry::wavelength, "wavelength")},
        {"geometry", "membrane_position",
         geometry(&CavityGeometry::membrane_position, "membrane_position")},
        {"geometry", "light_speed", geometry(&CavityGeometry::light_speed, "light_speed")},
        {"geometry", "omega_ref", geometry_scale(&Geometry::omega_ref, "omega_ref")},
        {"geometry", "x_zpf", geometry_scale(&Geometry::x_zpf, "x_zpf")},
        {"run", "horizon", [](Builder& b, const std::string& v) { b.cfg.run.horizon = parse_double(v); }},
        {"run", "window_periods",
         [](Builder& b, const std::string& v) { b.cfg.run.window_periods = parse_double(v); }},
        {"run", "samples_per_period",
         [](Builder& b, const std::string& v) { b.cfg.run.samples_per_period = parse_int(v); }},
        {"run", "rtol", [](Builder& b, const std::string& v) { b.cfg.run.control.rtol = parse_double(v); }},
        {"run", "atol", [](Builder& b, const std::string& v) { b.cfg.run.control.atol = parse_double(v); }},
        {"run", "max_step",
         [](Builder& b, const std::string& v) { b.cfg.run.control.max_step = parse_double(v); }},
        {"run", "divergence_bound",
         [](Builder& b, const std::string& v) { b.cfg.run.control.divergence_bound = parse_double(v); }},
        {"run", "initial_covariance",
         [](Builder& b, const std::string& v) {
             if (v != "vacuum" && v != "thermal") {
                 throw InputError("initial_covariance must be vacuum or thermal, got '" + v + "'");
             }
             b.cfg.run.thermal_start = v == "thermal";
         }},
        {"run", "require_resonance",
         [](Builder& b, const std::string& v) { b.cfg.run.require_resonance = parse_bool(v); }},
        {"quadrature", "rel_tol",
         [](Builder& b, const std::string& v) { b.cfg.run.quad.rel_tol = parse_double(v); }},
        {"quadrature", "cutoff_factor",
         [](Builder& b, const std::string& v) { b.cfg.run.quad.cutoff_factor = parse_double(v); }},
        {"sweep", "engine",
         [](Builder& b, const std::string& v) { b.sweep_seen = true; b.sweep.engine = parse_engine(v); }},
        {"sweep", "metrics",
         [](Builder& b, const std::string& v) { b.sweep_seen = true; b.sweep.metrics = parse_metrics(v); }},
        {"sweep", "axis1", [](Builder& b, const std::string& v) { b.sweep_seen = true; b.sweep.axis1.name = v; }},
        {"sweep", "axis1_min",
         [](Builder& b, const std::string& v) { b.sweep_seen = true; b.sweep.axis1.min = parse_double(v); }},
        {"sweep", "axis1_max",
         [](Builder& b, const std::string& v) { b.sweep_seen = true; b.sweep.axis1.max = parse_double(v); }},
        {"sweep", "axis1_count",
         [](Builder& b, const std::string& v) { b.sweep_seen = true; b.sweep.axis1.count = parse_int(v); }},
        {"sweep", "axis2", [](Builder& b, const std::string& v) { b.axis2_seen = true; b.axis2.name = v; }},
        {"sweep", "axis2_min",
         [](Builder& b, const std::string& v) { b.axis2_seen = true; b.axis2.min = parse_double(v); }},
        {"sweep", "axis2_max",
         [](Builder& b, const std::string& v) { b.axis2_seen = true; b.axis2.max = parse_double(v); }},
        {"sweep", "axis2_count",
         [](Builder& b, const std::string& v) { b.axis2_seen = true; b.axis2.count = parse_int(v); }},
    };
    return table;
}

const KeySpec* find_key(std::string_view section, std::string_view key) {
    for (const auto& k : key_table()) {
        if (section == k.section && key == k.key) return &k;
    }
    return nullptr;
}

const KeySpec* find_bare_key(std::string_view key) {
    for (const auto& k : key_table()) {
        if (key == k.key) return &k;
    }
    return nullptr;
}

// (section, key) -> 1-based line, for anchoring messages about parsed values
std::map<std::pair<std::string, std::string>, int> line_index(std::string_view text) {
    std::map<std::pair<std::string, std::string>, int> index;
    std::string section;
    std::istringstream in{std::string(text)};
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const std::string s = trim(raw);
        if (s.empty() || s[0] == ';' || s[0] == '#') continue;
        if (s.front() == '[' && s.back() == ']') {
            section = trim(std::string_view(s).substr(1, s.size() - 2));
            continue;
        }
        const auto eq = s.find('=');
        if (eq != std::string::npos) index.emplace(std::make_pair(section, trim(s.substr(0, eq))), line);
    }
    return index;
}

void apply(Builder& b, const KeySpec& spec, const std::string& value, const std::string& where) {
    try {
        spec.set(b, value);
    } catch (const InputError& e) {
        throw InputError(where + ": " + spec.section + "." + spec.key + ": " + e.what());
    }
}

void finish_geometry(Builder& b) {
    if (b.geo.seen.empty()) return;
    if (b.couplings_seen) {
        throw InputError(b.cfg.origin + ": [geometry] and [couplings] are alternatives; give only one");
    }
    for (const char* need : {"length", "reflectivity", "wavelength", "membrane_position", "omega_ref", "x_zpf"}) {
        if (std::find(b.geo.seen.begin(), b.geo.seen.end(), need) == b.geo.seen.end()) {
            throw InputError(b.cfg.origin + ": [geometry] is missing '" + need + "'");
        }
    }
    if (!(b.geo.omega_ref > 0.0) || !(b.geo.x_zpf > 0.0)) {
        throw InputError(b.cfg.origin + ": geometry omega_ref and x_zpf must be > 0");
    }
    try {
        b.geo.cavity.validate();
        const CavityExpansion exp = taylor_coefficients(b.geo.cavity);
        b.cfg.params.couplings = normalize(exp.couplings, b.geo.omega_ref, b.geo.x_zpf);
    } catch (const std::runtime_error& e) {
        throw InputError(b.cfg.origin + ": [geometry]: " + e.what());
    }
}

}  // namespace

void RunSettings::validate() const {
    if (!(horizon > 0.0)) throw InputError("horizon must be > 0");
    if (!(window_periods > 0.0)) throw InputError("window_periods must be > 0");
    if (samples_per_period < 8) throw InputError("samples_per_period must be >= 8");
    if (!(quad.rel_tol > 0.0)) throw InputError("quadrature rel_tol must be > 0");
    if (!(quad.cutoff_factor > 1.0)) throw InputError("quadrature cutoff_factor must be > 1");
    control.validate();
}

std::vector<double> Axis::values() const {
    std::vector<double> v(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        v[static_cast<std::size_t>(i)] =
            i == count - 1 ? max : min + (max - min) * static_cast<double>(i) / (count - 1);
    }
    return v;
}

void SweepSpec::validate() const {
    auto check = [](const Axis& a, const char* which) {
        if (!is_parameter(a.name)) {
            throw InputError(std::string(which) + ": unknown parameter '" + a.name + "'");
        }
        if (a.count < 2) throw InputError(std::string(which) + ": count must be >= 2");
        if (!(a.max > a.min)) throw InputError(std::string(which) + ": max must exceed min");
    };
    check(axis1, "axis1");
    if (axis2) {
        check(*axis2, "axis2");
        if (axis2->name == axis1.name) throw InputError("axis1 and axis2 name the same parameter");
    }
    if (metrics.empty()) throw InputError("sweep needs at least one metric");
}

std::size_t SweepSpec::size() const {
    return static_cast<std::size_t>(axis1.count) * (axis2 ? static_cast<std::size_t>(axis2->count) : 1);
}

Config parse_config(std::string_view text, std::string_view origin,
                    const std::vector<std::string>& overrides) {
    Builder b;
    b.cfg.origin = std::string(origin);
    b.cfg.text = std::string(text);

    boost::property_tree::ptree tree;
    try {
        std::istringstream in{std::string(text)};
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        std::ostringstream os;
        os << origin << ":" << e.line() << ": " << e.message();
        throw InputError(os.str());
    }

    const auto lines = line_index(text);
    auto where = [&](const std::string& section, const std::string& key) {
        auto it = lines.find({section, key});
        std::ostringstream os;
        os << origin;
        if (it != lines.end()) os << ":" << it->second;
        return os.str();
    };

    for (const auto& [section, body] : tree) {
        if (lines.contains({"", section})) {
            throw InputError(where("", section) + ": key '" + section + "' is outside any [section]");
        }
        const bool known = std::any_of(key_table().begin(), key_table().end(),
                                       [&](const KeySpec& k) { return section == k.section; });
        if (!known) throw InputError(std::string(origin) + ": unknown section [" + section + "]");
        for (const auto& [key, node] : body) {
            const KeySpec* spec = find_key(section, key);
            if (!spec) {
                throw InputError(where(section, key) + ": unknown key '" + key + "' in [" + section + "]");
            }
            apply(b, *spec, trim(node.data()), where(section, key));
        }
    }

    for (const std::string& item : overrides) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw InputError("--set " + item + ": expected key=value");
        const std::string key = trim(std::string_view(item).substr(0, eq));
        const std::string value = trim(std::string_view(item).substr(eq + 1));
        const auto dot = key.find('.');
        const KeySpec* spec = dot == std::string::npos
                                  ? find_bare_key(key)
                                  : find_key(key.substr(0, dot), key.substr(dot + 1));
        if (!spec) throw InputError("--set " + item + ": unknown key '" + key + "'");
        apply(b, *spec, value, "--set " + item);
    }

    finish_geometry(b);
    try {
        b.cfg.params.validate();
        b.cfg.run.validate();
        if (b.axis2_seen) {
            b.sweep_seen = true;
            b.sweep.axis2 = b.axis2;
        }
        if (b.sweep_seen) {
            b.sweep.validate();
            b.cfg.sweep = b.sweep;
        }
    } catch (const InputError& e) {
        throw InputError(b.cfg.origin + ": " + e.what());
    }
    return b.cfg;
}

Config load_config(const std::string& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError(path + ": cannot open config file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path, overrides);
}

void set_parameter(SystemParams& p, std::string_view name, double v) {
    auto& g = p.couplings;
    if (name == "omega_m1") p.omega_m1 = v;
    else if (name == "omega_m2") p.omega_m2 = v;
    else if (name == "delta_m") p.omega_m2 = p.omega_m1 + v;
    else if (name == "detuning") p.detuning = v;
    else if (name == "gamma_m1") p.gamma_m1 = v;
    else if (name == "gamma_m2") p.gamma_m2 = v;
    else if (name == "gamma_m") p.gamma_m1 = p.gamma_m2 = v;
    else if (name == "kappa") p.kappa = v;
    else if (name == "drive") p.drive = v;
    else if (name == "mod_depth") p.mod_depth = v;
    else if (name == "mod_freq") p.mod_freq = v;
    else if (name == "nbar") p.set_nbar(v);
    else if (name == "nbar_m1") p.nbar_m1 = v;
    else if (name == "nbar_m2") p.nbar_m2 = v;
    else if (name == "g1") g.g1_1 = g.g1_2 = v;
    else if (name == "g2") g.g2_1 = g.g2_2 = v;
    else if (name == "g3") g.g3 = v;
    else if (name == "g1_1") g.g1_1 = v;
    else if (name == "g1_2") g.g1_2 = v;
    else if (name == "g2_1") g.g2_1 = v;
    else if (name == "g2_2") g.g2_2 = v;
    else throw InputError("unknown parameter '" + std::string(name) + "'");
}

double get_parameter(const SystemParams& p, std::string_view name) {
    const auto& g = p.couplings;
    if (name == "omega_m1") return p.omega_m1;
    if (name == "omega_m2") return p.omega_m2;
    if (name == "delta_m") return p.omega_m2 - p.omega_m1;
    if (name == "detuning") return p.detuning;
    if (name == "gamma_m1" || name == "gamma_m") return p.gamma_m1;
    if (name == "gamma_m2") return p.gamma_m2;
    if (name == "kappa") return p.kappa;
    if (name == "drive") return p.drive;
    if (name == "mod_depth") return p.mod_depth;
    if (name == "mod_freq") return p.mod_freq;
    if (name == "nbar" || name == "nbar_m1") return p.nbar_m1;
    if (name == "nbar_m2") return p.nbar_m2;
    if (name == "g1" || name == "g1_1") return g.g1_1;
    if (name == "g2" || name == "g2_1") return g.g2_1;
    if (name == "g1_2") return g.g1_2;
    if (name == "g2_2") return g.g2_2;
    if (name == "g3") return g.g3;
    throw InputError("unknown parameter '" + std::string(name) + "'");
}

bool is_parameter(std::string_view name) {
    static const char* names[] = {"omega_m1", "omega_m2", "delta_m", "detuning", "gamma_m1",
                                  "gamma_m2", "gamma_m",  "kappa",   "drive",    "mod_depth",
                                  "mod_freq", "nbar",     "nbar_m1", "nbar_m2",  "g1",
                                  "g2",       "g3",       "g1_1",    "g1_2",     "g2_1",
                                  "g2_2"};
    return std::any_of(std::begin(names), std::end(names), [&](const char* n) { return name == n; });
}

std::string_view engine_name(Engine e) {
    return e == Engine::analytic ? "analytic" : "time_domain";
}

std::string_view metric_name(Metric m) {
    switch (m) {
        case Metric::sq: return "sq";
        case Metric::ed: return "ed";
        case Metric::k: return "k";
        case Metric::duan: return "duan";
        case Metric::stable: return "stable";
        case Metric::moments: return "moments";
    }
    return "?";
}

}  // namespace optosync
