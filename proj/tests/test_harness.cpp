#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "optosync/config.hpp"
#include "optosync/errors.hpp"
#include "optosync/io.hpp"
#include "optosync/sweep.hpp"

using namespace optosync;

namespace {

const char* kBase = R"([oscillators]
omega_m1 = 1
omega_m2 = 1
gamma_m = 0.009

[cavity]
kappa = 0.1
detuning = -1

[drive]
drive = 250
mod_depth = 4
mod_freq = 1

[bath]
nbar = 0.5

[couplings]
g1 = 5e-5
g2 = 5e-7
g3 = 1e-6
)";

std::string message_of(const std::string& text, const std::vector<std::string>& sets = {}) {
    try {
        parse_config(text, "t.cfg", sets);
    } catch (const InputError& e) {
        return e.what();
    }
    return "";
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(OPTOSYNC_CLI) + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::filesystem::path scratch(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("optosync_test_" + name);
}

}  // namespace

TEST_CASE("config round trip") {
    const Config c = parse_config(kBase, "t.cfg");
    CHECK(c.params.kappa == 0.1);
    CHECK(c.params.gamma_m2 == 0.009);
    CHECK(c.params.nbar_m1 == 0.5);
    CHECK(c.params.couplings.g2_2 == 5e-7);
    CHECK_FALSE(c.sweep);
}

TEST_CASE("config errors carry file and line") {
    std::string text = kBase;
    text += "bogus = 3\n";
    const std::string m = message_of(text);
    CHECK(m.find("t.cfg:22") != std::string::npos);
    CHECK(m.find("bogus") != std::string::npos);

    std::string bad = kBase;
    bad.replace(bad.find("kappa = 0.1"), 11, "kappa = abc");
    CHECK(message_of(bad).find("t.cfg:7") != std::string::npos);

    CHECK(message_of(std::string(kBase) + "[nowhere]\nx = 1\n").find("nowhere") != std::string::npos);
    CHECK(message_of(kBase, {"kappa=-1"}).find("kappa") != std::string::npos);
    CHECK(message_of(kBase, {"kappa"}) != "");
    CHECK(message_of(kBase, {"cavity.nope=1"}) != "");
}

TEST_CASE("overrides accept bare and dotted keys") {
    const Config c = parse_config(kBase, "t.cfg", {"kappa=0.2", "drive.mod_depth=2", "omega_m2=1.01"});
    CHECK(c.params.kappa == 0.2);
    CHECK(c.params.mod_depth == 2);
    CHECK(c.params.omega_m2 == 1.01);
}

TEST_CASE("geometry section derives the couplings") {
    std::string text = kBase;
    text.erase(text.find("[couplings]"));
    text += "[geometry]\nlength = 0.01\nreflectivity = 0.9\nwavelength = 1e-6\n"
            "membrane_position = 1e-7\nomega_ref = 1e6\nx_zpf = 1e-15\n";
    const Config c = parse_config(text, "t.cfg");
    const CavityGeometry g{.length = 0.01, .reflectivity = 0.9, .wavelength = 1e-6, .membrane_position = 1e-7};
    const CouplingCoefficients expect = normalize(taylor_coefficients(g).couplings, 1e6, 1e-15);
    CHECK(c.params.couplings.g1_2 == doctest::Approx(expect.g1_2));
    CHECK(c.params.couplings.g3 == doctest::Approx(expect.g3));
    CHECK(message_of(text + "[couplings]\ng1 = 1\n") != "");
}

TEST_CASE("time averages") {
    std::vector<double> t, y, s;
    const double period = 2 * std::numbers::pi;
    for (int i = 0; i <= 2000; ++i) {
        t.push_back(i * 20 * period / 2000);
        y.push_back(3.5);
        s.push_back(std::sin(t.back()));
    }
    CHECK(time_average(t, y, 10 * period) == doctest::Approx(3.5).epsilon(1e-12));
    CHECK(std::abs(time_average(t, s, 10 * period)) < 1e-10);
    // window start falling between samples
    CHECK(time_average(t, y, 10.001 * period) == doctest::Approx(3.5).epsilon(1e-12));
    CHECK_THROWS_AS(time_average(t, y, 30 * period), InputError);
    const std::vector<double> few_t(t.begin(), t.begin() + 5), few_y(y.begin(), y.begin() + 5);
    CHECK_THROWS_AS(time_average(few_t, few_y, few_t.back() - few_t.front()), InputError);
}

TEST_CASE("sweep output does not depend on the thread count") {
    Config c = parse_config(slurp(std::filesystem::path(CONFIG_DIR) / "arnold.cfg"), "arnold.cfg");
    REQUIRE(c.sweep);
    const SweepTable a = run_sweep(*c.sweep, c.params, c.run, 1);
    const SweepTable b = run_sweep(*c.sweep, c.params, c.run, 4);
    CHECK(a.cells() == b.cells());
    CHECK(a.rows.size() == 9);
}

TEST_CASE("time-domain sweep point matches a recomputed tail average") {
    Config c = parse_config(kBase, "t.cfg", {"omega_m2=1.005"});
    c.run.horizon = 200;
    SweepSpec spec;
    spec.axis1 = {"drive", 250, 260, 2};
    const SweepTable table = run_sweep(spec, c.params, c.run, 1);
    REQUIRE(table.rows[0].result.status == "ok");
    const SimulationResult sim = simulate(MeanState{}, CovarianceState::vacuum(), c.params, 200,
                                          c.run.control, OutputGrid{c.run.samples_per_period});
    std::vector<double> t, sq;
    for (const MetricSample& m : sim.metrics) {
        t.push_back(m.t);
        sq.push_back(m.sq);
    }
    CHECK(table.rows[0].result.sq ==
          doctest::Approx(time_average(t, sq, 10 * reference_period(c.params))).epsilon(1e-12));
}

TEST_CASE("failed sweep points are labelled, not fatal") {
    Config c = parse_config(kBase, "t.cfg");
    SweepSpec spec;
    spec.engine = Engine::analytic;
    spec.axis1 = {"kappa", -0.1, 0.1, 2};
    const SweepTable table = run_sweep(spec, c.params, c.run, 2);
    CHECK(table.rows[0].result.status == "input");
    CHECK(std::isnan(table.rows[0].result.sq));
    CHECK(table.rows[1].result.status == "ok");
    const nlohmann::json meta = sweep_metadata_json(table);
    CHECK(meta["failures"].size() == 1);
}

TEST_CASE("command-line contracts") {
    const std::string cfg = std::string(CONFIG_DIR) + "/arnold.cfg";
    const auto out = scratch("arnold.csv");
    REQUIRE(run_cli("sweep --config " + cfg + " --threads 2 --out " + out.string()) == 0);
    const auto rows = lines(slurp(out));
    REQUIRE(rows.size() == 10);
    CHECK(rows[0] == "mod_depth,mod_freq,Sq,ED,K,duan,stable,var_q_minus,var_p_minus,var_p_plus,status");
    CHECK(std::filesystem::exists(out.string() + ".meta.json"));
    const auto meta = nlohmann::json::parse(slurp(out.string() + ".meta.json"));
    CHECK(meta["rows"] == 9);

    const auto spec = scratch("spectrum.json");
    REQUIRE(run_cli("spectrum --config " + cfg + " --out " + spec.string()) == 0);
    const auto j = nlohmann::json::parse(slurp(spec));
    CHECK(j["K"].get<double>() > 0.0);

    CHECK(run_cli("spectrum --config " + cfg + " --set kappa=-1") == 1);
    CHECK(run_cli("spectrum --config /nonexistent.cfg") == 1);
    CHECK(run_cli("frobnicate") == 1);
    CHECK(run_cli("spectrum --config " + cfg + " --set detuning=-0.5 --set drive=2000") == 2);

    std::filesystem::remove(out);
    std::filesystem::remove(out.string() + ".meta.json");
    std::filesystem::remove(spec);
}
