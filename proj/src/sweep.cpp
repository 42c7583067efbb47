#include "optosync/sweep.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "optosync/errors.hpp"
#include "optosync/io.hpp"
#include "optosync/spectrum.hpp"

namespace optosync {

double time_average(std::span<const double> t, std::span<const double> y, double window) {
    if (t.size() != y.size()) throw InputError("time_average: t and y differ in length");
    if (t.size() < 2 || !(window > 0.0)) throw InputError("time_average: need a positive window");
    const double end = t.back();
    const double start = end - window;
    if (start < t.front() - 1e-12 * std::abs(end)) {
        throw InputError("time_average: window extends before the first sample");
    }
    // first sample at or after the window start, allowing for round-off in the grid
    std::size_t i = 0;
    const double slack = 1e-9 * (t[1] - t[0]);
    while (i < t.size() && t[i] < start - slack) ++i;
    if (t.size() - i < 10) throw InputError("time_average: fewer than 10 samples in the window");

    double area = 0.0;
    double lower = t[i];
    if (i > 0 && t[i] > start + slack) {
        const double s = (start - t[i - 1]) / (t[i] - t[i - 1]);
        const double y0 = y[i - 1] + s * (y[i] - y[i - 1]);
        area += 0.5 * (y0 + y[i]) * (t[i] - start);
        lower = start;
    }
    for (std::size_t j = i; j + 1 < t.size(); ++j) area += 0.5 * (y[j] + y[j + 1]) * (t[j + 1] - t[j]);
    return area / (end - lower);
}

TailAverages tail_averages(const SimulationResult& run, double window) {
    const std::size_t n = run.metrics.size();
    std::vector<double> t(n), sq(n), ed(n), duan(n), sqm(n), qm(n), pm(n), pp(n);
    for (std::size_t i = 0; i < n; ++i) {
        const MetricSample& m = run.metrics[i];
        t[i] = m.t;
        sq[i] = m.sq;
        ed[i] = m.ed;
        duan[i] = m.duan;
        sqm[i] = m.sqm;
        qm[i] = run.covariance[i].var_q_minus();
        pm[i] = run.covariance[i].var_p_minus();
        pp[i] = run.covariance[i].var_p_plus();
    }
    TailAverages a;
    a.sq = time_average(t, sq, window);
    a.ed = time_average(t, ed, window);
    a.duan = time_average(t, duan, window);
    a.sqm = time_average(t, sqm, window);
    a.var_q_minus = time_average(t, qm, window);
    a.var_p_minus = time_average(t, pm, window);
    a.var_p_plus = time_average(t, pp, window);
    return a;
}

CovarianceState initial_covariance(const SystemParams& params, const RunSettings& run) {
    return run.thermal_start ? CovarianceState::thermal(params) : CovarianceState::vacuum();
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

PointResult failed(const char* status, const std::exception& e) {
    PointResult r;
    r.sq = r.ed = r.k = r.duan = kNaN;
    r.var_q_minus = r.var_p_minus = r.var_p_plus = kNaN;
    r.stable = false;
    r.status = status;
    r.message = e.what();
    return r;
}

template <class F>
PointResult guarded(F f) {
    try {
        return f();
    } catch (const InstabilityError& e) {
        return failed("unstable", e);
    } catch (const DivergenceError& e) {
        return failed("diverged", e);
    } catch (const SingularSystemError& e) {
        return failed("singular", e);
    } catch (const ToleranceError& e) {
        return failed("tolerance", e);
    } catch (const DomainError& e) {
        return failed("domain", e);
    } catch (const NumericalError& e) {
        return failed("numerical", e);
    } catch (const PreconditionError& e) {
        return failed("precondition", e);
    } catch (const InputError& e) {
        return failed("input", e);
    }
}

}  // namespace

PointResult evaluate_time_domain(const SystemParams& params, const RunSettings& run) {
    return guarded([&] {
        const SimulationResult sim =
            simulate(MeanState{}, initial_covariance(params, run), params, run.horizon, run.control,
                     OutputGrid{run.samples_per_period});
        const TailAverages avg = tail_averages(sim, run.window_periods * reference_period(params));
        PointResult r;
        r.sq = avg.sq;
        r.ed = avg.ed;
        r.duan = avg.duan;
        r.var_q_minus = avg.var_q_minus;
        r.var_p_minus = avg.var_p_minus;
        r.var_p_plus = avg.var_p_plus;
        r.k = 1.0 / (4.0 * avg.var_p_plus) + avg.var_p_minus - 1.0;
        r.stable = true;
        return r;
    });
}

PointResult evaluate_analytic(const SystemParams& params, const RunSettings& run) {
    return guarded([&] {
        FloquetOptions options;
        options.require_resonance = run.require_resonance;
        const AnalyticReport a = analyze(params, options, run.quad);
        PointResult r;
        r.sq = a.sq;
        r.ed = a.ed;
        r.duan = a.duan;
        r.k = a.k;
        r.stable = a.stability.stable;
        r.var_q_minus = a.moments.var_q_minus;
        r.var_p_minus = a.moments.var_p_minus;
        r.var_p_plus = a.moments.var_p_plus;
        return r;
    });
}

PointResult evaluate_point(const SystemParams& params, const RunSettings& run, Engine engine) {
    return engine == Engine::analytic ? evaluate_analytic(params, run)
                                      : evaluate_time_domain(params, run);
}

std::vector<std::string> SweepTable::header() const {
    std::vector<std::string> h = {spec.axis1.name};
    if (spec.axis2) h.push_back(spec.axis2->name);
    for (Metric m : spec.metrics) {
        switch (m) {
            case Metric::sq: h.emplace_back("Sq"); break;
            case Metric::ed: h.emplace_back("ED"); break;
            case Metric::k: h.emplace_back("K"); break;
            case Metric::duan: h.emplace_back("duan"); break;
            case Metric::stable: h.emplace_back("stable"); break;
            case Metric::moments:
                h.insert(h.end(), {"var_q_minus", "var_p_minus", "var_p_plus"});
                break;
        }
    }
    h.emplace_back("status");
    return h;
}

std::vector<std::vector<std::string>> SweepTable::cells() const {
    std::vector<std::vector<std::string>> out;
    out.reserve(rows.size());
    for (const SweepRow& row : rows) {
        const PointResult& r = row.result;
        std::vector<std::string> c = {format_number(row.x1)};
        if (spec.axis2) c.push_back(format_number(row.x2));
        for (Metric m : spec.metrics) {
            switch (m) {
                case Metric::sq: c.push_back(format_number(r.sq)); break;
                case Metric::ed: c.push_back(format_number(r.ed)); break;
                case Metric::k: c.push_back(format_number(r.k)); break;
                case Metric::duan: c.push_back(format_number(r.duan)); break;
                case Metric::stable: c.emplace_back(r.stable ? "1" : "0"); break;
                case Metric::moments:
                    c.push_back(format_number(r.var_q_minus));
                    c.push_back(format_number(r.var_p_minus));
                    c.push_back(format_number(r.var_p_plus));
                    break;
            }
        }
        c.push_back(r.status);
        out.push_back(std::move(c));
    }
    return out;
}

SweepTable run_sweep(const SweepSpec& spec, const SystemParams& base, const RunSettings& run,
                     unsigned threads) {
    spec.validate();
    run.validate();

    SweepTable table;
    table.spec = spec;
    table.run = run;
    const std::vector<double> v1 = spec.axis1.values();
    const std::vector<double> v2 = spec.axis2 ? spec.axis2->values() : std::vector<double>{0.0};
    for (double x1 : v1) {
        for (double x2 : v2) {
            SweepRow row;
            row.x1 = x1;
            row.x2 = x2;
            row.params = base;
            set_parameter(row.params, spec.axis1.name, x1);
            if (spec.axis2) set_parameter(row.params, spec.axis2->name, x2);
            table.rows.push_back(row);
        }
    }

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < table.rows.size(); i = next++) {
            SweepRow& row = table.rows[i];
            try {
                row.params.validate();
                row.result = evaluate_point(row.params, run, spec.engine);
            } catch (const InputError& e) {
                row.result = failed("input", e);
            }
        }
    };
    const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(table.rows.size())));
    {
        std::vector<std::jthread> pool;
        for (unsigned i = 1; i < n; ++i) pool.emplace_back(worker);
        worker();
    }
    return table;
}

std::uint64_t config_fingerprint(std::string_view text) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace optosync
