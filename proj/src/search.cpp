#include "delaycert/search.hpp"

#include "delaycert/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <ostream>
#include <thread>

namespace delaycert {

std::string_view to_string(SearchMode mode)
{
    return mode == SearchMode::MaxDelay ? "max-delay" : "max-rate";
}

SearchSpec default_search_spec(SearchMode mode, const NetworkModel& model)
{
    SearchSpec spec;
    spec.mode = mode;
    if (mode == SearchMode::MaxRate) {
        spec.lo = 1e-6;
        spec.hi = 0.999 * model.min_self_feedback();
    }
    return spec;
}

FeasibilityReport probe_point(const NetworkModel& model, const AnalysisParams& params, const SolverSettings& solver,
                              const AssemblyOptions& assembly)
{
    const LmiSystem system = build_theorem_lmis(model, params, assembly);
    return decide(system, solver);
}

namespace {

using Evaluate = std::function<FeasibilityReport(double)>;

Probe make_probe(double x, const FeasibilityReport& r, bool retry)
{
    return Probe{x, r.status, r.margin, retry};
}

std::string fmt(const char* pattern, double v)
{
    char buf[128];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

// `ceiling` is an exclusive upper limit on the parameter (min c_i for rates).
SearchResult bisect(const Evaluate& eval, const SearchSpec& spec, double ceiling)
{
    if (!(spec.lo > 0.0) || !(spec.lo < spec.hi) || !(spec.tolerance > 0.0) || !(spec.hi < ceiling) ||
        spec.max_iters < 1)
        throw Error(ErrorCode::BracketInvalid, "bracket [" + std::to_string(spec.lo) + ", " +
                                                   std::to_string(spec.hi) + "] is not usable");

    SearchResult res;
    res.mode = spec.mode;
    double lo = spec.lo;
    double hi = spec.hi;

    auto at_lo = eval(lo);
    res.probes.push_back(make_probe(lo, at_lo, false));
    if (at_lo.status != FeasibilityStatus::Feasible)
        throw Error(ErrorCode::InfeasibleAtLo,
                    fmt("no certificate at the lower end %.6g", lo) + " (" + std::string(to_string(at_lo.status)) + ")");

    for (int widen = 0;; ++widen) {
        auto at_hi = eval(hi);
        res.probes.push_back(make_probe(hi, at_hi, false));
        if (at_hi.status == FeasibilityStatus::NumericalFailure) ++res.indeterminate;
        if (at_hi.status != FeasibilityStatus::Feasible) break;
        lo = hi;
        const double next = std::isfinite(ceiling) ? hi : 2.0 * hi;
        if (widen >= spec.max_widenings || next <= hi) {
            res.warnings.push_back(fmt("upper end %.6g is still feasible; bound is not bracketed", hi));
            res.optimum = lo;
            res.lo = lo;
            res.hi = hi;
            return res;
        }
        res.warnings.push_back(fmt("upper end %.6g feasible, widening", hi));
        hi = next;
    }

    while (hi - lo > spec.tolerance && res.iterations < spec.max_iters) {
        ++res.iterations;
        double x = 0.5 * (lo + hi);
        auto r = eval(x);
        res.probes.push_back(make_probe(x, r, false));
        if (r.status == FeasibilityStatus::NumericalFailure) {
            x = lo + 0.5 * (x - lo);
            r = eval(x);
            res.probes.push_back(make_probe(x, r, true));
            if (r.status == FeasibilityStatus::NumericalFailure) {
                ++res.indeterminate;
                hi = x;
                continue;
            }
        }
        if (r.status == FeasibilityStatus::Feasible)
            lo = x;
        else
            hi = x;
    }
    if (hi - lo > spec.tolerance) res.warnings.push_back("iteration limit reached before the tolerance");
    res.optimum = lo;
    res.lo = lo;
    res.hi = hi;
    res.low_confidence = res.indeterminate > 3;

    if (spec.post_scan) {
        double upper = lo + 0.5;
        if (std::isfinite(ceiling)) upper = std::min(upper, std::max(spec.hi, 0.999 * ceiling));
        for (int i = 1; i <= 10 && upper > lo; ++i) {
            const double x = lo + (upper - lo) * i / 10.0;
            auto r = eval(x);
            res.post_scan.push_back(make_probe(x, r, false));
            if (r.status == FeasibilityStatus::Feasible) res.post_scan_clean = false;
        }
        if (!res.post_scan_clean) res.warnings.push_back("feasible point found above the reported bound");
    }
    return res;
}

} // namespace

SearchResult max_delay(const NetworkModel& model, double mu, double k, const SearchSpec& spec)
{
    model.validate();
    AnalysisParams base{1.0, mu, k};
    base.validate(model);
    auto eval = [&](double h) {
        AnalysisParams p{h, mu, k};
        return probe_point(model, p, spec.solver, spec.assembly);
    };
    return bisect(eval, spec, std::numeric_limits<double>::infinity());
}

SearchResult max_rate(const NetworkModel& model, double h, double mu, const SearchSpec& spec)
{
    model.validate();
    AnalysisParams base{h, mu, 0.5 * model.min_self_feedback()};
    base.validate(model);
    auto eval = [&](double k) {
        AnalysisParams p{h, mu, k};
        return probe_point(model, p, spec.solver, spec.assembly);
    };
    return bisect(eval, spec, model.min_self_feedback());
}

TableSetup table_setup(int example_id)
{
    // reference bounds, four decimals
    switch (example_id) {
    case 1: return {1, SearchMode::MaxRate, 1.0, {{0.0, 1.2477}, {0.8, 1.0299}, {0.9, 1.0115}}};
    case 2: return {2, SearchMode::MaxDelay, 1e-6, {{0.5, 4.2050}, {0.8, 3.6674}, {0.9, 3.5170}}};
    case 3: return {3, SearchMode::MaxDelay, 1e-6, {{0.77, 7.0739}, {0.80, 3.5641}, {0.90, 2.2092}}};
    default: throw Error(ErrorCode::ConfigError, "unknown table " + std::to_string(example_id));
    }
}

std::vector<TableRow> reproduce_table(int example_id, const ReproduceOptions& options)
{
    const TableSetup setup = table_setup(example_id);
    const NetworkModel model = example_model(setup.example);
    std::vector<TableRow> rows(setup.cells.size());

    auto run_cell = [&](std::size_t i) {
        const auto& cell = setup.cells[i];
        TableRow& row = rows[i];
        row.example = setup.example;
        row.mu = cell.mu;
        row.fixed = setup.fixed;
        row.reference = cell.value;
        try {
            SearchSpec spec = default_search_spec(setup.mode, model);
            spec.tolerance = options.overrides.tolerance;
            spec.max_iters = options.overrides.max_iters;
            spec.post_scan = options.overrides.post_scan;
            spec.solver = options.overrides.solver;
            spec.assembly = options.overrides.assembly;
            row.search = setup.mode == SearchMode::MaxDelay ? max_delay(model, cell.mu, setup.fixed, spec)
                                                            : max_rate(model, setup.fixed, cell.mu, spec);
            row.bound = row.search->optimum;
            row.deviation = (row.bound - row.reference) / row.reference;
            row.iterations = row.search->iterations;
            row.confidence = row.search->low_confidence || !row.search->post_scan_clean ? "low" : "high";
            if (options.check_fractions) {
                auto params_at = [&](double v) {
                    return setup.mode == SearchMode::MaxDelay ? AnalysisParams{v, cell.mu, setup.fixed}
                                                              : AnalysisParams{setup.fixed, cell.mu, v};
                };
                row.at_lower = probe_point(model, params_at(0.97 * cell.value), spec.solver, spec.assembly);
                row.at_upper = probe_point(model, params_at(1.05 * cell.value), spec.solver, spec.assembly);
            }
        } catch (const std::exception& e) {
            row.confidence = "error";
            row.error = e.what();
        }
    };

    const auto jobs = static_cast<std::size_t>(std::max(1, options.jobs));
    if (jobs == 1) {
        for (std::size_t i = 0; i < rows.size(); ++i) run_cell(i);
        return rows;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(jobs, rows.size()); ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < rows.size(); i = next++) run_cell(i);
        });
    for (auto& th : pool) th.join();
    return rows;
}

void write_table_csv(std::ostream& out, const std::vector<TableRow>& rows)
{
    out << "example,mu,k_or_h_fixed,bound,paper_value,deviation,iterations,confidence\n";
    char buf[256];
    for (const auto& r : rows) {
        if (r.confidence == "error") {
            std::snprintf(buf, sizeof buf, "%d,%.4g,%.6g,,%.4f,,0,error\n", r.example, r.mu, r.fixed, r.reference);
        } else {
            std::snprintf(buf, sizeof buf, "%d,%.4g,%.6g,%.6f,%.4f,%.6f,%d,%s\n", r.example, r.mu, r.fixed, r.bound,
                          r.reference, r.deviation, r.iterations, r.confidence.c_str());
        }
        out << buf;
    }
}

} // namespace delaycert
