// Acceptance run: one PASS/FAIL line per criterion, details indented below.
// Usage: acceptance [criterion ...]   (default: all of 1..10)

#include "dense_oracle.hpp"

#include "delaycert/dde.hpp"
#include "delaycert/error.hpp"
#include "delaycert/inequality.hpp"
#include "delaycert/lmi.hpp"
#include "delaycert/properties.hpp"
#include "delaycert/sdp.hpp"
#include "delaycert/search.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

using namespace delaycert;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void verdict(int id, bool ok, const std::string& summary)
{
    std::printf("criterion %d: %s  %s\n", id, ok ? "PASS" : "FAIL", summary.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

void note(const char* fmt, auto... args)
{
    std::printf("    ");
    std::printf(fmt, args...);
    std::printf("\n");
}

const char* reading_name(SplitReading r)
{
    return r == SplitReading::FromIntervalEnd ? "from-interval-end" : "split-as-delay";
}

struct TableRun {
    SplitReading reading;
    std::vector<TableRow> rows;
    double seconds = 0.0;

    [[nodiscard]] bool within(double tol) const
    {
        for (const auto& r : rows)
            if (!r.error.empty() || !(std::abs(r.deviation) <= tol)) return false;
        return true;
    }
};

std::map<std::pair<int, SplitReading>, TableRun> table_cache;

const TableRun& run_table(int id, SplitReading reading)
{
    const auto key = std::make_pair(id, reading);
    if (auto it = table_cache.find(key); it != table_cache.end()) return it->second;
    ReproduceOptions opts;
    opts.overrides.assembly.split_reading = reading;
    opts.check_fractions = true;
    TableRun run{reading, {}, 0.0};
    const auto t0 = Clock::now();
    run.rows = reproduce_table(id, opts);
    run.seconds = seconds_since(t0);
    return table_cache.emplace(key, std::move(run)).first->second;
}

void print_rows(const TableRun& run)
{
    note("reading %s, %.1f s", reading_name(run.reading), run.seconds);
    for (const auto& r : run.rows) {
        if (!r.error.empty()) {
            note("  mu=%.2f  error: %s", r.mu, r.error.c_str());
            continue;
        }
        auto st = [](const std::optional<FeasibilityReport>& f) {
            return f ? std::string(to_string(f->status)) : std::string("-");
        };
        note("  mu=%.2f  bound=%.6f  reference=%.4f  deviation=%+.3f%%  0.97x:%s  1.05x:%s", r.mu, r.bound,
             r.reference, 100 * r.deviation, st(r.at_lower).c_str(), st(r.at_upper).c_str());
    }
}

bool fallback_holds(const TableRun& run)
{
    for (const auto& r : run.rows) {
        if (!r.error.empty() || !r.at_lower || !r.at_upper) return false;
        if (r.at_lower->status != FeasibilityStatus::Feasible) return false;
        if (r.at_upper->status != FeasibilityStatus::Infeasible) return false;
    }
    return true;
}

// Criteria 1-3. `with_fallback` is false where the criterion states no fallback.
void table_criterion(int id, int table, bool with_fallback, double budget_s)
{
    const auto& primary = run_table(table, SplitReading::FromIntervalEnd);
    double total_s = primary.seconds;
    print_rows(primary);
    if (primary.within(0.01)) {
        verdict(id, total_s <= budget_s, "all cells within 1% (" + std::to_string(total_s) + " s)");
        return;
    }
    const auto& alt = run_table(table, SplitReading::SplitAsDelay);
    total_s += alt.seconds;
    print_rows(alt);
    if (alt.within(0.01)) {
        verdict(id, true, "all cells within 1% under the alternate split reading");
        return;
    }
    if (!with_fallback) {
        verdict(id, false, "deviation above 1% under both split readings; no fallback for this table");
        note("(fallback check for reference: %s)", fallback_holds(primary) ? "would hold" : "would not hold");
        return;
    }
    const bool fb = fallback_holds(primary);
    verdict(id, fb,
            std::string("deviation above 1% under both readings; fallback (feasible at 0.97x, infeasible at 1.05x) ") +
                (fb ? "holds" : "does not hold"));
}

void criterion4()
{
    bool ok = true;
    for (int n = 1; n <= 8; ++n) {
        const int got = declare_decision_variables(n).count();
        const double want = 20.5 * n * n + 11.5 * n;
        if (got != want) {
            ok = false;
            note("n=%d: %d, expected %.1f", n, got, want);
        }
    }
    verdict(4, ok, "decision variable counts for n = 1..8");
}

void criterion5()
{
    const auto t0 = Clock::now();
    const auto rep = run_inequality_properties(7, 1000, 1e-8);
    const double s = seconds_since(t0);
    for (const auto& p : rep.properties)
        note("%-40s trials=%d violations=%d errors=%d worst=%.3e", p.name.c_str(), p.trials, p.violations, p.errors,
             p.worst_slack);
    bool ok = rep.total_failures() == 0 && s < 60.0;
    for (const auto& p : rep.properties) ok = ok && p.trials == 1000;
    verdict(5, ok, "seed 7, 1000 draws per inequality, tolerance 1e-8 (" + std::to_string(s) + " s)");
}

void criterion6()
{
    bool ok = true;
    double worst = 0.0;
    auto rel = [](double got, double want) { return std::abs(got - want) / std::abs(want); };
    for (double a : {0.0, -1.3, 2.0}) {
        for (double L : {0.1, 0.5, 1.0, 4.2, 7.0, 10.0}) {
            const Interval iv{a, a + L, 1e-8};
            const auto c = compute_coefficients(iv);
            const double errs[] = {rel(c.c1, -L / 2), rel(c.split - a, L / 2), rel(c.c4, -2.0), rel(c.q0, L),
                                   rel(c.q1, L * L * L / 12)};
            for (double e : errs) {
                worst = std::max(worst, e);
                if (!(e <= 1e-5)) ok = false;
            }
        }
    }
    note("worst relative error %.3e", worst);
    verdict(6, ok, "k = 1e-8 limits within 1e-5 relative");
}

void criterion7()
{
    bool ok = true;
    double worst = 0.0;
    for (int ex : {1, 2}) {
        const auto model = example_model(ex);
        std::mt19937_64 rng(100 + ex);
        std::uniform_real_distribution<double> uh(0.3, 5.0), umu(0.0, 0.95), uk(0.0, 1.0);
        const AssemblyOptions opts;
        for (int trial = 0; trial < 100; ++trial) {
            AnalysisParams p;
            p.h = uh(rng);
            p.mu = umu(rng);
            p.k = 1e-6 + uk(rng) * 0.9 * model.min_self_feedback();
            const auto coeffs = compute_coefficients({0.0, p.h, p.k});
            const auto sys = build_theorem_lmis(model, p, coeffs, opts);
            const auto blocks = build_theorem_blocks(model, p, coeffs, sys.registry, opts);
            Eigen::VectorXd val;
            const auto v = oracle::random_values(sys.registry, rng, val);
            const auto ref =
                oracle::evaluate(model, p, coeffs, split_delay(coeffs, p.h, opts.split_reading), false, v).named;
            const std::pair<const char*, const AffineSymmetricExpression*> named[] = {
                {"Xi1", &blocks.xi1}, {"Xi2", &blocks.xi2}, {"Xi3", &blocks.xi3},       {"Xi4", &blocks.xi4},
                {"Xi5", &blocks.xi5}, {"Psi", &blocks.psi}, {"Pi", &blocks.pi},         {"Theta1", &blocks.theta1},
                {"Theta2", &blocks.theta2}, {"Gamma", &blocks.gamma}};
            auto check = [&](const char* name, const Eigen::MatrixXd& got) {
                const double g = oracle::relative_gap(got, ref.at(name));
                worst = std::max(worst, g);
                if (!(g <= 1e-10)) {
                    ok = false;
                    note("example %d trial %d block %s gap %.3e", ex, trial, name, g);
                }
            };
            for (const auto& [name, expr] : named) check(name, expr->evaluate(val));
            for (const char* name : {"Phi+Theta1", "Phi+Theta2"}) check(name, sys.find(name)->expr.evaluate(val));
        }
    }
    note("worst relative gap %.3e", worst);
    verdict(7, ok, "100 valuations x examples 1, 2, every named block within 1e-10");
}

// Re-decides each certified-feasible point from the table runs and
// re-checks the witness with the LAPACK eigensolver.
void criterion8()
{
    int checked = 0;
    bool ok = true;
    double worst_excess = std::numeric_limits<double>::infinity();
    for (auto& [key, run] : table_cache) {
        const auto setup = table_setup(key.first);
        const auto model = example_model(setup.example);
        AssemblyOptions assembly;
        assembly.split_reading = key.second;
        for (const auto& r : run.rows) {
            std::vector<AnalysisParams> points;
            auto at = [&](double v) {
                return setup.mode == SearchMode::MaxRate ? AnalysisParams{setup.fixed, r.mu, v}
                                                         : AnalysisParams{v, r.mu, setup.fixed};
            };
            if (r.search) points.push_back(at(r.search->optimum));
            if (r.at_lower && r.at_lower->status == FeasibilityStatus::Feasible) points.push_back(at(0.97 * r.reference));
            for (const auto& p : points) {
                const auto sys = build_theorem_lmis(model, p, assembly);
                const auto rep = decide(sys);
                if (rep.status != FeasibilityStatus::Feasible) {
                    // the search only reports points it certified, so this would be a reproducibility bug
                    ok = false;
                    note("table %d mu=%.2f param point no longer feasible (%s)", key.first, r.mu,
                         std::string(to_string(rep.status)).c_str());
                    continue;
                }
                ++checked;
                const auto cert = certify(*rep.witness, sys, kCertTol, rep.margin);
                const bool pass = rep.witness && cert.pass && cert.strict && cert.min_slack >= rep.margin - 1e-6;
                worst_excess = std::min(worst_excess, cert.min_slack - rep.margin);
                if (!pass) {
                    ok = false;
                    note("table %d mu=%.2f: min slack %.3e vs margin %.3e", key.first, r.mu, cert.min_slack,
                         rep.margin);
                }
            }
        }
    }
    if (checked == 0) ok = false;
    note("%d feasible verdicts re-certified; smallest (slack - margin) %.3e", checked, worst_excess);
    verdict(8, ok, "witness certification with LAPACK dsyevd");
}

void criterion9()
{
    bool ok = true;

    // Example 1 at h=1, mu=0, k=1: envelope from the certificate
    const auto m1 = example_model(1);
    const AnalysisParams p{1.0, 0.0, 1.0};
    const auto sys = build_theorem_lmis(m1, p);
    const auto rep = decide(sys);
    if (rep.status != FeasibilityStatus::Feasible) {
        verdict(9, false, "example 1 is not certified at (1, 0, 1)");
        return;
    }
    const auto ov = compute_overshoot(sys.registry, *rep.witness, m1, p);
    Eigen::VectorXd z0(2);
    z0 << -1.0, 1.0;
    const auto tr = simulate(m1, {1.0, 0.0, 0.0}, z0, 30.0, 1e-3);
    const auto env = check_envelope(tr, ov.H, p.k);
    const double k_est = estimate_decay_rate(tr, 5.0, 30.0);
    note("example 1: H=%.4g  envelope %s (worst ratio %.3g)  k_est=%.4f (need >= %.2f)", ov.H,
         env.pass() ? "holds" : "violated", env.worst_ratio, k_est, p.k - 0.05);
    ok = ok && env.pass() && k_est >= p.k - 0.05;

    // Examples 2 and 3 with their preset delay and z0: ||z|| non-increasing after t = 5
    struct Fig {
        int example;
        DelayFunction delay;
        std::vector<double> z0;
    };
    const Fig figs[] = {{2, {2.8674, 0.8, 1.0}, {-1.0, -0.5, 0.5, 1.0}}, {3, {6.3039, 0.77, 1.0}, {-1.0, 1.0}}};
    for (const auto& f : figs) {
        const auto m = example_model(f.example);
        const Eigen::VectorXd z = Eigen::Map<const Eigen::VectorXd>(f.z0.data(), f.z0.size());
        const auto t = simulate(m, f.delay, z, 30.0, 1e-3);
        int rises = 0;
        double first_rise = -1.0, largest_rise = 0.0, prev = -1.0;
        // local maxima of ||z|| after t = 5, to see whether the peaks decay
        std::vector<double> peaks;
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (t.t[i] < 5.0) continue;
            const double nz = t.z[i].norm();
            if (prev >= 0.0 && nz > prev) {
                ++rises;
                largest_rise = std::max(largest_rise, nz - prev);
                if (first_rise < 0) first_rise = t.t[i];
            }
            if (i + 1 < t.size() && i > 0 && nz > t.z[i - 1].norm() && nz >= t.z[i + 1].norm()) peaks.push_back(nz);
            prev = nz;
        }
        bool peaks_decay = true;
        for (std::size_t i = 1; i < peaks.size(); ++i) peaks_decay = peaks_decay && peaks[i] < peaks[i - 1];
        note("example %d: ||z(5)||=%.3e ||z(30)||=%.3e  increasing steps=%d (first at t=%.3f, largest %.3e)  "
             "local peaks=%zu decaying=%s",
             f.example, t.z[5000].norm(), t.z.back().norm(), rises, first_rise, largest_rise, peaks.size(),
             peaks_decay ? "yes" : "no");
        ok = ok && rises == 0;
    }
    verdict(9, ok, "example 1 envelope and rate; examples 2, 3 monotone decay of ||z|| after t = 5");
}

void criterion10()
{
    bool ok = true;
    int tables = 0;
    for (int table : {1, 2, 3}) {
        const auto it = table_cache.find({table, SplitReading::FromIntervalEnd});
        if (it == table_cache.end()) continue;
        ++tables;
        const auto& rows = it->second.rows;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (!rows[i].error.empty() || !rows[i].search) {
                ok = false;
                note("table %d mu=%.2f has no search result", table, rows[i].mu);
                continue;
            }
            const auto& s = *rows[i].search;
            if (!s.post_scan_clean || s.post_scan.empty()) {
                ok = false;
                note("table %d mu=%.2f: post-scan found a feasible point above %.6f", table, rows[i].mu, s.optimum);
            }
            if (i > 0 && !(rows[i].bound < rows[i - 1].bound)) {
                ok = false;
                note("table %d: bound at mu=%.2f (%.6f) is not below mu=%.2f (%.6f)", table, rows[i].mu,
                     rows[i].bound, rows[i - 1].mu, rows[i - 1].bound);
            }
        }
    }
    if (tables != 3) ok = false;
    verdict(10, ok, "bounds strictly decrease in mu; post-scans find no feasible point");
}

} // namespace

int main(int argc, char** argv)
{
    std::set<int> want;
    for (int i = 1; i < argc; ++i) want.insert(std::atoi(argv[i]));
    if (want.empty())
        for (int i = 1; i <= 10; ++i) want.insert(i);
    // 8 and 10 read the table runs
    auto need_tables = [&](int t) {
        return want.count(t) || want.count(8) || want.count(10);
    };

    const auto t0 = Clock::now();
    try {
        if (need_tables(1)) {
            if (want.count(1)) table_criterion(1, 1, true, 120.0);
            else run_table(1, SplitReading::FromIntervalEnd);
        }
        if (need_tables(2)) {
            if (want.count(2)) table_criterion(2, 2, true, 900.0);
            else run_table(2, SplitReading::FromIntervalEnd);
        }
        if (need_tables(3)) {
            if (want.count(3)) table_criterion(3, 3, false, 1e9);
            else run_table(3, SplitReading::FromIntervalEnd);
        }
        if (want.count(4)) criterion4();
        if (want.count(5)) criterion5();
        if (want.count(6)) criterion6();
        if (want.count(7)) criterion7();
        if (want.count(8)) criterion8();
        if (want.count(9)) criterion9();
        if (want.count(10)) criterion10();
    } catch (const std::exception& e) {
        std::printf("aborted: %s\n", e.what());
        return 2;
    }
    std::printf("%d criteria failed, %.1f s\n", failures, seconds_since(t0));
    return failures == 0 ? 0 : 1;
}
