#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "delaycert/error.hpp"
#include "delaycert/search.hpp"

#include <sstream>

using namespace delaycert;

namespace {

SearchSpec coarse(SearchMode mode, const NetworkModel& m)
{
    auto s = default_search_spec(mode, m);
    s.tolerance = 1e-2;
    return s;
}

ErrorCode code_of(auto&& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::ConfigError;
}

} // namespace

TEST_CASE("default brackets")
{
    const auto m = example_model(1);
    const auto d = default_search_spec(SearchMode::MaxDelay, m);
    CHECK(d.lo == 0.1);
    CHECK(d.hi == 12.0);
    CHECK(d.tolerance == 1e-4);
    const auto r = default_search_spec(SearchMode::MaxRate, m);
    CHECK(r.lo == 1e-6);
    CHECK(r.hi == doctest::Approx(0.999 * 2.0));
}

TEST_CASE("example 1 rate search keeps its bracket invariant")
{
    const auto m = example_model(1);
    const auto res = max_rate(m, 1.0, 0.0, coarse(SearchMode::MaxRate, m));
    CHECK(res.optimum > 1.1);
    CHECK(res.optimum < 1.35);
    CHECK(res.hi - res.lo <= 1e-2);
    CHECK(res.optimum == res.lo);
    // every feasible probe is at or below the optimum, every infeasible one above
    for (const auto& p : res.probes) {
        if (p.status == FeasibilityStatus::Feasible) CHECK(p.param <= res.optimum);
        if (p.status == FeasibilityStatus::Infeasible) CHECK(p.param > res.optimum);
    }
    CHECK(res.indeterminate == 0);
    CHECK_FALSE(res.low_confidence);
    CHECK(res.post_scan.size() == 10);
    CHECK(res.post_scan_clean);
}

TEST_CASE("bound is non-increasing in mu")
{
    const auto m = example_model(1);
    const auto spec = coarse(SearchMode::MaxRate, m);
    const double a = max_rate(m, 1.0, 0.0, spec).optimum;
    const double b = max_rate(m, 1.0, 0.6, spec).optimum;
    CHECK(b <= a + 1e-2);
}

TEST_CASE("search preconditions")
{
    const auto m = example_model(1);
    auto spec = coarse(SearchMode::MaxRate, m);
    spec.lo = 1.9;
    CHECK(code_of([&] { max_rate(m, 1.0, 0.0, spec); }) == ErrorCode::InfeasibleAtLo);

    spec = coarse(SearchMode::MaxRate, m);
    spec.hi = 2.5; // above min c
    CHECK(code_of([&] { max_rate(m, 1.0, 0.0, spec); }) == ErrorCode::BracketInvalid);

    spec = coarse(SearchMode::MaxDelay, m);
    spec.lo = 3.0;
    spec.hi = 2.0;
    CHECK(code_of([&] { max_delay(m, 0.0, 0.5, spec); }) == ErrorCode::BracketInvalid);

    spec = coarse(SearchMode::MaxDelay, m);
    spec.tolerance = 0.0;
    CHECK(code_of([&] { max_delay(m, 0.0, 0.5, spec); }) == ErrorCode::BracketInvalid);
}

TEST_CASE("rate at the floor is accepted and feasible")
{
    const auto rep = probe_point(example_model(1), {1.0, 0.0, 1e-9});
    CHECK(rep.status == FeasibilityStatus::Feasible);
}

TEST_CASE("table setups")
{
    const auto t1 = table_setup(1);
    CHECK(t1.mode == SearchMode::MaxRate);
    CHECK(t1.fixed == 1.0);
    REQUIRE(t1.cells.size() == 3);
    CHECK(t1.cells[0].value == 1.2477);
    const auto t2 = table_setup(2);
    CHECK(t2.mode == SearchMode::MaxDelay);
    CHECK(t2.fixed == 1e-6);
    CHECK(t2.cells[2].mu == 0.9);
    CHECK(t2.cells[2].value == 3.5170);
    const auto t3 = table_setup(3);
    CHECK(t3.cells[0].mu == 0.77);
    CHECK(t3.cells[0].value == 7.0739);
    CHECK(code_of([] { table_setup(4); }) == ErrorCode::ConfigError);
}

TEST_CASE("table csv layout")
{
    TableRow r;
    r.example = 1;
    r.mu = 0.8;
    r.fixed = 1.0;
    r.bound = 1.0;
    r.reference = 1.0299;
    r.deviation = (1.0 - 1.0299) / 1.0299;
    r.iterations = 12;
    r.confidence = "high";
    std::ostringstream out;
    write_table_csv(out, {r});
    const std::string s = out.str();
    CHECK(s.rfind("example,mu,k_or_h_fixed,bound,paper_value,deviation,iterations,confidence\n", 0) == 0);
    CHECK(s.find(",high") != std::string::npos);
}
