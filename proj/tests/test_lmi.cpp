#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "dense_oracle.hpp"

#include "delaycert/error.hpp"
#include "delaycert/lmi.hpp"
#include "delaycert/sdp.hpp"

#include <random>
#include <sstream>

using namespace delaycert;

TEST_CASE("selectors")
{
    const Eigen::Index n = 3;
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(12 * n, 12 * n);
    for (int i = 1; i <= 12; ++i) {
        const auto e = selector(i, n);
        CHECK(e.rows() == 12 * n);
        CHECK(e.cols() == n);
        CHECK((e.transpose() * e).isIdentity());
        sum += e * e.transpose();
    }
    CHECK(sum.isIdentity());
    CHECK((selector(2, n).transpose() * selector(5, n)).isZero());
    CHECK_THROWS_AS(selector(0, n), Error);
    try {
        selector(13, n);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::IndexOutOfRange);
    }
}

TEST_CASE("es maps the augmented vector to the vector field")
{
    const auto m = example_model(1);
    const auto es = build_es(m);
    Eigen::VectorXd xi = Eigen::VectorXd::Random(24);
    const Eigen::VectorXd z = xi.segment(0, 2), fz = xi.segment(6, 2), fzh = xi.segment(8, 2);
    CHECK((es.transpose() * xi - (-m.C * z + m.A * fz + m.B * fzh)).norm() < 1e-14);
}

TEST_CASE("decision variable count")
{
    for (int n = 1; n <= 8; ++n) {
        CAPTURE(n);
        const auto reg = declare_decision_variables(n);
        CHECK(2 * reg.count() == 41 * n * n + 23 * n);
        int total = 0;
        for (const auto* v : reg.all()) total += v->scalar_count();
        CHECK(total == reg.count());
    }
    // conic form adds the margin
    const auto sys = build_theorem_lmis(example_model(1), {1.0, 0.0, 0.5});
    CHECK(to_conic(sys).num_vars() == 106);
}

TEST_CASE("variable ids are contiguous and patterns are consistent")
{
    const auto reg = declare_decision_variables(3);
    int next = 0;
    for (const auto* v : reg.all()) {
        CHECK(v->first_id() == next);
        next += v->scalar_count();
        Eigen::VectorXd val = Eigen::VectorXd::Zero(reg.count());
        for (int id = v->first_id(); id < v->first_id() + v->scalar_count(); ++id) {
            val.setZero();
            val(id) = 1.0;
            const auto m = v->value(val);
            const auto pat = v->pattern(id);
            CHECK(m.sum() == doctest::Approx(static_cast<double>(pat.size())));
            for (auto [r, c] : pat) CHECK(m(r, c) == 1.0);
        }
    }
    CHECK(reg.find("Z3") == &reg.Z3);
    CHECK(reg.find("nope") == nullptr);
}

namespace {

void dual_path(int example, std::uint64_t seed, const AssemblyOptions& opts)
{
    const auto model = example_model(example);
    const Eigen::Index n = model.dimension();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uh(0.3, 5.0), umu(0.0, 0.95);
    std::uniform_real_distribution<double> uk(0.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        AnalysisParams p;
        p.h = uh(rng);
        p.mu = umu(rng);
        p.k = 1e-6 + uk(rng) * 0.9 * model.min_self_feedback();
        const auto coeffs = compute_coefficients({0.0, p.h, p.k});
        const auto reg = declare_decision_variables(n);
        const auto blocks = build_theorem_blocks(model, p, coeffs, reg, opts);
        Eigen::VectorXd val;
        const auto v = oracle::random_values(reg, rng, val);
        const double xi = split_delay(coeffs, p.h, opts.split_reading);
        const auto ref = oracle::evaluate(model, p, coeffs, xi, opts.scale_mean_term_by_h, v).named;

        const std::pair<const char*, const AffineSymmetricExpression*> named[] = {
            {"Xi1", &blocks.xi1},       {"Xi2", &blocks.xi2}, {"Xi3", &blocks.xi3}, {"Xi4", &blocks.xi4},
            {"Xi5", &blocks.xi5},       {"Psi", &blocks.psi}, {"Pi", &blocks.pi},   {"Theta1", &blocks.theta1},
            {"Theta2", &blocks.theta2}, {"Gamma", &blocks.gamma}};
        for (const auto& [name, expr] : named) {
            const double gap = oracle::relative_gap(expr->evaluate(val), ref.at(name));
            CAPTURE(name);
            CAPTURE(trial);
            CHECK(gap < 1e-10);
            worst = std::max(worst, gap);
        }
        const auto sys = build_theorem_lmis(model, p, coeffs, opts);
        for (const char* name : {"Phi+Theta1", "Phi+Theta2", "Gamma"}) {
            const auto* c = sys.find(name);
            REQUIRE(c != nullptr);
            const double gap = oracle::relative_gap(c->expr.evaluate(val), ref.at(name));
            CAPTURE(name);
            CHECK(gap < 1e-10);
            worst = std::max(worst, gap);
        }
    }
    MESSAGE("example " << example << " worst relative gap " << worst);
}

} // namespace

TEST_CASE("dual-path evaluation agrees with a dense oracle")
{
    dual_path(1, 11, {});
    dual_path(2, 12, {});
}

TEST_CASE("dual-path evaluation, alternate settings")
{
    AssemblyOptions o;
    o.split_reading = SplitReading::SplitAsDelay;
    o.scale_mean_term_by_h = true;
    dual_path(1, 21, o);
    dual_path(3, 23, o);
}

TEST_CASE("assembled expressions are symmetric and homogeneous")
{
    for (int ex : {1, 2, 3}) {
        const auto model = example_model(ex);
        const auto sys = build_theorem_lmis(model, {1.3, 0.5, 0.2});
        for (const auto& c : sys.constraints) {
            CAPTURE(c.name);
            CHECK(c.expr.asymmetry() == 0.0);
            CHECK(c.expr.is_homogeneous());
        }
        // Phi+Theta constraints live on the 12n augmented vector
        CHECK(sys.find("Phi+Theta1")->expr.dim() == 12 * model.dimension());
        CHECK(sys.find("Gamma")->expr.dim() == 6 * model.dimension());
    }
}

TEST_CASE("scaling a valuation scales every constraint")
{
    const auto sys = build_theorem_lmis(example_model(2), {2.0, 0.3, 0.1});
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd;
    Eigen::VectorXd v(sys.registry.count());
    for (auto& x : v) x = nd(rng);
    for (const auto& c : sys.constraints) {
        const Eigen::MatrixXd a = c.expr.evaluate(v), b = c.expr.evaluate(2.5 * v);
        CHECK((b - 2.5 * a).norm() <= 1e-12 * std::max(1.0, b.norm()));
    }
}

TEST_CASE("split delay readings")
{
    const auto c = compute_coefficients({0.0, 3.0, 0.4});
    CHECK(split_delay(c, 3.0, SplitReading::SplitAsDelay) == doctest::Approx(c.split));
    CHECK(split_delay(c, 3.0, SplitReading::FromIntervalEnd) == doctest::Approx(3.0 - c.split));
}

TEST_CASE("invalid params are rejected before assembly")
{
    const auto m = example_model(1);
    CHECK_THROWS_AS(build_theorem_lmis(m, {-1.0, 0.0, 0.5}), Error);
    CHECK_THROWS_AS(build_theorem_lmis(m, {1.0, 1.0, 0.5}), Error);
    CHECK_THROWS_AS(build_theorem_lmis(m, {1.0, 0.0, 2.0}), Error); // k must stay below min c = 2
}

TEST_CASE("lmi dump has one record per nonzero")
{
    const auto sys = build_theorem_lmis(example_model(1), {1.0, 0.0, 0.5});
    std::ostringstream out;
    write_lmi_system(out, sys);
    CHECK(out.str().size() > 1000);
    CHECK(out.str().find("Gamma") != std::string::npos);
}
