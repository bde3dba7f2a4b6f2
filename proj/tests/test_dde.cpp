#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "delaycert/dde.hpp"
#include "delaycert/error.hpp"

#include <random>
#include <sstream>

using namespace delaycert;

namespace {

NetworkModel decoupled()
{
    NetworkModel m;
    m.A = Eigen::MatrixXd::Zero(2, 2);
    m.B = Eigen::MatrixXd::Zero(2, 2);
    m.C = Eigen::Vector2d(1.0, 2.5).asDiagonal();
    m.L = Eigen::Vector2d(1.0, 1.0);
    return m;
}

Trajectory synthetic(std::function<Eigen::VectorXd(double)> f, double t_end, double dt)
{
    Trajectory tr;
    for (double t = 0; t <= t_end + 1e-12; t += dt) {
        tr.t.push_back(t);
        tr.z.push_back(f(t));
    }
    tr.dt = dt;
    tr.z0 = f(0.0);
    return tr;
}

} // namespace

TEST_CASE("matches the closed form when the network terms vanish")
{
    const auto m = decoupled();
    Eigen::VectorXd z0(2);
    z0 << 1.0, -2.0;
    const auto tr = simulate(m, {1.0, 0.0, 0.0}, z0, 5.0, 1e-3);
    double worst = 0.0;
    for (std::size_t i = 0; i < tr.size(); ++i) {
        const double t = tr.t[i];
        Eigen::VectorXd ref(2);
        ref << std::exp(-t), -2.0 * std::exp(-2.5 * t);
        worst = std::max(worst, (tr.z[i] - ref).lpNorm<Eigen::Infinity>());
    }
    CHECK(worst < 1e-8);
    CHECK(tr.size() == 5001);
}

TEST_CASE("fourth-order convergence with a delay")
{
    const auto m = example_model(1);
    Eigen::VectorXd z0(2);
    z0 << -1.0, 1.0;
    const DelayFunction d{1.0, 0.0, 0.0};
    auto end = [&](double dt) { return simulate(m, d, z0, 5.0, dt).z.back(); };
    const auto a = end(0.02), b = end(0.01), c = end(0.005);
    const double order = std::log2((a - b).norm() / (b - c).norm());
    MESSAGE("observed order " << order);
    CHECK(order >= 3.5);
}

TEST_CASE("time-varying delay is handled")
{
    const auto m = example_model(3);
    Eigen::VectorXd z0(2);
    z0 << -1.0, 1.0;
    const DelayFunction d{2.0, 0.5, 1.0};
    const auto tr = simulate(m, d, z0, 10.0, 1e-2);
    CHECK(tr.z.back().allFinite());
    CHECK(d.max_rate() == 0.5);
}

TEST_CASE("decay rate estimation")
{
    const auto pure = synthetic([](double t) { return Eigen::VectorXd::Constant(2, 3.0 * std::exp(-0.7 * t)); }, 20, 0.01);
    CHECK(estimate_decay_rate(pure, 2.0, 18.0) == doctest::Approx(0.7).epsilon(1e-6));

    const auto flat = synthetic([](double) { return Eigen::VectorXd::Constant(2, 0.4); }, 5, 0.01);
    CHECK(std::abs(estimate_decay_rate(flat, 0.0, 5.0)) < 1e-12);

    auto code = [](auto&& fn) {
        try {
            fn();
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::ConfigError;
    };
    CHECK(code([&] { estimate_decay_rate(pure, 2.0, 2.05); }) == ErrorCode::DegenerateWindow);
    const auto zero = synthetic([](double) { return Eigen::VectorXd::Zero(2); }, 5, 0.01);
    CHECK(code([&] { estimate_decay_rate(zero, 0.0, 5.0); }) == ErrorCode::DegenerateWindow);
}

TEST_CASE("envelope checks")
{
    const auto zero = synthetic([](double) { return Eigen::VectorXd::Zero(2); }, 5, 0.01);
    CHECK(check_envelope(zero, 1.0, 3.0).pass());

    const auto slow = synthetic([](double t) { return Eigen::VectorXd::Constant(2, std::exp(-0.2 * t)); }, 5, 0.01);
    const auto bad = check_envelope(slow, 1.0, 5.0);
    CHECK_FALSE(bad.pass());
    CHECK(bad.worst_ratio > 1.0);
    CHECK(check_envelope(slow, 1.0, 0.1).pass());
    CHECK_THROWS_AS(check_envelope(slow, 0.5, 1.0), Error);
    CHECK_THROWS_AS(check_envelope(slow, 2.0, 0.0), Error);
}

TEST_CASE("step size and delay validation")
{
    const auto m = example_model(1);
    Eigen::VectorXd z0 = Eigen::VectorXd::Ones(2);
    try {
        simulate(m, {0.1, 0.0, 0.0}, z0, 1.0, 0.05);
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::StepTooLarge);
    }
    CHECK_THROWS_AS(simulate(m, {0.5, 0.7, 1.0}, z0, 1.0, 0.01), Error);
    CHECK_THROWS_AS(simulate(m, {1.0, 0.0, 0.0}, Eigen::VectorXd::Ones(3), 1.0, 0.01), Error);
}

TEST_CASE("activation stays inside its sector")
{
    const auto m = example_model(2);
    std::mt19937_64 rng(9);
    std::normal_distribution<double> nd(0.0, 3.0);
    for (int i = 0; i < 1000; ++i) {
        Eigen::VectorXd z(4);
        for (auto& x : z) x = nd(rng);
        const auto f = activation(m, z);
        for (int j = 0; j < 4; ++j) {
            const double r = f(j) / z(j);
            CHECK(r >= 0.0);
            CHECK(r <= m.L(j) + 1e-15);
        }
    }
}

TEST_CASE("trajectory csv")
{
    const auto m = example_model(1);
    Eigen::VectorXd z0(2);
    z0 << -1.0, 1.0;
    const auto tr = simulate(m, {1.0, 0.0, 0.0}, z0, 0.1, 0.01);
    std::ostringstream out;
    write_trajectory_csv(out, tr);
    const std::string s = out.str();
    CHECK(s.rfind("t,z_1,z_2,norm,h\n", 0) == 0);
    CHECK(std::count(s.begin(), s.end(), '\n') == 12);
}
