#include "delaycert/properties.hpp"

#include "delaycert/inequality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace delaycert {

int PropertySuiteReport::total_failures() const
{
    int total = 0;
    for (const auto& p : properties) total += p.violations + p.errors;
    return total;
}

namespace {

constexpr int kDim = 2;

// Smooth random test function on [a, b] with analytic derivative.
struct TestFunction {
    enum class Kind { Polynomial, Trig, Spline } kind = Kind::Polynomial;
    double a = 0.0, len = 1.0;
    Eigen::MatrixXd coef;          // polynomial: (degree+1) x n; trig: 3*terms x n
    std::vector<double> knots;     // spline knots in [0, 1]
    Eigen::MatrixXd values, slopes;

    [[nodiscard]] Eigen::VectorXd operator()(double u) const { return eval(u, false); }
    [[nodiscard]] Eigen::VectorXd derivative(double u) const { return eval(u, true); }

    [[nodiscard]] Eigen::VectorXd eval(double u, bool deriv) const
    {
        const double s = (u - a) / len;
        Eigen::VectorXd out = Eigen::VectorXd::Zero(kDim);
        switch (kind) {
        case Kind::Polynomial:
            for (Eigen::Index i = coef.rows() - 1; i >= 0; --i) {
                // Horner on value; derivative summed directly
                if (!deriv) out = out * s + coef.row(i).transpose();
            }
            if (deriv)
                for (Eigen::Index i = 1; i < coef.rows(); ++i)
                    out += coef.row(i).transpose() * (static_cast<double>(i) * std::pow(s, static_cast<double>(i - 1)) / len);
            return out;
        case Kind::Trig:
            for (Eigen::Index t = 0; t < coef.rows() / 3; ++t)
                for (int j = 0; j < kDim; ++j) {
                    const double amp = coef(3 * t, j), freq = coef(3 * t + 1, j), phase = coef(3 * t + 2, j);
                    out(j) += deriv ? amp * freq / len * std::cos(freq * s + phase) : amp * std::sin(freq * s + phase);
                }
            return out;
        case Kind::Spline: {
            const auto it = std::upper_bound(knots.begin(), knots.end(), s);
            auto i = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(it - knots.begin() - 1, 0,
                                                                          static_cast<std::ptrdiff_t>(knots.size()) - 2));
            const double h = knots[i + 1] - knots[i];
            const double x = (s - knots[i]) / h;
            const double x2 = x * x, x3 = x2 * x;
            const auto ii = static_cast<Eigen::Index>(i);
            if (!deriv)
                return (2 * x3 - 3 * x2 + 1) * values.row(ii).transpose() +
                       (x3 - 2 * x2 + x) * h * slopes.row(ii).transpose() +
                       (-2 * x3 + 3 * x2) * values.row(ii + 1).transpose() +
                       (x3 - x2) * h * slopes.row(ii + 1).transpose();
            return ((6 * x2 - 6 * x) / h * values.row(ii).transpose() + (3 * x2 - 4 * x + 1) * slopes.row(ii).transpose() +
                    (-6 * x2 + 6 * x) / h * values.row(ii + 1).transpose() + (3 * x2 - 2 * x) * slopes.row(ii + 1).transpose()) /
                   len;
        }
        }
        return out;
    }

    [[nodiscard]] std::vector<double> breakpoints() const
    {
        std::vector<double> out;
        if (kind == Kind::Spline)
            for (std::size_t i = 1; i + 1 < knots.size(); ++i) out.push_back(a + knots[i] * len);
        return out;
    }
};

class Generator {
public:
    explicit Generator(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
    double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

    Interval interval()
    {
        Interval iv;
        iv.a = uniform(-2.0, 2.0);
        iv.b = iv.a + log_uniform(0.1, 10.0);
        iv.k = log_uniform(1e-6, 5.0);
        return iv;
    }

    Eigen::MatrixXd spd()
    {
        Eigen::MatrixXd G(kDim, kDim);
        for (int i = 0; i < kDim; ++i)
            for (int j = 0; j < kDim; ++j) G(i, j) = normal();
        return G * G.transpose() + 0.1 * Eigen::MatrixXd::Identity(kDim, kDim);
    }

    TestFunction function(double a, double len, bool allow_spline)
    {
        TestFunction f;
        f.a = a;
        f.len = len;
        const int kinds = allow_spline ? 3 : 2;
        f.kind = static_cast<TestFunction::Kind>(integer(0, kinds - 1));
        if (f.kind == TestFunction::Kind::Polynomial) {
            const int degree = integer(0, 6);
            f.coef.resize(degree + 1, kDim);
            for (Eigen::Index i = 0; i <= degree; ++i)
                for (int j = 0; j < kDim; ++j) f.coef(i, j) = normal();
        } else if (f.kind == TestFunction::Kind::Trig) {
            const int terms = integer(1, 3);
            f.coef.resize(3 * terms, kDim);
            for (int t = 0; t < terms; ++t)
                for (int j = 0; j < kDim; ++j) {
                    f.coef(3 * t, j) = normal();
                    f.coef(3 * t + 1, j) = uniform(0.0, 12.0);
                    f.coef(3 * t + 2, j) = uniform(0.0, 6.283185307179586);
                }
        } else {
            const int pieces = integer(2, 6);
            f.knots.push_back(0.0);
            for (int i = 1; i < pieces; ++i) f.knots.push_back(uniform(0.0, 1.0));
            f.knots.push_back(1.0);
            std::sort(f.knots.begin(), f.knots.end());
            f.knots.erase(std::unique(f.knots.begin(), f.knots.end(),
                                      [](double x, double y) { return y - x < 1e-3; }),
                          f.knots.end());
            if (f.knots.back() != 1.0) f.knots.back() = 1.0;
            const auto m = static_cast<Eigen::Index>(f.knots.size());
            f.values.resize(m, kDim);
            f.slopes.resize(m, kDim);
            for (Eigen::Index i = 0; i < m; ++i)
                for (int j = 0; j < kDim; ++j) {
                    f.values(i, j) = normal();
                    f.slopes(i, j) = 3.0 * normal();
                }
        }
        return f;
    }

private:
    std::mt19937_64 rng_;
};

void record(PropertyStats& st, double slack, double tolerance, const std::string& what)
{
    ++st.trials;
    st.worst_slack = std::min(st.worst_slack, slack);
    if (!(slack >= -tolerance)) {
        ++st.violations;
        if (st.notes.size() < 5) st.notes.push_back(what + " slack " + std::to_string(slack));
    }
}

void record_error(PropertyStats& st, const std::string& what)
{
    ++st.trials;
    ++st.errors;
    if (st.notes.size() < 5) st.notes.push_back(what);
}

double normalised(double lhs, double rhs) { return (lhs - rhs) / (1.0 + std::abs(lhs)); }

std::string describe(const Interval& iv)
{
    return "[" + std::to_string(iv.a) + ", " + std::to_string(iv.b) + "] k=" + std::to_string(iv.k);
}

} // namespace

PropertySuiteReport run_inequality_properties(std::uint64_t seed, int count, double tolerance)
{
    PropertySuiteReport report;
    report.seed = seed;
    report.count = count;
    report.tolerance = tolerance;

    // independent streams so that changing one property does not shift the others
    Generator g2(seed * 4 + 0), g4(seed * 4 + 1), g5(seed * 4 + 2), g6(seed * 4 + 3);
    auto named = [](const char* name) {
        PropertyStats st;
        st.name = name;
        return st;
    };
    PropertyStats st2 = named("four-function weighted inequality"), st4 = named("exponentially weighted bound"),
                  st5 = named("unweighted bound"), st6r = named("double integral bound (s to b)"),
                  st6l = named("double integral bound (a to s)");

    quad::Options tight;
    tight.abs_tol = 1e-12;
    tight.rel_tol = 1e-13;

    for (int trial = 0; trial < count; ++trial) {
        {
            const Interval iv = g2.interval();
            const Eigen::MatrixXd R = g2.spd();
            const TestFunction f = g2.function(iv.a, iv.length(), true);
            try {
                const auto cf = compute_coefficients(iv);
                GapInput in;
                in.phi = [&f](double u) { return f(u); };
                in.basis = {[](double) { return 1.0; }, [&](double u) { return cf.p1(iv, u); },
                            [&](double u) { return cf.p2(iv, u); }, [&](double u) { return cf.p3(u); }};
                // orthogonal weight of the basis
                in.weight = [&](double u) { return std::exp(-2.0 * iv.k * (u - iv.b)); };
                in.a = iv.a;
                in.b = iv.b;
                in.breakpoints = f.breakpoints();
                in.breakpoints.push_back(cf.split);
                std::sort(in.breakpoints.begin(), in.breakpoints.end());
                // gap is lhs - rhs; normalise by the lhs scale
                const double lhs = quad::integrate(
                                       [&](double u) {
                                           const Eigen::VectorXd v = f(u);
                                           return v.dot(R * v) * in.weight(u);
                                       },
                                       iv.a, iv.b, tight, in.breakpoints)
                                       .value;
                const double gap = lemma2_gap(in, R, 1e-8, tight);
                record(st2, gap / (1.0 + std::abs(lhs)), tolerance, describe(iv));
            } catch (const std::exception& e) {
                record_error(st2, describe(iv) + ": " + e.what());
            }
        }
        {
            const Interval iv = g4.interval();
            const Eigen::MatrixXd R = g4.spd();
            const TestFunction f = g4.function(iv.a, iv.length(), true);
            try {
                const auto cf = compute_coefficients(iv);
                const auto mom = moments_by_quadrature([&f](double u) { return f(u); }, iv.a, iv.b, cf.split, tight);
                auto bps = f.breakpoints();
                const double lhs = quad::integrate(
                                       [&](double u) {
                                           const Eigen::VectorXd v = f(u);
                                           return std::exp(2.0 * iv.k * (u - iv.b)) * v.dot(R * v);
                                       },
                                       iv.a, iv.b, tight, bps)
                                       .value;
                record(st4, normalised(lhs, lemma4_bound(mom, R, cf)), tolerance, describe(iv));
            } catch (const std::exception& e) {
                record_error(st4, describe(iv) + ": " + e.what());
            }
        }
        {
            Interval iv = g5.interval();
            const Eigen::MatrixXd R = g5.spd();
            const TestFunction f = g5.function(iv.a, iv.length(), true);
            try {
                const double mid = 0.5 * (iv.a + iv.b);
                const auto mom = moments_by_quadrature([&f](double u) { return f(u); }, iv.a, iv.b, mid, tight);
                const double lhs = quad::integrate(
                                       [&](double u) {
                                           const Eigen::VectorXd v = f(u);
                                           return v.dot(R * v);
                                       },
                                       iv.a, iv.b, tight, f.breakpoints())
                                       .value;
                record(st5, normalised(lhs, lemma5_bound(mom, R, iv.length())), tolerance, describe(iv));
            } catch (const std::exception& e) {
                record_error(st5, describe(iv) + ": " + e.what());
            }
        }
        {
            const Interval iv = g6.interval();
            const Eigen::MatrixXd R = g6.spd();
            const TestFunction f = g6.function(iv.a, iv.length(), true);
            try {
                const auto bounds = lemma6_bounds([&f](double u) { return f(u); }, iv.a, iv.b, R, tight);
                auto energy = [&](double u) {
                    const Eigen::VectorXd d = f.derivative(u);
                    return d.dot(R * d);
                };
                const auto bps = f.breakpoints();
                // -int_a^b int_s^b g du ds = -int_a^b (u - a) g(u) du, and symmetrically
                const double right =
                    -quad::integrate([&](double u) { return (u - iv.a) * energy(u); }, iv.a, iv.b, tight, bps).value;
                const double left =
                    -quad::integrate([&](double u) { return (iv.b - u) * energy(u); }, iv.a, iv.b, tight, bps).value;
                record(st6r, (bounds.upper_bound_right - right) / (1.0 + std::abs(right)), tolerance, describe(iv));
                record(st6l, (bounds.upper_bound_left - left) / (1.0 + std::abs(left)), tolerance, describe(iv));
            } catch (const std::exception& e) {
                record_error(st6r, describe(iv) + ": " + e.what());
                record_error(st6l, describe(iv) + ": " + e.what());
            }
        }
    }
    report.properties = {st2, st4, st5, st6r, st6l};
    return report;
}

} // namespace delaycert
