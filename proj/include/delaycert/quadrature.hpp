#pragma once

// Globally adaptive 15-point Gauss-Kronrod quadrature for scalar and
// Eigen-vector valued integrands.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <span>
#include <type_traits>
#include <vector>

namespace delaycert::quad {

struct Options {
    double abs_tol = 1e-11;
    double rel_tol = 1e-13;
    int max_subdivisions = 4000;
};

template <typename T>
struct Result {
    T value;
    double error = 0.0;
    int subdivisions = 0;
    bool converged = false;
};

namespace detail {

// Kronrod abscissae on [0, 1]; odd entries (1,3,5,7) are the Gauss nodes.
inline constexpr std::array<double, 8> kNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>(); }

template <typename T>
struct Segment {
    double a, b;
    T value;
    double error;
    bool operator<(const Segment& other) const { return error < other.error; }
};

template <typename T, typename F>
Segment<T> kronrod15(F& f, double a, double b)
{
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    T fc = f(center);
    T kronrod = fc * kKronrodWeights[7];
    T gauss = fc * kGaussWeights[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kNodes[j];
        T f1 = f(center - dx);
        T f2 = f(center + dx);
        T sum = f1 + f2;
        kronrod = kronrod + sum * kKronrodWeights[j];
        if (j % 2 == 1) gauss = gauss + sum * kGaussWeights[j / 2];
    }
    T value = kronrod * half;
    T diff = (kronrod - gauss) * half;
    return {a, b, value, magnitude(diff)};
}

} // namespace detail

/// Integrates f over [a, b]. Interior points where f is discontinuous may be
/// passed as breakpoints so that no Kronrod panel straddles them.
template <typename F>
auto integrate(F&& f, double a, double b, const Options& opts = {}, std::span<const double> breakpoints = {})
{
    using T = std::decay_t<decltype(f(a))>;
    using Seg = detail::Segment<T>;

    std::vector<double> cuts{a};
    for (double p : breakpoints)
        if (p > a && p < b) cuts.push_back(p);
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());

    std::priority_queue<Seg> heap;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        if (cuts[i + 1] > cuts[i]) heap.push(detail::kronrod15<T>(f, cuts[i], cuts[i + 1]));

    auto totals = [&heap]() {
        auto copy = heap;
        Seg first = copy.top();
        copy.pop();
        T value = first.value;
        double error = first.error;
        while (!copy.empty()) {
            value = value + copy.top().value;
            error += copy.top().error;
            copy.pop();
        }
        return std::pair{value, error};
    };

    Result<T> out{};
    if (heap.empty()) {
        T zero = f(a) * 0.0;
        out.value = zero;
        out.converged = true;
        return out;
    }

    double error_sum = 0.0;
    T value_sum{};
    {
        auto [v, e] = totals();
        value_sum = v;
        error_sum = e;
    }
    int subdivisions = 0;
    while (error_sum > std::max(opts.abs_tol, opts.rel_tol * detail::magnitude(value_sum)) &&
           subdivisions < opts.max_subdivisions) {
        Seg worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            heap.push(worst);
            break;
        }
        Seg left = detail::kronrod15<T>(f, worst.a, mid);
        Seg right = detail::kronrod15<T>(f, mid, worst.b);
        error_sum += left.error + right.error - worst.error;
        value_sum = value_sum + left.value + right.value - worst.value;
        heap.push(left);
        heap.push(right);
        ++subdivisions;
        // Re-sum periodically to stop drift in the running totals.
        if (subdivisions % 64 == 0) {
            auto [v, e] = totals();
            value_sum = v;
            error_sum = e;
        }
    }
    auto [v, e] = totals();
    out.value = v;
    out.error = e;
    out.subdivisions = subdivisions;
    out.converged = e <= std::max(opts.abs_tol, opts.rel_tol * detail::magnitude(v));
    return out;
}

} // namespace delaycert::quad
