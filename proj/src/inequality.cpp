#include "delaycert/inequality.hpp"

#include "delaycert/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace delaycert {

namespace {

// int_0^x s^j exp(-beta s) ds for j = 0..4.
std::array<double, 5> decaying_moments(double beta, double x)
{
    std::array<double, 5> out{};
    const double bx = beta * x;
    if (bx < 2.0) {
        // x^{j+1} * sum_i (-bx)^i / (i! (i + j + 1)); alternating, loss bounded by e^{2 bx}.
        for (int j = 0; j < 5; ++j) {
            double term = 1.0;
            double sum = 0.0;
            for (int i = 0; i < 200; ++i) {
                if (i > 0) term *= -bx / i;
                const double contribution = term / (i + j + 1);
                sum += contribution;
                if (std::abs(contribution) < 1e-18 * std::abs(sum)) break;
            }
            out[j] = std::pow(x, j + 1) * sum;
        }
        return out;
    }
    // j!/beta^{j+1} * (1 - e^{-bx} sum_{i<=j} bx^i / i!)
    const double decay = std::exp(-bx);
    double partial = 0.0;
    double power = 1.0;
    double factorial = 1.0;
    for (int j = 0; j < 5; ++j) {
        if (j > 0) {
            power *= bx;
            factorial *= j;
        }
        partial += power / factorial;
        out[j] = factorial / std::pow(beta, j + 1) * (1.0 - decay * partial);
    }
    return out;
}

void validate(const Interval& iv)
{
    if (!std::isfinite(iv.a) || !std::isfinite(iv.b) || !std::isfinite(iv.k))
        throw Error(ErrorCode::InvalidInterval, "non-finite interval data");
    if (!(iv.b > iv.a)) throw Error(ErrorCode::InvalidInterval, "requires b > a");
    if (!(iv.k >= kRateFloor)) {
        std::ostringstream msg;
        msg << "rate k = " << iv.k << " is below the floor " << kRateFloor;
        throw Error(ErrorCode::InvalidInterval, msg.str());
    }
}

// int_0^x p2(s) weight(s) ds in shifted coordinates.
double p2_partial_integral(double length, double k, double c2, double c3, double x)
{
    const auto m = weighted_moments(length, k, x);
    return m[2] + c2 * m[1] + c3 * m[0];
}

} // namespace

std::array<double, 5> weighted_moments(double length, double k, double x)
{
    auto m = decaying_moments(2.0 * k, x);
    const double scale = std::exp(2.0 * k * length);
    for (double& v : m) v *= scale;
    return m;
}

double OrthogonalityResiduals::max() const
{
    return std::max({p1_one, p2_one, p1_p2, p2_split});
}

OrthogonalityResiduals orthogonality_residuals(const Interval& iv, const WeightedBasisCoefficients& c)
{
    const double L = iv.length();
    const auto m = weighted_moments(L, iv.k, L);
    const double c1 = c.c1, c2 = c.c2, c3 = c.c3;

    OrthogonalityResiduals r;
    r.p1_one = std::abs(m[1] + c1 * m[0]) / std::sqrt(c.q1 * c.q0);
    r.p2_one = std::abs(m[2] + c2 * m[1] + c3 * m[0]) / std::sqrt(c.q2 * c.q0);
    const double p1p2 = m[3] + (c1 + c2) * m[2] + (c1 * c2 + c3) * m[1] + c1 * c3 * m[0];
    r.p1_p2 = std::abs(p1p2) / std::sqrt(c.q1 * c.q2);
    r.p2_split = std::abs(p2_partial_integral(L, iv.k, c2, c3, c.split - iv.a)) / std::sqrt(c.q2 * c.q0);
    return r;
}

WeightedBasisCoefficients compute_coefficients(const Interval& iv, double quad_tol, double root_tol)
{
    validate(iv);
    const double L = iv.length();
    const double k = iv.k;
    const double beta = 2.0 * k;

    WeightedBasisCoefficients c;
    const double wm1 = std::expm1(beta * L);
    c.w = wm1 + 1.0;
    c.from_series = beta * L < kSeriesSwitch;

    if (c.from_series) {
        // Gram-Schmidt on {1, s, s^2} with exactly evaluated moments.
        const auto m = weighted_moments(L, k, L);
        c.q0 = m[0];
        c.c1 = -m[1] / m[0];
        c.q1 = m[2] + c.c1 * m[1];
        c.c2 = -(m[3] + c.c1 * m[2]) / c.q1;
        c.c3 = c.c1 * c.c2 - m[2] / m[0];
        c.q2 = m[4] + c.c2 * m[3] + c.c3 * m[2];
    } else {
        const double L2 = L * L, L3 = L2 * L, L4 = L3 * L;
        const double k2 = k * k, k3 = k2 * k, k4 = k3 * k, k5 = k4 * k;
        c.c1 = L / wm1 - 1.0 / (2.0 * k);
        const double num = wm1 / (2.0 * k3) - L3 - L2 / k - L / (2.0 * k2) - L3 / wm1 - L2 / (k * wm1);
        const double den = wm1 / (4.0 * k2) - L2 - L2 / wm1;
        c.c2 = -num / den;
        c.c3 = c.c1 * c.c2 - (1.0 / (2.0 * k2) - L2 / wm1 - L / (k * wm1));
        c.q0 = wm1 / (2.0 * k);
        c.q1 = wm1 / (8.0 * k3) - L2 / (2.0 * k) - L2 / (2.0 * k * wm1);
        const double shift = c.c3 - c.c1 * c.c2;
        c.q2 = 3.0 * wm1 / (4.0 * k5) - L4 / (2.0 * k) - L3 / k2 - 3.0 * L2 / (2.0 * k3) - 3.0 * L / (2.0 * k4) -
               c.c2 * c.c2 * c.q1 - shift * shift * c.q0;
    }

    // Split point: F(x) = int_0^x p2 weight rises on (0, r1), falls on (r1, r2)
    // and rises back to F(L) = 0, so it has a single zero inside (r1, r2).
    const double disc = c.c2 * c.c2 - 4.0 * c.c3;
    if (!(disc > 0.0)) throw Error(ErrorCode::NonBracketedRoot, "p2 has no two real roots");
    const double sq = std::sqrt(disc);
    const double big = c.c2 >= 0.0 ? -0.5 * (c.c2 + sq) : -0.5 * (c.c2 - sq);
    double r1 = big;
    double r2 = c.c3 / big;
    if (r1 > r2) std::swap(r1, r2);
    if (!(r1 > 0.0 && r2 < L)) throw Error(ErrorCode::NonBracketedRoot, "roots of p2 are not inside (a, b)");

    double lo = r1, hi = r2;
    double f_lo = p2_partial_integral(L, k, c.c2, c.c3, lo);
    double f_hi = p2_partial_integral(L, k, c.c2, c.c3, hi);
    if (!(f_lo > 0.0 && f_hi < 0.0)) throw Error(ErrorCode::NonBracketedRoot, "split integral is not bracketed");
    const double width = root_tol * L;
    while (hi - lo > width) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double f_mid = p2_partial_integral(L, k, c.c2, c.c3, mid);
        if (f_mid > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    const double s_split = 0.5 * (lo + hi);
    c.split = iv.a + s_split;

    if (c.from_series) {
        const auto mx = weighted_moments(L, k, s_split);
        // int_split^b weight, computed directly to avoid q0 - m0(split).
        const double tail = std::expm1(beta * (L - s_split)) / beta;
        c.c4 = -c.q0 / mx[0];
        c.q3 = c.q0 * tail / mx[0];
        c.q13 = c.c4 * (mx[1] + c.c1 * mx[0]);
    } else {
        const double e_split = std::exp(beta * (L - s_split));
        const double w = c.w;
        c.c4 = -wm1 / (w - e_split);
        c.q3 = (wm1 / (2.0 * k)) * (std::expm1(beta * (L - s_split)) / (w - e_split));
        c.q13 = wm1 * s_split * e_split / (2.0 * k * (w - e_split)) - L / (2.0 * k);
    }

    if (!(c.q0 > 0 && c.q1 > 0 && c.q2 > 0 && c.q3 > 0))
        throw Error(ErrorCode::ToleranceNotMet, "non-positive squared norm in the basis");
    const auto residuals = orthogonality_residuals(iv, c);
    if (!(residuals.max() <= quad_tol)) {
        std::ostringstream msg;
        msg << "orthogonality residual " << residuals.max() << " exceeds " << quad_tol;
        throw Error(ErrorCode::ToleranceNotMet, msg.str());
    }
    return c;
}

MomentVector moments_by_quadrature(const std::function<Eigen::VectorXd(double)>& z, double a, double b,
                                   double split, const quad::Options& opts)
{
    MomentVector mv;
    mv.m0 = quad::integrate(z, a, b, opts).value;
    mv.m1 = quad::integrate([&](double u) -> Eigen::VectorXd { return (u - a) * z(u); }, a, b, opts).value;
    mv.m2 = quad::integrate([&](double u) -> Eigen::VectorXd { return 0.5 * (u - a) * (u - a) * z(u); }, a, b, opts)
                .value;
    mv.m_split = quad::integrate(z, a, split, opts).value;
    return mv;
}

namespace {

void check_dims(const MomentVector& m, const Eigen::MatrixXd& R)
{
    const auto n = m.dimension();
    if (R.rows() != n || R.cols() != n || m.m1.size() != n || m.m2.size() != n || m.m_split.size() != n)
        throw Error(ErrorCode::DimensionMismatch, "moment and weight matrix dimensions differ");
}

double form(const Eigen::VectorXd& v, const Eigen::MatrixXd& R) { return v.dot(R * v); }

} // namespace

BoundTerms lemma4_terms(const MomentVector& m, const WeightedBasisCoefficients& c)
{
    BoundTerms t;
    t.omega0 = m.m0;
    t.omega1 = c.c1 * m.m0 + m.m1;
    t.omega2 = c.c3 * m.m0 + c.c2 * m.m1 + 2.0 * m.m2;
    t.omega3 = m.m0 + c.c4 * m.m_split;
    return t;
}

double lemma4_bound(const MomentVector& moments, const Eigen::MatrixXd& R, const WeightedBasisCoefficients& c,
                    bool include_discontinuous_term)
{
    check_dims(moments, R);
    const auto t = lemma4_terms(moments, c);
    double bound = form(t.omega0, R) / c.q0 + form(t.omega1, R) / c.q1 + form(t.omega2, R) / c.q2;
    if (include_discontinuous_term) {
        const Eigen::VectorXd corrected = t.omega3 - (c.q13 / c.q1) * t.omega1;
        bound += form(corrected, R) / c.q3;
    }
    return bound;
}

double lemma5_bound(const MomentVector& m, const Eigen::MatrixXd& R, double length)
{
    check_dims(m, R);
    if (!(length > 0.0)) throw Error(ErrorCode::InvalidInterval, "length must be positive");
    const double L = length;
    const Eigen::VectorXd w0 = m.m0;
    const Eigen::VectorXd w1 = m.m0 - (2.0 / L) * m.m1;
    // m2 holds the triple integral; the basis uses twice that.
    const Eigen::VectorXd w2 = m.m0 - (6.0 / L) * m.m1 + (12.0 / (L * L)) * m.m2;
    const Eigen::VectorXd w3 = 2.0 * m.m_split - m.m0;
    const Eigen::VectorXd corrected = w3 - 1.5 * w1;
    return (form(w0, R) + 3.0 * form(w1, R) + 5.0 * form(w2, R) + form(corrected, R)) / L;
}

double lemma2_gap(const GapInput& in, const Eigen::MatrixXd& R, double ortho_tol, const quad::Options& opts)
{
    const auto& p = in.basis;
    const auto& wt = in.weight;
    auto inner = [&](const ScalarFunction& f, const ScalarFunction& g) {
        return quad::integrate([&](double u) { return f(u) * g(u) * wt(u); }, in.a, in.b, opts, in.breakpoints)
            .value;
    };

    std::array<double, 4> q{};
    for (int i = 0; i < 4; ++i) q[i] = inner(p[i], p[i]);
    for (int i = 0; i < 4; ++i)
        if (!(q[i] > 0.0)) throw Error(ErrorCode::OrthogonalityViolation, "basis function with zero norm");

    const std::array<std::pair<int, int>, 5> required = {{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {2, 3}}};
    for (auto [i, j] : required) {
        const double r = std::abs(inner(p[i], p[j])) / std::sqrt(q[i] * q[j]);
        if (r > ortho_tol) {
            std::ostringstream msg;
            msg << "<p" << i << ", p" << j << "> relative residual " << r;
            throw Error(ErrorCode::OrthogonalityViolation, msg.str());
        }
    }
    const double q13 = inner(p[1], p[3]);

    const Eigen::VectorXd probe = in.phi(in.a);
    if (R.rows() != probe.size() || R.cols() != probe.size())
        throw Error(ErrorCode::DimensionMismatch, "phi and R dimensions differ");

    const double lhs =
        quad::integrate([&](double u) { Eigen::VectorXd v = in.phi(u); return v.dot(R * v) * wt(u); }, in.a, in.b,
                        opts, in.breakpoints)
            .value;
    std::array<Eigen::VectorXd, 4> F;
    for (int i = 0; i < 4; ++i)
        F[i] = quad::integrate([&](double u) -> Eigen::VectorXd { return p[i](u) * wt(u) * in.phi(u); }, in.a, in.b,
                               opts, in.breakpoints)
                   .value;

    const Eigen::VectorXd corrected = F[3] - (q13 / q[1]) * F[1];
    const double rhs = form(F[0], R) / q[0] + form(F[1], R) / q[1] + form(F[2], R) / q[2] + form(corrected, R) / q[3];
    return lhs - rhs;
}

DoubleIntegralBounds lemma6_bounds(const VectorFunction& x, double a, double b, const Eigen::MatrixXd& R,
                                   const quad::Options& opts)
{
    if (!(b > a)) throw Error(ErrorCode::InvalidInterval, "requires b > a");
    const Eigen::VectorXd xa = x(a);
    const Eigen::VectorXd xb = x(b);
    if (R.rows() != xa.size() || R.cols() != xa.size())
        throw Error(ErrorCode::DimensionMismatch, "x and R dimensions differ");
    const double L = b - a;
    const Eigen::VectorXd single = quad::integrate(x, a, b, opts).value;
    // int_a^b int_s^b x(u) du ds = int_a^b (u - a) x(u) du
    const Eigen::VectorXd iterated =
        quad::integrate([&](double u) -> Eigen::VectorXd { return (u - a) * x(u); }, a, b, opts).value;

    const Eigen::VectorXd o5 = xb - single / L;
    const Eigen::VectorXd o6 = xb + (2.0 / L) * single - (6.0 / (L * L)) * iterated;
    const Eigen::VectorXd o7 = xa - single / L;
    const Eigen::VectorXd o8 = xa - (4.0 / L) * single + (6.0 / (L * L)) * iterated;
    return {-2.0 * form(o5, R) - 4.0 * form(o6, R), -2.0 * form(o7, R) - 4.0 * form(o8, R)};
}

} // namespace delaycert
