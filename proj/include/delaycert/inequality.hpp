#pragma once

// Weighted integral inequalities with an exponential weight and a
// discontinuous basis function, plus quadrature-driven checkers for them.

#include "delaycert/quadrature.hpp"

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <utility>

namespace delaycert {

/// Rates below this are rejected; the closed forms are 0/0 at k = 0.
inline constexpr double kRateFloor = 1e-9;

/// Closed forms lose roughly (k(b-a))^-4 in relative accuracy; below this value
/// of 2k(b-a) the coefficients come from convergent moment series instead.
inline constexpr double kSeriesSwitch = 0.5;

struct Interval {
    double a = 0.0;
    double b = 1.0;
    double k = 0.0;

    [[nodiscard]] double length() const { return b - a; }
};

/// Constants of the weighted basis {1, p1, p2, p3} on an interval.
///
/// p1(u) = (u-a) + c1, p2(u) = (u-a)^2 + c2 (u-a) + c3 and
/// p3(u) = 1 + c4 * [u <= split], orthogonal under weight(u) = exp(-2k(u-b)).
/// `split` is an absolute point in (a, b).
struct WeightedBasisCoefficients {
    double w = 1.0; ///< exp(2k(b-a)), not the weight function
    double c1 = 0.0, c2 = 0.0, c3 = 0.0, c4 = 0.0;
    double q0 = 0.0, q1 = 0.0, q2 = 0.0, q3 = 0.0;
    double q13 = 0.0;
    double split = 0.0;
    bool from_series = false; ///< true when the small-rate series path was used

    [[nodiscard]] double p1(const Interval& iv, double u) const { return (u - iv.a) + c1; }
    [[nodiscard]] double p2(const Interval& iv, double u) const
    {
        const double s = u - iv.a;
        return s * s + c2 * s + c3;
    }
    [[nodiscard]] double p3(double u) const { return u <= split ? 1.0 + c4 : 1.0; }
};

/// Orthogonality residuals, each normalised by the norms of the functions involved.
struct OrthogonalityResiduals {
    double p1_one = 0.0;
    double p2_one = 0.0;
    double p1_p2 = 0.0;
    double p2_split = 0.0;

    [[nodiscard]] double max() const;
};

inline constexpr double kDefaultQuadTol = 1e-9;

/// Root tolerance is relative to the interval length.
inline constexpr double kDefaultRootTol = 1e-12;

WeightedBasisCoefficients compute_coefficients(const Interval& iv, double quad_tol = kDefaultQuadTol,
                                               double root_tol = kDefaultRootTol);

/// Residuals of the orthogonality conditions evaluated with exact moment integrals.
OrthogonalityResiduals orthogonality_residuals(const Interval& iv, const WeightedBasisCoefficients& coeffs);

/// Exact weighted moments int_0^x s^j exp(2k(L - s)) ds for j = 0..4.
std::array<double, 5> weighted_moments(double length, double k, double x);

/// Unweighted iterated integrals of a vector function z on [a, b].
struct MomentVector {
    Eigen::VectorXd m0;      ///< int_a^b z
    Eigen::VectorXd m1;      ///< int_a^b int_s^b z(u) du ds
    Eigen::VectorXd m2;      ///< int_a^b int_s^b int_u^b z(v) dv du ds
    Eigen::VectorXd m_split; ///< int_a^split z

    [[nodiscard]] Eigen::Index dimension() const { return m0.size(); }
};

/// Builds the moments of z by adaptive quadrature. The iterated integrals are
/// reduced to single integrals with polynomial kernels.
MomentVector moments_by_quadrature(const std::function<Eigen::VectorXd(double)>& z, double a, double b,
                                   double split, const quad::Options& opts = {});

struct BoundTerms {
    Eigen::VectorXd omega0, omega1, omega2, omega3;
};

BoundTerms lemma4_terms(const MomentVector& moments, const WeightedBasisCoefficients& coeffs);

/// Lower bound on int_a^b exp(2k(u-b)) z^T R z du.
double lemma4_bound(const MomentVector& moments, const Eigen::MatrixXd& R, const WeightedBasisCoefficients& coeffs,
                    bool include_discontinuous_term = true);

/// Lower bound on int_a^b z^T R z du; `moments.m_split` must use the midpoint.
double lemma5_bound(const MomentVector& moments, const Eigen::MatrixXd& R, double length);

using ScalarFunction = std::function<double(double)>;
using VectorFunction = std::function<Eigen::VectorXd(double)>;

struct GapInput {
    VectorFunction phi;
    std::array<ScalarFunction, 4> basis; ///< p0 (== 1), p1, p2, p3
    ScalarFunction weight;
    double a = 0.0;
    double b = 1.0;
    std::vector<double> breakpoints; ///< discontinuities of the basis, if any
};

/// LHS - RHS of the generic four-function weighted inequality. Throws
/// OrthogonalityViolation when the basis is not orthogonal within `ortho_tol`
/// (relative to the basis norms).
double lemma2_gap(const GapInput& input, const Eigen::MatrixXd& R, double ortho_tol = 1e-8,
                  const quad::Options& opts = {});

struct DoubleIntegralBounds {
    double upper_bound_right;      ///< bounds -int_a^b int_s^b xdot^T R xdot du ds
    double upper_bound_left;       ///< bounds -int_a^b int_a^s xdot^T R xdot du ds
};

/// Upper bounds on the two negated double integrals of xdot^T R xdot.
DoubleIntegralBounds lemma6_bounds(const VectorFunction& x, double a, double b, const Eigen::MatrixXd& R,
                                   const quad::Options& opts = {});

} // namespace delaycert
