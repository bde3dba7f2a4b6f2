#pragma once

// Strict LMI feasibility through margin maximisation, and witness
// certification by dense eigenvalue checks.

#include "delaycert/lmi.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace delaycert {

enum class ConeKind { Psd, Linear };

/// One cone constraint  C - sum_i y_i A_i  in the PSD cone (or >= 0 entrywise).
struct ConeBlock {
    std::string name;
    ConeKind kind = ConeKind::Psd;
    Eigen::Index dim = 0;
    Eigen::MatrixXd constant;              ///< d x d, or d x 1 for linear blocks
    std::vector<int> vars;                 ///< indices into y with a nonzero coefficient
    std::vector<Eigen::MatrixXd> coeffs;   ///< same shapes as `constant`
};

/// max y[margin_index]  s.t. every block is in its cone.
/// y holds the registry scalars followed by the margin t.
struct ConicProblem {
    int num_decision = 0;
    int margin_index = 0;
    std::vector<ConeBlock> blocks;

    [[nodiscard]] int num_vars() const { return num_decision + 1; }
};

/// Each M(x) < 0 becomes -M(x) - tI >= 0, each M(x) > 0 becomes M(x) - tI >= 0,
/// diagonal positivity becomes entry - t >= 0, and the sum of traces of the
/// sign-constrained variables is capped at 1.
ConicProblem to_conic(const LmiSystem& system);

void write_conic_problem(std::ostream& out, const ConicProblem& problem);

struct SolverSettings {
    double tol = 1e-9;
    int max_iters = 120;
    double step_fraction = 0.98;
};

enum class SolverStatus { Optimal, NumericalFailure };

struct SdpSolution {
    SolverStatus status = SolverStatus::NumericalFailure;
    Eigen::VectorXd y;
    double primal_objective = 0.0;
    double dual_objective = 0.0;
    double primal_infeasibility = 0.0;
    double dual_infeasibility = 0.0;
    int iterations = 0;
};

/// Primal-dual path following on the standard primal/dual pair with the
/// HKM search direction and Mehrotra predictor-corrector steps.
SdpSolution solve_sdp(const ConicProblem& problem, const SolverSettings& settings = {});

enum class FeasibilityStatus { Feasible, Infeasible, NumericalFailure };

std::string_view to_string(FeasibilityStatus status);

inline constexpr double kMarginThreshold = 1e-7;
inline constexpr double kCertTol = 1e-6;

struct ConstraintCertificate {
    std::string name;
    Sense sense = Sense::NegativeDefinite;
    double extreme_eigenvalue = 0.0; ///< lambda_max for < 0, lambda_min for > 0
    double slack = 0.0;              ///< -lambda_max or lambda_min
};

struct Certification {
    std::vector<ConstraintCertificate> constraints;
    double min_slack = 0.0;
    bool strict = false; ///< every constraint holds strictly
    bool pass = false;
};

struct FeasibilityReport {
    FeasibilityStatus status = FeasibilityStatus::NumericalFailure;
    double margin = 0.0;
    std::optional<Eigen::VectorXd> witness;
    std::optional<Certification> certification;
    SdpSolution solver;
};

/// Solves the margin problem; status is Feasible iff the optimal margin
/// exceeds `margin_threshold`.
FeasibilityReport solve_feasibility(const ConicProblem& problem, const SolverSettings& settings = {},
                                    double margin_threshold = kMarginThreshold);

/// Symmetric eigenvalues from LAPACK (dsyevd), ascending.
Eigen::VectorXd lapack_eigenvalues(const Eigen::MatrixXd& m);

/// Dense evaluation of every constraint at `witness`. Passes when all hold
/// strictly and the smallest slack is at least `margin - cert_tol`.
Certification certify(const Eigen::VectorXd& witness, const LmiSystem& system, double cert_tol = kCertTol,
                      double claimed_margin = 0.0);

/// Smallest slack over all constraints at a valuation (no normalisation).
double valuation_margin(const Eigen::VectorXd& valuation, const LmiSystem& system);

/// to_conic + solve_feasibility + certify; a failed certification downgrades
/// a feasible verdict to NumericalFailure.
FeasibilityReport decide(const LmiSystem& system, const SolverSettings& settings = {},
                         double margin_threshold = kMarginThreshold, double cert_tol = kCertTol);

} // namespace delaycert
