#pragma once

// Decision variables and matrix inequalities of the delay-dependent
// exponential stability criterion.

#include "delaycert/affine.hpp"
#include "delaycert/inequality.hpp"
#include "delaycert/model.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace delaycert {

/// Number of blocks in the augmented state vector.
inline constexpr int kAugmentedBlocks = 12;

/// 12n x n block column with the identity in block `index` (1-based).
Eigen::MatrixXd selector(int index, Eigen::Index n);

/// 12n x n matrix whose transpose maps the augmented vector to zdot.
Eigen::MatrixXd build_es(const NetworkModel& model);

struct DecisionRegistry {
    Eigen::Index n = 0;
    MatrixVariable P, Q, U1, U2, U3, Z1, Z2, Z3, N1, N2, M1, M2, D1, D2, R1, R2, S;

    [[nodiscard]] int count() const;
    [[nodiscard]] std::vector<const MatrixVariable*> all() const;
    /// Variables that must be positive definite (or entrywise positive for diagonals).
    [[nodiscard]] std::vector<const MatrixVariable*> sign_constrained() const;
    [[nodiscard]] const MatrixVariable* find(const std::string& name) const;
};

DecisionRegistry declare_decision_variables(Eigen::Index n);

enum class Sense { NegativeDefinite, PositiveDefinite };

struct LmiConstraint {
    std::string name;
    AffineSymmetricExpression expr;
    Sense sense = Sense::NegativeDefinite;
    bool entrywise = false; ///< expression is diagonal; positivity applies per entry
};

/// The individually named pieces of Phi, Theta_1, Theta_2 and Gamma.
struct TheoremBlocks {
    AffineSymmetricExpression xi1, xi2, xi3, xi4, xi5, psi, pi, theta1, theta2, gamma;

    [[nodiscard]] AffineSymmetricExpression phi() const;
};

struct AssemblyOptions {
    SplitReading split_reading = SplitReading::FromIntervalEnd;
    /// The discontinuous-basis row carries (q13/q1) e6. With this set the e6
    /// term is scaled by h instead, since int_{t-h}^t z equals h e6.
    bool scale_mean_term_by_h = false;
};

struct LmiSystem {
    DecisionRegistry registry;
    std::vector<LmiConstraint> constraints;
    NetworkModel model;
    AnalysisParams params;
    WeightedBasisCoefficients coeffs;
    double xi_delay = 0.0;

    [[nodiscard]] const LmiConstraint* find(const std::string& name) const;
};

/// Delay offset used for z(t - xi) given coefficients on [0, h].
double split_delay(const WeightedBasisCoefficients& coeffs, double h, SplitReading reading);

TheoremBlocks build_theorem_blocks(const NetworkModel& model, const AnalysisParams& params,
                                   const WeightedBasisCoefficients& coeffs, const DecisionRegistry& registry,
                                   const AssemblyOptions& options = {});

/// `coeffs` must be computed on [0, h] with rate k.
LmiSystem build_theorem_lmis(const NetworkModel& model, const AnalysisParams& params,
                             const WeightedBasisCoefficients& coeffs, const AssemblyOptions& options = {});

/// Convenience: computes the coefficients on [0, h] and assembles.
LmiSystem build_theorem_lmis(const NetworkModel& model, const AnalysisParams& params,
                             const AssemblyOptions& options = {});

struct OvershootReport {
    double lambda = 0.0;  ///< bound constant on V(z(0)) / ||phi||^2
    double H = 0.0;       ///< sqrt(lambda / lambda_min(P))
    double lambda_min_P = 0.0;
    std::vector<std::pair<std::string, double>> terms;
};

OvershootReport compute_overshoot(const DecisionRegistry& registry, const Eigen::VectorXd& valuation,
                                  const NetworkModel& model, const AnalysisParams& params);

/// Sparse coefficient interchange format; see README for the layout.
void write_lmi_system(std::ostream& out, const LmiSystem& system);

} // namespace delaycert
