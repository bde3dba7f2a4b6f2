#pragma once

// Symmetric matrix expressions affine in scalar decision variables.

#include <Eigen/Dense>

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace delaycert {

using VariableId = int;

enum class Structure { Symmetric, Diagonal, Full };

/// A matrix-valued decision variable whose free entries are scalar ids.
class MatrixVariable {
public:
    MatrixVariable() = default;
    MatrixVariable(std::string name, Structure structure, Eigen::Index size, VariableId first_id);

    [[nodiscard]] const std::string& name() const { return name_; }
    [[nodiscard]] Structure structure() const { return structure_; }
    [[nodiscard]] Eigen::Index size() const { return size_; }
    [[nodiscard]] VariableId first_id() const { return first_id_; }
    [[nodiscard]] int scalar_count() const;

    /// Entries (row, col) that the scalar `id` occupies with unit value.
    [[nodiscard]] std::vector<std::pair<Eigen::Index, Eigen::Index>> pattern(VariableId id) const;

    /// Dense value under a valuation of all registry scalars.
    [[nodiscard]] Eigen::MatrixXd value(const Eigen::VectorXd& valuation) const;

    /// Writes `m` (projected onto the structure) into the valuation.
    void assign(const Eigen::MatrixXd& m, Eigen::VectorXd& valuation) const;

private:
    std::string name_;
    Structure structure_ = Structure::Symmetric;
    Eigen::Index size_ = 0;
    VariableId first_id_ = 0;
};

class AffineSymmetricExpression {
public:
    AffineSymmetricExpression() = default;
    explicit AffineSymmetricExpression(Eigen::Index dim);

    [[nodiscard]] Eigen::Index dim() const { return dim_; }
    [[nodiscard]] const Eigen::MatrixXd& constant() const { return constant_; }
    [[nodiscard]] const std::map<VariableId, Eigen::MatrixXd>& terms() const { return terms_; }
    [[nodiscard]] bool is_homogeneous() const { return constant_.isZero(0.0); }

    /// Adds `coeff * x_id`; `coeff` must be symmetric.
    void add_term(VariableId id, const Eigen::MatrixXd& coeff);
    void add_constant(const Eigen::MatrixXd& c);

    /// left * X * left^T for symmetric or diagonal X.
    void add_congruence(const Eigen::MatrixXd& left, const MatrixVariable& X, double scale = 1.0);

    /// left * X * right^T + right * X^T * left^T for any X.
    void add_sym_product(const Eigen::MatrixXd& left, const MatrixVariable& X, const Eigen::MatrixXd& right,
                         double scale = 1.0);

    AffineSymmetricExpression& operator+=(const AffineSymmetricExpression& other);
    AffineSymmetricExpression& operator*=(double s);

    [[nodiscard]] Eigen::MatrixXd evaluate(const Eigen::VectorXd& valuation) const;

    /// Largest |C - C^T| over all stored matrices.
    [[nodiscard]] double asymmetry() const;

private:
    void accumulate(VariableId id, const Eigen::MatrixXd& coeff);

    Eigen::Index dim_ = 0;
    Eigen::MatrixXd constant_;
    std::map<VariableId, Eigen::MatrixXd> terms_;
};

AffineSymmetricExpression operator+(AffineSymmetricExpression lhs, const AffineSymmetricExpression& rhs);
AffineSymmetricExpression operator*(double s, AffineSymmetricExpression e);

} // namespace delaycert
