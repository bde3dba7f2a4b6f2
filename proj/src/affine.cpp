#include "delaycert/affine.hpp"

#include "delaycert/error.hpp"

namespace delaycert {

MatrixVariable::MatrixVariable(std::string name, Structure structure, Eigen::Index size, VariableId first_id)
    : name_(std::move(name)), structure_(structure), size_(size), first_id_(first_id)
{
}

int MatrixVariable::scalar_count() const
{
    const auto n = static_cast<int>(size_);
    switch (structure_) {
    case Structure::Symmetric: return n * (n + 1) / 2;
    case Structure::Diagonal: return n;
    case Structure::Full: return n * n;
    }
    return 0;
}

// Symmetric scalars are laid out column by column over the upper triangle.
std::vector<std::pair<Eigen::Index, Eigen::Index>> MatrixVariable::pattern(VariableId id) const
{
    int local = id - first_id_;
    if (local < 0 || local >= scalar_count()) throw Error(ErrorCode::IndexOutOfRange, "variable id outside " + name_);
    switch (structure_) {
    case Structure::Diagonal: return {{local, local}};
    case Structure::Full: return {{local / size_, local % size_}};
    case Structure::Symmetric: {
        Eigen::Index col = 0;
        while (local > col) {
            local -= static_cast<int>(col + 1);
            ++col;
        }
        const Eigen::Index row = local;
        if (row == col) return {{row, col}};
        return {{row, col}, {col, row}};
    }
    }
    return {};
}

Eigen::MatrixXd MatrixVariable::value(const Eigen::VectorXd& valuation) const
{
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(size_, size_);
    for (int i = 0; i < scalar_count(); ++i)
        for (auto [r, c] : pattern(first_id_ + i)) m(r, c) = valuation(first_id_ + i);
    return m;
}

void MatrixVariable::assign(const Eigen::MatrixXd& m, Eigen::VectorXd& valuation) const
{
    if (m.rows() != size_ || m.cols() != size_) throw Error(ErrorCode::DimensionMismatch, "assign to " + name_);
    for (int i = 0; i < scalar_count(); ++i) {
        const auto entries = pattern(first_id_ + i);
        double v = 0.0;
        for (auto [r, c] : entries) v += m(r, c);
        valuation(first_id_ + i) = v / static_cast<double>(entries.size());
    }
}

AffineSymmetricExpression::AffineSymmetricExpression(Eigen::Index dim)
    : dim_(dim), constant_(Eigen::MatrixXd::Zero(dim, dim))
{
}

void AffineSymmetricExpression::accumulate(VariableId id, const Eigen::MatrixXd& coeff)
{
    auto it = terms_.find(id);
    if (it == terms_.end())
        terms_.emplace(id, coeff);
    else
        it->second += coeff;
}

void AffineSymmetricExpression::add_term(VariableId id, const Eigen::MatrixXd& coeff)
{
    if (coeff.rows() != dim_ || coeff.cols() != dim_) throw Error(ErrorCode::DimensionMismatch, "term dimension");
    accumulate(id, 0.5 * (coeff + coeff.transpose()));
}

void AffineSymmetricExpression::add_constant(const Eigen::MatrixXd& c)
{
    if (c.rows() != dim_ || c.cols() != dim_) throw Error(ErrorCode::DimensionMismatch, "constant dimension");
    constant_ += 0.5 * (c + c.transpose());
}

void AffineSymmetricExpression::add_congruence(const Eigen::MatrixXd& left, const MatrixVariable& X, double scale)
{
    if (X.structure() == Structure::Full)
        throw Error(ErrorCode::DimensionMismatch, "congruence needs a symmetric variable");
    if (left.rows() != dim_ || left.cols() != X.size()) throw Error(ErrorCode::DimensionMismatch, "congruence shape");
    for (int i = 0; i < X.scalar_count(); ++i) {
        const VariableId id = X.first_id() + i;
        Eigen::MatrixXd coeff = Eigen::MatrixXd::Zero(dim_, dim_);
        for (auto [r, c] : X.pattern(id)) coeff.noalias() += left.col(r) * left.col(c).transpose();
        if (!coeff.isZero(0.0)) accumulate(id, scale * coeff);
    }
}

void AffineSymmetricExpression::add_sym_product(const Eigen::MatrixXd& left, const MatrixVariable& X,
                                                const Eigen::MatrixXd& right, double scale)
{
    if (left.rows() != dim_ || right.rows() != dim_ || left.cols() != X.size() || right.cols() != X.size())
        throw Error(ErrorCode::DimensionMismatch, "sym product shape");
    for (int i = 0; i < X.scalar_count(); ++i) {
        const VariableId id = X.first_id() + i;
        Eigen::MatrixXd half = Eigen::MatrixXd::Zero(dim_, dim_);
        for (auto [r, c] : X.pattern(id)) half.noalias() += left.col(r) * right.col(c).transpose();
        Eigen::MatrixXd coeff = half + half.transpose();
        if (!coeff.isZero(0.0)) accumulate(id, scale * coeff);
    }
}

AffineSymmetricExpression& AffineSymmetricExpression::operator+=(const AffineSymmetricExpression& other)
{
    if (other.dim_ != dim_) throw Error(ErrorCode::DimensionMismatch, "sum of expressions");
    constant_ += other.constant_;
    for (const auto& [id, coeff] : other.terms_) accumulate(id, coeff);
    return *this;
}

AffineSymmetricExpression& AffineSymmetricExpression::operator*=(double s)
{
    constant_ *= s;
    for (auto& [id, coeff] : terms_) coeff *= s;
    return *this;
}

Eigen::MatrixXd AffineSymmetricExpression::evaluate(const Eigen::VectorXd& valuation) const
{
    Eigen::MatrixXd out = constant_;
    for (const auto& [id, coeff] : terms_) {
        if (id < 0 || id >= valuation.size()) throw Error(ErrorCode::DimensionMismatch, "valuation too short");
        out.noalias() += valuation(id) * coeff;
    }
    return out;
}

double AffineSymmetricExpression::asymmetry() const
{
    if (dim_ == 0) return 0.0;
    double worst = (constant_ - constant_.transpose()).cwiseAbs().maxCoeff();
    for (const auto& [id, coeff] : terms_) worst = std::max(worst, (coeff - coeff.transpose()).cwiseAbs().maxCoeff());
    return worst;
}

AffineSymmetricExpression operator+(AffineSymmetricExpression lhs, const AffineSymmetricExpression& rhs)
{
    lhs += rhs;
    return lhs;
}

AffineSymmetricExpression operator*(double s, AffineSymmetricExpression e)
{
    e *= s;
    return e;
}

} // namespace delaycert
