#include "delaycert/sdp.hpp"

#include "delaycert/error.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace delaycert {

std::string_view to_string(FeasibilityStatus status)
{
    switch (status) {
    case FeasibilityStatus::Feasible: return "feasible";
    case FeasibilityStatus::Infeasible: return "infeasible";
    case FeasibilityStatus::NumericalFailure: return "numerical-failure";
    }
    return "unknown";
}

ConicProblem to_conic(const LmiSystem& system)
{
    const int m = system.registry.count();
    if (m == 0 || system.constraints.empty()) throw Error(ErrorCode::EmptyProblem, "no decision variables");

    ConicProblem problem;
    problem.num_decision = m;
    problem.margin_index = m;

    for (const auto& con : system.constraints) {
        if (!con.expr.is_homogeneous()) throw Error(ErrorCode::NonHomogeneous, con.name + " has a constant term");
        const Eigen::Index d = con.expr.dim();
        // Z = C - sum y_i A_i: a "< 0" constraint uses A_i = F_i, a "> 0" one A_i = -F_i.
        const double sign = con.sense == Sense::NegativeDefinite ? 1.0 : -1.0;
        ConeBlock block;
        block.name = con.name;
        block.dim = d;
        if (con.entrywise) {
            block.kind = ConeKind::Linear;
            block.constant = Eigen::MatrixXd::Zero(d, 1);
            for (const auto& [id, coeff] : con.expr.terms()) {
                block.vars.push_back(id);
                block.coeffs.emplace_back(sign * coeff.diagonal());
            }
            block.vars.push_back(problem.margin_index);
            block.coeffs.emplace_back(Eigen::MatrixXd::Ones(d, 1));
        } else {
            block.kind = ConeKind::Psd;
            block.constant = Eigen::MatrixXd::Zero(d, d);
            for (const auto& [id, coeff] : con.expr.terms()) {
                block.vars.push_back(id);
                block.coeffs.emplace_back(sign * coeff);
            }
            block.vars.push_back(problem.margin_index);
            block.coeffs.emplace_back(Eigen::MatrixXd::Identity(d, d));
        }
        problem.blocks.push_back(std::move(block));
    }

    // sum of traces of sign-constrained variables <= 1
    ConeBlock norm;
    norm.name = "normalization";
    norm.kind = ConeKind::Linear;
    norm.dim = 1;
    norm.constant = Eigen::MatrixXd::Ones(1, 1);
    for (const auto* v : system.registry.sign_constrained()) {
        for (int i = 0; i < v->scalar_count(); ++i) {
            const VariableId id = v->first_id() + i;
            const auto pattern = v->pattern(id);
            if (pattern.size() == 1 && pattern[0].first == pattern[0].second) {
                norm.vars.push_back(id);
                norm.coeffs.emplace_back(Eigen::MatrixXd::Ones(1, 1));
            }
        }
    }
    problem.blocks.push_back(std::move(norm));
    return problem;
}

void write_conic_problem(std::ostream& out, const ConicProblem& problem)
{
    const auto old_precision = out.precision(17);
    out << "delaycert-conic 1\n";
    out << "variables " << problem.num_vars() << "\nmargin_var " << problem.margin_index << "\n";
    out << "objective maximize " << problem.margin_index << "\n";
    out << "blocks " << problem.blocks.size() << "\n";
    for (std::size_t b = 0; b < problem.blocks.size(); ++b) {
        const auto& blk = problem.blocks[b];
        out << "block " << b << " " << blk.name << " " << (blk.kind == ConeKind::Psd ? "psd" : "linear") << " "
            << blk.dim << "\n";
    }
    // var -1 marks the constant term; the block reads C - sum_i y_i A_i.
    auto emit = [&out](std::size_t b, int var, const ConeBlock& blk, const Eigen::MatrixXd& mat) {
        if (blk.kind == ConeKind::Linear) {
            for (Eigen::Index r = 0; r < mat.rows(); ++r)
                if (mat(r, 0) != 0.0) out << b << " " << var << " " << r << " " << r << " " << mat(r, 0) << "\n";
            return;
        }
        for (Eigen::Index c = 0; c < mat.cols(); ++c)
            for (Eigen::Index r = 0; r <= c; ++r)
                if (mat(r, c) != 0.0) out << b << " " << var << " " << r << " " << c << " " << mat(r, c) << "\n";
    };
    out << "records\n";
    for (std::size_t b = 0; b < problem.blocks.size(); ++b) {
        const auto& blk = problem.blocks[b];
        emit(b, -1, blk, blk.constant);
        for (std::size_t j = 0; j < blk.vars.size(); ++j) emit(b, blk.vars[j], blk, blk.coeffs[j]);
    }
    out.precision(old_precision);
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd symmetrize(const MatrixXd& m) { return 0.5 * (m + m.transpose()); }

double inner(const MatrixXd& a, const MatrixXd& b) { return (a.array() * b.array()).sum(); }

struct Entry {
    Eigen::Index r, c;
    double v;
};

// Per-block iterate and factorizations.
struct BlockIterate {
    MatrixXd X, Z;
    MatrixXd Lx, Lz; // lower Cholesky factors (PSD blocks)
    MatrixXd Zinv;   // PSD: Z^{-1}; linear: 1 / z
};

class InteriorPoint {
public:
    InteriorPoint(const ConicProblem& p, const SolverSettings& s) : p_(p), s_(s), m_(p.num_vars())
    {
        b_ = VectorXd::Zero(m_);
        b_(p.margin_index) = 1.0;
        total_dim_ = 0;
        for (const auto& blk : p.blocks) total_dim_ += static_cast<double>(blk.dim);
        sparse_.resize(p.blocks.size());
        rows_.resize(p.blocks.size());
        row_blocks_.resize(p.blocks.size());
        for (std::size_t b = 0; b < p.blocks.size(); ++b) {
            const auto& blk = p.blocks[b];
            if (blk.kind != ConeKind::Psd) continue;
            for (const auto& coeff : blk.coeffs) {
                std::vector<Entry> list;
                for (Eigen::Index c = 0; c < coeff.cols(); ++c)
                    for (Eigen::Index r = 0; r < coeff.rows(); ++r)
                        if (coeff(r, c) != 0.0) list.push_back({r, c, coeff(r, c)});
                sparse_[b].push_back(std::move(list));
                std::vector<Eigen::Index> rows;
                for (Eigen::Index r = 0; r < coeff.rows(); ++r)
                    if ((coeff.row(r).array() != 0.0).any()) rows.push_back(r);
                MatrixXd reduced(static_cast<Eigen::Index>(rows.size()), coeff.cols());
                for (std::size_t r = 0; r < rows.size(); ++r) reduced.row(static_cast<Eigen::Index>(r)) = coeff.row(rows[r]);
                rows_[b].push_back(std::move(rows));
                row_blocks_[b].push_back(std::move(reduced));
            }
        }
    }

    SdpSolution run();

private:
    VectorXd apply_a(const std::vector<MatrixXd>& X) const
    {
        VectorXd out = VectorXd::Zero(m_);
        for (std::size_t b = 0; b < p_.blocks.size(); ++b) {
            const auto& blk = p_.blocks[b];
            for (std::size_t j = 0; j < blk.vars.size(); ++j) out(blk.vars[j]) += inner(blk.coeffs[j], X[b]);
        }
        return out;
    }

    MatrixXd apply_at(std::size_t b, const VectorXd& y) const
    {
        const auto& blk = p_.blocks[b];
        MatrixXd out = MatrixXd::Zero(blk.constant.rows(), blk.constant.cols());
        for (std::size_t j = 0; j < blk.vars.size(); ++j) out.noalias() += y(blk.vars[j]) * blk.coeffs[j];
        return out;
    }

    bool factor();
    bool build_schur();
    void direction(const std::vector<MatrixXd>& Rc, std::vector<MatrixXd>& dX, VectorXd& dy,
                   std::vector<MatrixXd>& dZ) const;
    double max_step(std::size_t b, const MatrixXd& V, const MatrixXd& dV, bool primal) const;

    const ConicProblem& p_;
    SolverSettings s_;
    int m_;
    VectorXd b_;
    double total_dim_;
    std::vector<std::vector<std::vector<Entry>>> sparse_;
    std::vector<std::vector<std::vector<Eigen::Index>>> rows_; // nonzero rows of each coefficient
    std::vector<std::vector<MatrixXd>> row_blocks_;            // those rows, gathered

    std::vector<BlockIterate> it_;
    VectorXd y_;
    VectorXd Rp_;
    std::vector<MatrixXd> Rd_;
    MatrixXd schur_;
    MatrixXd schur_raw_;
    Eigen::LLT<MatrixXd> schur_llt_;
};

bool InteriorPoint::factor()
{
    for (std::size_t b = 0; b < p_.blocks.size(); ++b) {
        auto& st = it_[b];
        if (p_.blocks[b].kind == ConeKind::Linear) {
            if ((st.X.array() <= 0.0).any() || (st.Z.array() <= 0.0).any()) return false;
            st.Zinv = st.Z.cwiseInverse();
            continue;
        }
        Eigen::LLT<MatrixXd> lx(st.X);
        Eigen::LLT<MatrixXd> lz(st.Z);
        if (lx.info() != Eigen::Success || lz.info() != Eigen::Success) return false;
        st.Lx = lx.matrixL();
        st.Lz = lz.matrixL();
        st.Zinv = lz.solve(MatrixXd::Identity(st.Z.rows(), st.Z.cols()));
        st.Zinv = symmetrize(st.Zinv);
    }
    return true;
}

// M_ij = sum_b tr(A_i X A_j Z^{-1}). The coefficients are very sparse, so
// W_j = X A_j Z^{-1} is built from rank-one pieces and M_ij read off A_i's entries.
bool InteriorPoint::build_schur()
{
    schur_ = MatrixXd::Zero(m_, m_);
    for (std::size_t b = 0; b < p_.blocks.size(); ++b) {
        const auto& blk = p_.blocks[b];
        const auto& st = it_[b];
        const auto k = static_cast<Eigen::Index>(blk.vars.size());
        MatrixXd local = MatrixXd::Zero(k, k);
        if (blk.kind == ConeKind::Linear) {
            MatrixXd G(blk.dim, k);
            const VectorXd scale = (st.X.array() * st.Zinv.array()).sqrt().matrix();
            for (Eigen::Index j = 0; j < k; ++j) G.col(j) = blk.coeffs[j].col(0).cwiseProduct(scale);
            local.selfadjointView<Eigen::Lower>().rankUpdate(G.transpose());
        } else {
            const auto& entries = sparse_[b];
            MatrixXd W(blk.dim, blk.dim), V, Xr;
            for (Eigen::Index j = 0; j < k; ++j) {
                const auto& rows = rows_[b][j];
                const auto nr = static_cast<Eigen::Index>(rows.size());
                V.noalias() = row_blocks_[b][j] * st.Zinv;
                Xr.resize(blk.dim, nr);
                for (Eigen::Index r = 0; r < nr; ++r) Xr.col(r) = st.X.col(rows[r]);
                W.noalias() = Xr * V;
                for (Eigen::Index i = j; i < k; ++i) {
                    double acc = 0.0;
                    for (const auto& e : entries[i]) acc += e.v * W(e.r, e.c);
                    local(i, j) = acc;
                }
            }
        }
        for (Eigen::Index i = 0; i < k; ++i)
            for (Eigen::Index j = 0; j <= i; ++j) {
                const double v = local(i, j);
                schur_(blk.vars[i], blk.vars[j]) += v;
                if (i != j) schur_(blk.vars[j], blk.vars[i]) += v;
            }
    }
    schur_raw_ = schur_;
    double diag_max = schur_.diagonal().cwiseAbs().maxCoeff();
    if (!std::isfinite(diag_max)) return false;
    double shift = 0.0;
    for (int attempt = 0; attempt < 6; ++attempt) {
        schur_llt_.compute(schur_);
        if (schur_llt_.info() == Eigen::Success) return true;
        shift = shift == 0.0 ? 1e-14 * std::max(diag_max, 1.0) : shift * 100.0;
        schur_.diagonal().array() += shift;
    }
    return false;
}

void InteriorPoint::direction(const std::vector<MatrixXd>& Rc, std::vector<MatrixXd>& dX, VectorXd& dy,
                              std::vector<MatrixXd>& dZ) const
{
    const std::size_t nb = p_.blocks.size();
    std::vector<MatrixXd> T(nb);
    for (std::size_t b = 0; b < nb; ++b) {
        const auto& st = it_[b];
        if (p_.blocks[b].kind == ConeKind::Linear)
            T[b] = Rc[b] - st.X.cwiseProduct(Rd_[b]).cwiseProduct(st.Zinv);
        else
            T[b] = Rc[b] - symmetrize(st.X * Rd_[b] * st.Zinv);
    }
    const VectorXd rhs = Rp_ - apply_a(T);
    dy = schur_llt_.solve(rhs);
    for (int r = 0; r < 2; ++r) dy += schur_llt_.solve(rhs - schur_raw_ * dy);
    dX.resize(nb);
    dZ.resize(nb);
    for (std::size_t b = 0; b < nb; ++b) {
        const auto& st = it_[b];
        dZ[b] = Rd_[b] - apply_at(b, dy);
        if (p_.blocks[b].kind == ConeKind::Linear)
            dX[b] = Rc[b] - st.X.cwiseProduct(dZ[b]).cwiseProduct(st.Zinv);
        else
            dX[b] = Rc[b] - symmetrize(st.X * dZ[b] * st.Zinv);
    }
}

double InteriorPoint::max_step(std::size_t b, const MatrixXd& V, const MatrixXd& dV, bool primal) const
{
    constexpr double kInf = std::numeric_limits<double>::infinity();
    if (p_.blocks[b].kind == ConeKind::Linear) {
        double step = kInf;
        for (Eigen::Index i = 0; i < V.rows(); ++i)
            if (dV(i, 0) < 0.0) step = std::min(step, -V(i, 0) / dV(i, 0));
        return step;
    }
    const MatrixXd& L = primal ? it_[b].Lx : it_[b].Lz;
    MatrixXd W = dV;
    L.triangularView<Eigen::Lower>().solveInPlace(W);
    W.transposeInPlace();
    L.triangularView<Eigen::Lower>().solveInPlace(W);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrize(W), Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff();
    return lmin < 0.0 ? -1.0 / lmin : kInf;
}

SdpSolution InteriorPoint::run()
{
    const std::size_t nb = p_.blocks.size();
    it_.assign(nb, {});
    Rd_.resize(nb);
    y_ = VectorXd::Zero(m_);

    double c_norm = 0.0;
    for (std::size_t b = 0; b < nb; ++b) {
        const auto& blk = p_.blocks[b];
        double a_norm = 0.0;
        for (const auto& c : blk.coeffs) a_norm = std::max(a_norm, c.norm());
        c_norm = std::max(c_norm, blk.constant.norm());
        const double d = static_cast<double>(blk.dim);
        const double xi = std::max(10.0, std::sqrt(d));
        const double eta = std::max({10.0, std::sqrt(d), a_norm, blk.constant.norm()});
        if (blk.kind == ConeKind::Linear) {
            it_[b].X = MatrixXd::Constant(blk.dim, 1, xi);
            it_[b].Z = MatrixXd::Constant(blk.dim, 1, eta);
        } else {
            it_[b].X = xi * MatrixXd::Identity(blk.dim, blk.dim);
            it_[b].Z = eta * MatrixXd::Identity(blk.dim, blk.dim);
        }
    }

    SdpSolution sol;
    auto snapshot = [&](SolverStatus status, int iter) {
        sol.status = status;
        sol.y = y_;
        sol.iterations = iter;
        return sol;
    };

    // Fallback when the final digits are lost to ill-conditioning.
    constexpr double kAcceptable = 1e-6;
    double best_merit = std::numeric_limits<double>::infinity();
    SdpSolution best;
    int since_best = 0;

    for (int iter = 0; iter <= s_.max_iters; ++iter) {
        std::vector<MatrixXd> X(nb);
        for (std::size_t b = 0; b < nb; ++b) X[b] = it_[b].X;
        Rp_ = b_ - apply_a(X);
        double rd_norm = 0.0, gap_xz = 0.0, pobj = 0.0;
        for (std::size_t b = 0; b < nb; ++b) {
            Rd_[b] = p_.blocks[b].constant - it_[b].Z - apply_at(b, y_);
            rd_norm = std::max(rd_norm, Rd_[b].norm());
            gap_xz += inner(it_[b].X, it_[b].Z);
            pobj += inner(p_.blocks[b].constant, it_[b].X);
        }
        const double dobj = b_.dot(y_);
        const double mu = gap_xz / total_dim_;
        sol.primal_objective = pobj;
        sol.dual_objective = dobj;
        sol.primal_infeasibility = Rp_.norm() / (1.0 + b_.norm());
        sol.dual_infeasibility = rd_norm / (1.0 + c_norm);
        const double rel_gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
        const double complementarity = gap_xz / (1.0 + std::abs(pobj) + std::abs(dobj));
        if (sol.primal_infeasibility < s_.tol && sol.dual_infeasibility < s_.tol && rel_gap < s_.tol &&
            complementarity < s_.tol)
            return snapshot(SolverStatus::Optimal, iter);
        const double merit = std::max({sol.primal_infeasibility, sol.dual_infeasibility, rel_gap});
        if (merit < best_merit) {
            best_merit = merit;
            best = snapshot(SolverStatus::Optimal, iter);
            since_best = 0;
        } else if (++since_best >= 8) {
            break;
        }
        if (iter == s_.max_iters) break;
        if (!std::isfinite(mu) || !factor() || !build_schur()) break;

        // predictor
        std::vector<MatrixXd> Rc(nb), dXp, dZp, dX, dZ;
        VectorXd dyp, dy;
        for (std::size_t b = 0; b < nb; ++b) Rc[b] = -it_[b].X;
        direction(Rc, dXp, dyp, dZp);
        double ap = 1.0, ad = 1.0;
        for (std::size_t b = 0; b < nb; ++b) {
            ap = std::min(ap, max_step(b, it_[b].X, dXp[b], true));
            ad = std::min(ad, max_step(b, it_[b].Z, dZp[b], false));
        }
        double mu_aff = 0.0;
        for (std::size_t b = 0; b < nb; ++b)
            mu_aff += inner(it_[b].X + ap * dXp[b], it_[b].Z + ad * dZp[b]);
        mu_aff /= total_dim_;
        const double sigma = std::clamp(std::pow(mu_aff / mu, 3.0), 0.0, 1.0);

        // corrector
        for (std::size_t b = 0; b < nb; ++b) {
            const auto& st = it_[b];
            if (p_.blocks[b].kind == ConeKind::Linear)
                Rc[b] = (sigma * mu) * st.Zinv - st.X - dXp[b].cwiseProduct(dZp[b]).cwiseProduct(st.Zinv);
            else
                Rc[b] = (sigma * mu) * st.Zinv - st.X - symmetrize(dXp[b] * dZp[b] * st.Zinv);
        }
        direction(Rc, dX, dy, dZ);
        double amax_p = std::numeric_limits<double>::infinity(), amax_d = amax_p;
        for (std::size_t b = 0; b < nb; ++b) {
            amax_p = std::min(amax_p, max_step(b, it_[b].X, dX[b], true));
            amax_d = std::min(amax_d, max_step(b, it_[b].Z, dZ[b], false));
        }
        ap = std::min(1.0, s_.step_fraction * amax_p);
        ad = std::min(1.0, s_.step_fraction * amax_d);
        if (!(ap > 0.0 && ad > 0.0)) break;

        for (std::size_t b = 0; b < nb; ++b) {
            it_[b].X += ap * dX[b];
            it_[b].Z += ad * dZ[b];
            if (p_.blocks[b].kind == ConeKind::Psd) {
                it_[b].X = symmetrize(it_[b].X);
                it_[b].Z = symmetrize(it_[b].Z);
            }
        }
        y_ += ad * dy;
        sol.iterations = iter + 1;
    }
    if (best_merit < kAcceptable) return best;
    return snapshot(SolverStatus::NumericalFailure, sol.iterations);
}

} // namespace

SdpSolution solve_sdp(const ConicProblem& problem, const SolverSettings& settings)
{
    if (problem.num_decision == 0 || problem.blocks.empty())
        throw Error(ErrorCode::EmptyProblem, "nothing to solve");
    InteriorPoint ip(problem, settings);
    return ip.run();
}

FeasibilityReport solve_feasibility(const ConicProblem& problem, const SolverSettings& settings,
                                    double margin_threshold)
{
    FeasibilityReport report;
    report.solver = solve_sdp(problem, settings);
    if (report.solver.status != SolverStatus::Optimal) {
        report.status = FeasibilityStatus::NumericalFailure;
        return report;
    }
    report.margin = report.solver.y(problem.margin_index);
    if (report.margin > margin_threshold) {
        report.status = FeasibilityStatus::Feasible;
        report.witness = report.solver.y.head(problem.num_decision);
    } else {
        report.status = FeasibilityStatus::Infeasible;
    }
    return report;
}

Eigen::VectorXd lapack_eigenvalues(const Eigen::MatrixXd& m)
{
    const auto n = static_cast<lapack_int>(m.rows());
    if (m.rows() != m.cols()) throw Error(ErrorCode::DimensionMismatch, "eigenvalues of a non-square matrix");
    Eigen::VectorXd w(n);
    if (n == 0) return w;
    Eigen::MatrixXd a = symmetrize(m);
    const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'N', 'L', n, a.data(), n, w.data());
    if (info != 0) throw Error(ErrorCode::NumericalFailure, "dsyevd failed with info " + std::to_string(info));
    return w;
}

Certification certify(const Eigen::VectorXd& witness, const LmiSystem& system, double cert_tol,
                      double claimed_margin)
{
    if (witness.size() != system.registry.count())
        throw Error(ErrorCode::DimensionMismatch, "witness does not match the registry");
    Certification cert;
    cert.min_slack = std::numeric_limits<double>::infinity();
    for (const auto& con : system.constraints) {
        const Eigen::VectorXd eig = lapack_eigenvalues(con.expr.evaluate(witness));
        ConstraintCertificate c;
        c.name = con.name;
        c.sense = con.sense;
        if (con.sense == Sense::NegativeDefinite) {
            c.extreme_eigenvalue = eig.maxCoeff();
            c.slack = -c.extreme_eigenvalue;
        } else {
            c.extreme_eigenvalue = eig.minCoeff();
            c.slack = c.extreme_eigenvalue;
        }
        cert.min_slack = std::min(cert.min_slack, c.slack);
        cert.constraints.push_back(std::move(c));
    }
    cert.strict = cert.min_slack > 0.0;
    cert.pass = cert.strict && cert.min_slack >= claimed_margin - cert_tol;
    return cert;
}

double valuation_margin(const Eigen::VectorXd& valuation, const LmiSystem& system)
{
    return certify(valuation, system, 0.0, 0.0).min_slack;
}

FeasibilityReport decide(const LmiSystem& system, const SolverSettings& settings, double margin_threshold,
                         double cert_tol)
{
    const ConicProblem problem = to_conic(system);
    FeasibilityReport report = solve_feasibility(problem, settings, margin_threshold);
    if (report.status == FeasibilityStatus::Feasible) {
        report.certification = certify(*report.witness, system, cert_tol, report.margin);
        if (!report.certification->pass) report.status = FeasibilityStatus::NumericalFailure;
    }
    return report;
}

} // namespace delaycert
