#include "delaycert/lmi.hpp"

#include "delaycert/error.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

namespace delaycert {

Eigen::MatrixXd selector(int index, Eigen::Index n)
{
    if (index < 1 || index > kAugmentedBlocks)
        throw Error(ErrorCode::IndexOutOfRange, "selector index " + std::to_string(index) + " outside 1..12");
    Eigen::MatrixXd e = Eigen::MatrixXd::Zero(kAugmentedBlocks * n, n);
    e.block((index - 1) * n, 0, n, n).setIdentity();
    return e;
}

Eigen::MatrixXd build_es(const NetworkModel& model)
{
    model.validate();
    const auto n = model.dimension();
    return -selector(1, n) * model.C.transpose() + selector(4, n) * model.A.transpose() +
           selector(5, n) * model.B.transpose();
}

int DecisionRegistry::count() const
{
    int total = 0;
    for (const auto* v : all()) total += v->scalar_count();
    return total;
}

std::vector<const MatrixVariable*> DecisionRegistry::all() const
{
    return {&P, &Q, &U1, &U2, &U3, &Z1, &Z2, &Z3, &N1, &N2, &M1, &M2, &D1, &D2, &R1, &R2, &S};
}

std::vector<const MatrixVariable*> DecisionRegistry::sign_constrained() const
{
    return {&P, &Q, &U1, &U2, &U3, &Z1, &Z2, &Z3, &N1, &N2, &M1, &M2, &D1, &D2, &R1, &R2};
}

const MatrixVariable* DecisionRegistry::find(const std::string& name) const
{
    for (const auto* v : all())
        if (v->name() == name) return v;
    return nullptr;
}

DecisionRegistry declare_decision_variables(Eigen::Index n)
{
    if (n < 1) throw Error(ErrorCode::DimensionMismatch, "dimension must be at least 1");
    DecisionRegistry r;
    r.n = n;
    VariableId next = 0;
    auto make = [&next](const std::string& name, Structure s, Eigen::Index size) {
        MatrixVariable v(name, s, size, next);
        next += v.scalar_count();
        return v;
    };
    r.P = make("P", Structure::Symmetric, 3 * n);
    r.Q = make("Q", Structure::Symmetric, 2 * n);
    r.U1 = make("U1", Structure::Symmetric, n);
    r.U2 = make("U2", Structure::Symmetric, n);
    r.U3 = make("U3", Structure::Symmetric, n);
    r.Z1 = make("Z1", Structure::Symmetric, n);
    r.Z2 = make("Z2", Structure::Symmetric, n);
    r.Z3 = make("Z3", Structure::Symmetric, n);
    r.N1 = make("N1", Structure::Symmetric, n);
    r.N2 = make("N2", Structure::Symmetric, n);
    r.M1 = make("M1", Structure::Symmetric, n);
    r.M2 = make("M2", Structure::Symmetric, n);
    r.D1 = make("D1", Structure::Diagonal, n);
    r.D2 = make("D2", Structure::Diagonal, n);
    r.R1 = make("R1", Structure::Diagonal, n);
    r.R2 = make("R2", Structure::Diagonal, n);
    r.S = make("S", Structure::Full, 3 * n);
    return r;
}

AffineSymmetricExpression TheoremBlocks::phi() const
{
    AffineSymmetricExpression out = xi1;
    out += xi2;
    out += xi3;
    out += xi4;
    out += xi5;
    out += psi;
    out += pi;
    return out;
}

const LmiConstraint* LmiSystem::find(const std::string& name) const
{
    for (const auto& c : constraints)
        if (c.name == name) return &c;
    return nullptr;
}

double split_delay(const WeightedBasisCoefficients& coeffs, double h, SplitReading reading)
{
    return reading == SplitReading::FromIntervalEnd ? h - coeffs.split : coeffs.split;
}

namespace {

Eigen::MatrixXd hcat(std::initializer_list<Eigen::MatrixXd> parts)
{
    Eigen::Index cols = 0;
    Eigen::Index rows = parts.begin()->rows();
    for (const auto& p : parts) cols += p.cols();
    Eigen::MatrixXd out(rows, cols);
    Eigen::Index at = 0;
    for (const auto& p : parts) {
        out.middleCols(at, p.cols()) = p;
        at += p.cols();
    }
    return out;
}

} // namespace

TheoremBlocks build_theorem_blocks(const NetworkModel& model, const AnalysisParams& params,
                                   const WeightedBasisCoefficients& cf, const DecisionRegistry& reg,
                                   const AssemblyOptions& options)
{
    model.validate();
    params.validate(model);
    const auto n = model.dimension();
    if (reg.n != n) throw Error(ErrorCode::DimensionMismatch, "registry dimension differs from the model");

    const double h = params.h, mu = params.mu, k = params.k;
    const double xi = split_delay(cf, h, options.split_reading);
    const Eigen::Index N = kAugmentedBlocks * n;

    std::array<Eigen::MatrixXd, kAugmentedBlocks + 1> e;
    for (int i = 1; i <= kAugmentedBlocks; ++i) e[i] = selector(i, n);
    const Eigen::MatrixXd es = build_es(model);
    const Eigen::MatrixXd Lm = model.slope_matrix();

    const Eigen::MatrixXd zeta1 = hcat({e[1], h * e[7], h * e[9]});
    const Eigen::MatrixXd zeta2 = hcat({e[1], h * e[8], h * e[9]});
    const Eigen::MatrixXd zeta3 = hcat({es, e[1] - e[3], 2.0 * (e[1] - e[6])});
    const Eigen::MatrixXd zeta4 = hcat({e[1], h * e[6], h * e[9]});

    const std::array<Eigen::MatrixXd, 3> gamma1 = {e[1] - e[2], e[1] + e[2] - 2.0 * e[7],
                                                   e[1] - e[2] + 6.0 * e[7] - 6.0 * e[10]};
    const std::array<Eigen::MatrixXd, 3> gamma2 = {e[2] - e[3], e[2] + e[3] - 2.0 * e[8],
                                                   e[2] - e[3] + 6.0 * e[8] - 6.0 * e[11]};
    const std::array<Eigen::MatrixXd, 3> gamma3 = {
        e[1] - e[3], (h + cf.c1) * e[1] - cf.c1 * e[3] - h * e[6],
        (h * h + cf.c2 * h + cf.c3) * e[1] - cf.c3 * e[3] - cf.c2 * h * e[6] - h * h * e[9]};
    const std::array<double, 3> odd = {1.0, 3.0, 5.0};

    const double grow = std::exp(2.0 * k * h);
    const double shrink = std::exp(-2.0 * k * h);
    const double grow_split = std::exp(2.0 * k * (h - xi));

    TheoremBlocks b;
    for (auto* blk : {&b.xi1, &b.xi2, &b.xi3, &b.xi4, &b.xi5, &b.psi, &b.pi, &b.theta1, &b.theta2})
        *blk = AffineSymmetricExpression(N);
    b.gamma = AffineSymmetricExpression(6 * n);

    // Xi1: derivative of the quadratic and sector-integral parts of the functional.
    b.xi1.add_congruence(zeta4, reg.P, 2.0 * k);
    b.xi1.add_sym_product(e[4], reg.D1, 2.0 * k * e[1] + es);
    b.xi1.add_sym_product(e[1] * Lm - e[4], reg.D2, 2.0 * k * e[1] + es);

    // Xi2: single-integral terms over [t-h(t), t], [t-h, t] and the split.
    const Eigen::MatrixXd e14 = hcat({e[1], e[4]});
    const Eigen::MatrixXd e25 = hcat({e[2], e[5]});
    b.xi2.add_congruence(e14, reg.Q, grow);
    b.xi2.add_congruence(e[1], reg.U1, grow);
    b.xi2.add_congruence(e[1], reg.U2, grow);
    b.xi2.add_congruence(e25, reg.Q, -(1.0 - mu));
    b.xi2.add_congruence(e[12], reg.U2, -grow_split);
    b.xi2.add_congruence(e[12], reg.U3, grow_split);
    b.xi2.add_congruence(e[3], reg.U1, -1.0);
    b.xi2.add_congruence(e[3], reg.U3, -1.0);

    // Xi3: double-integral terms bounded with the weighted inequality.
    b.xi3.add_congruence(es, reg.Z1, h * h);
    b.xi3.add_congruence(e[1], reg.Z2, h * h);
    b.xi3.add_congruence(es, reg.Z3, h * h);
    b.xi3.add_congruence(e[6], reg.Z2, -std::pow(h, 3) / cf.q0);
    b.xi3.add_congruence((2.0 * cf.c1 / h) * e[6] + e[9], reg.Z2, -std::pow(h, 5) / (4.0 * cf.q1));
    const std::array<double, 3> qs = {cf.q0, cf.q1, cf.q2};
    for (int j = 0; j < 3; ++j) b.xi3.add_congruence(gamma3[j], reg.Z3, -h / qs[j]);
    const double ratio = cf.q13 / cf.q1;
    const double mean_scale = options.scale_mean_term_by_h ? h : 1.0;
    const Eigen::MatrixXd disc_row = (1.0 - (h + cf.c1) * ratio) * e[1] - (1.0 + cf.c4 - cf.c1 * ratio) * e[3] +
                                     mean_scale * ratio * e[6] + cf.c4 * e[12];
    b.xi3.add_congruence(disc_row, reg.Z3, -h / cf.q3);

    // Xi4: triple-integral terms, bounded on both sub-intervals.
    b.xi4.add_congruence(es, reg.N1, 0.5 * h * h);
    b.xi4.add_congruence(es, reg.N2, 0.5 * h * h);
    b.xi4.add_congruence(e[1] - e[7], reg.N1, -2.0 * shrink);
    b.xi4.add_congruence(e[1] + 2.0 * e[7] - 3.0 * e[10], reg.N1, -4.0 * shrink);
    b.xi4.add_congruence(e[2] - e[8], reg.N1, -2.0 * shrink);
    b.xi4.add_congruence(e[2] + 2.0 * e[8] - 3.0 * e[11], reg.N1, -4.0 * shrink);
    b.xi4.add_congruence(e[2] - e[7], reg.N2, -2.0 * shrink);
    b.xi4.add_congruence(e[2] - 4.0 * e[7] + 3.0 * e[10], reg.N2, -4.0 * shrink);
    b.xi4.add_congruence(e[3] - e[8], reg.N2, -2.0 * shrink);
    b.xi4.add_congruence(e[3] - 4.0 * e[8] + 3.0 * e[11], reg.N2, -4.0 * shrink);

    b.xi5.add_congruence(e[1], reg.M1, mu / h);
    b.xi5.add_congruence(e[1], reg.M2, -mu / h);

    // Psi = -e^{-2kh} gamma [Z13 S; S^T Z13] gamma^T
    for (int j = 0; j < 3; ++j) {
        b.psi.add_congruence(gamma1[j], reg.Z1, -shrink * odd[j]);
        b.psi.add_congruence(gamma2[j], reg.Z1, -shrink * odd[j]);
    }
    b.psi.add_sym_product(hcat({gamma1[0], gamma1[1], gamma1[2]}), reg.S, hcat({gamma2[0], gamma2[1], gamma2[2]}),
                          -shrink);

    b.pi.add_sym_product(e[1] * Lm - e[4], reg.R1, e[4]);
    b.pi.add_sym_product(e[2] * Lm - e[5], reg.R2, e[5]);

    b.theta1.add_sym_product(zeta1, reg.P, zeta3);
    b.theta1.add_congruence(e[1], reg.M1, 2.0 * k);
    b.theta1.add_sym_product(e[1], reg.M1, es);
    b.theta2.add_sym_product(zeta2, reg.P, zeta3);
    b.theta2.add_congruence(e[1], reg.M2, 2.0 * k);
    b.theta2.add_sym_product(e[1], reg.M2, es);

    // Gamma = [Z11 S; S^T Z12] on 6 blocks of size n.
    std::array<Eigen::MatrixXd, 6> f;
    for (int j = 0; j < 6; ++j) {
        f[j] = Eigen::MatrixXd::Zero(6 * n, n);
        f[j].block(j * n, 0, n, n).setIdentity();
    }
    for (int j = 0; j < 3; ++j) {
        b.gamma.add_congruence(f[j], reg.Z1, odd[j]);
        b.gamma.add_congruence(f[j], reg.N1, odd[j]);
        b.gamma.add_congruence(f[3 + j], reg.Z1, odd[j]);
        b.gamma.add_congruence(f[3 + j], reg.N2, odd[j]);
    }
    b.gamma.add_sym_product(hcat({f[0], f[1], f[2]}), reg.S, hcat({f[3], f[4], f[5]}), 1.0);
    return b;
}

LmiSystem build_theorem_lmis(const NetworkModel& model, const AnalysisParams& params,
                             const WeightedBasisCoefficients& coeffs, const AssemblyOptions& options)
{
    LmiSystem sys;
    sys.registry = declare_decision_variables(model.dimension());
    const TheoremBlocks blocks = build_theorem_blocks(model, params, coeffs, sys.registry, options);
    sys.model = model;
    sys.params = params;
    sys.coeffs = coeffs;
    sys.xi_delay = split_delay(coeffs, params.h, options.split_reading);

    const AffineSymmetricExpression phi = blocks.phi();
    sys.constraints.push_back({"Phi+Theta1", phi + blocks.theta1, Sense::NegativeDefinite, false});
    sys.constraints.push_back({"Phi+Theta2", phi + blocks.theta2, Sense::NegativeDefinite, false});
    sys.constraints.push_back({"Gamma", blocks.gamma, Sense::PositiveDefinite, false});
    for (const auto* v : sys.registry.sign_constrained()) {
        AffineSymmetricExpression expr(v->size());
        expr.add_congruence(Eigen::MatrixXd::Identity(v->size(), v->size()), *v);
        const bool diagonal = v->structure() == Structure::Diagonal;
        sys.constraints.push_back({v->name(), std::move(expr), Sense::PositiveDefinite, diagonal});
    }
    return sys;
}

LmiSystem build_theorem_lmis(const NetworkModel& model, const AnalysisParams& params,
                             const AssemblyOptions& options)
{
    model.validate();
    params.validate(model);
    const auto coeffs = compute_coefficients(Interval{0.0, params.h, params.k});
    return build_theorem_lmis(model, params, coeffs, options);
}

namespace {

double max_eig(const Eigen::MatrixXd& m)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

double min_eig(const Eigen::MatrixXd& m)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

} // namespace

OvershootReport compute_overshoot(const DecisionRegistry& reg, const Eigen::VectorXd& x, const NetworkModel& model,
                                  const AnalysisParams& params)
{
    model.validate();
    if (x.size() != reg.count()) throw Error(ErrorCode::DimensionMismatch, "valuation size");
    for (const auto* v : reg.sign_constrained()) {
        if (!(min_eig(v->value(x)) > 0.0)) throw Error(ErrorCode::NotAWitness, v->name() + " is not positive");
    }

    const double h = params.h, k = params.k;
    const Eigen::MatrixXd Lm = model.slope_matrix();
    const double l2 = max_eig(Lm * Lm);
    const double grow = std::exp(2.0 * k * h);
    const double h3 = h * h * h;
    const double plant = max_eig(model.C.transpose() * model.C) + max_eig(model.A.transpose() * model.A) * l2 +
                         max_eig(model.B.transpose() * model.B) * l2;
    auto val = [&x](const MatrixVariable& v) { return v.value(x); };

    OvershootReport r;
    r.terms = {
        {"P", max_eig(val(reg.P)) * (1.0 + 2.0 * h * h)},
        {"D1L", 2.0 * max_eig(val(reg.D1) * Lm)},
        {"D2L", 2.0 * max_eig(val(reg.D2) * Lm)},
        {"Q", h * grow * max_eig(val(reg.Q)) * (1.0 + l2)},
        {"U", h * grow * (max_eig(val(reg.U1)) + max_eig(val(reg.U2)) + max_eig(val(reg.U3)))},
        {"ZN", (h3 / 2.0 * max_eig(val(reg.Z1)) + h3 / 2.0 * max_eig(val(reg.Z3)) + h3 / 6.0 * max_eig(val(reg.N1)) +
                h3 / 2.0 * max_eig(val(reg.N2))) *
                   plant},
        {"M", h * max_eig(val(reg.M1) + val(reg.M2))},
        {"Z2", h3 / 2.0 * max_eig(val(reg.Z2))},
    };
    for (const auto& [name, value] : r.terms) r.lambda += value;
    r.lambda_min_P = min_eig(val(reg.P));
    r.H = std::sqrt(r.lambda / r.lambda_min_P);
    return r;
}

void write_lmi_system(std::ostream& out, const LmiSystem& sys)
{
    const auto old_precision = out.precision(17);
    out << "delaycert-lmi 1\n";
    out << "n " << sys.registry.n << "\n";
    out << "h " << sys.params.h << "\nmu " << sys.params.mu << "\nk " << sys.params.k << "\n";
    out << "xi_delay " << sys.xi_delay << "\n";
    out << "variables " << sys.registry.count() << "\n";
    for (const auto* v : sys.registry.all()) {
        const char* structure = v->structure() == Structure::Symmetric ? "symmetric"
                                : v->structure() == Structure::Diagonal ? "diagonal"
                                                                        : "full";
        out << "variable " << v->name() << " " << structure << " " << v->size() << " " << v->first_id() << " "
            << v->scalar_count() << "\n";
    }
    out << "constraints " << sys.constraints.size() << "\n";
    std::size_t records = 0;
    for (std::size_t c = 0; c < sys.constraints.size(); ++c) {
        const auto& con = sys.constraints[c];
        out << "constraint " << c << " " << con.name << " "
            << (con.sense == Sense::NegativeDefinite ? "lt0" : "gt0") << " " << (con.entrywise ? 1 : 0) << " "
            << con.expr.dim() << "\n";
        for (const auto& [id, coeff] : con.expr.terms())
            for (Eigen::Index col = 0; col < coeff.cols(); ++col)
                for (Eigen::Index row = 0; row <= col; ++row)
                    if (coeff(row, col) != 0.0) ++records;
    }
    out << "records " << records << "\n";
    for (std::size_t c = 0; c < sys.constraints.size(); ++c)
        for (const auto& [id, coeff] : sys.constraints[c].expr.terms())
            for (Eigen::Index col = 0; col < coeff.cols(); ++col)
                for (Eigen::Index row = 0; row <= col; ++row)
                    if (coeff(row, col) != 0.0)
                        out << c << " " << id << " " << row << " " << col << " " << coeff(row, col) << "\n";
    out.precision(old_precision);
}

} // namespace delaycert
