#include "transposit/lagrange.hpp"

#include <cmath>

#include "transposit/errors.hpp"
#include "transposit/linalg.hpp"

namespace transposit {

LagrangianSplit lagrangian_split(const Jet2& j, const DynState& s) {
    const int n = (j.dim() - 1) / 2;
    const int xo = 1, vo = 1 + n;
    LagrangianSplit out;
    out.value = j.value;
    out.dt = j.grad(0);
    out.dx = j.grad.segment(xo, n);
    out.dv = j.grad.segment(vo, n);
    out.coeff = j.hess.block(vo, vo, n, n);
    out.remainder = j.hess.block(vo, xo, n, n) * s.v + j.hess.block(vo, 0, n, 1) - out.dx;
    return out;
}

LagrangianSplit lagrangian_split(const CompiledExpr& g, const DynState& s) {
    return lagrangian_split(g.eval_jet2(s), s);
}

Mat StateSplits::constraint_jacobian() const {
    const Eigen::Index n = l0.dv.size();
    Mat J(constraints.size(), n);
    for (std::size_t a = 0; a < constraints.size(); ++a) J.row(a) = constraints[a].dv.transpose();
    return J;
}

Vec StateSplits::constraint_bias(const Vec& v) const {
    Vec b(constraints.size());
    for (std::size_t a = 0; a < constraints.size(); ++a) b(a) = constraints[a].dx.dot(v) + constraints[a].dt;
    return b;
}

double StateSplits::max_constraint_residual() const {
    double r = 0.0;
    for (const auto& c : constraints) r = std::max(r, std::abs(c.value));
    return r;
}

StateSplits compute_splits(const MechModel& model, const DynState& s, bool with_aux) {
    StateSplits out;
    out.l0 = lagrangian_split(model.lagrangian(), s);
    for (int a = 0; a < model.m(); ++a) out.constraints.push_back(lagrangian_split(model.constraint(a), s));
    if (with_aux)
        for (int j = 0; j < model.n() - model.m(); ++j) out.aux.push_back(lagrangian_split(model.aux(j), s));
    return out;
}

const char* to_string(FrameVariant v) { return v == FrameVariant::T1 ? "T1" : "T2"; }

Mat FrameMatrices::omega(const Vec& accel) const {
    const Eigen::Index n = W.rows();
    Mat om = omega_rem;
    for (Eigen::Index j = 0; j < n; ++j) om.row(j) += (omega_coeff[j] * accel).transpose();
    return om;
}

FrameMatrices build_frames(const StateSplits& splits, FrameVariant variant, double rel_threshold) {
    const Eigen::Index n = splits.l0.dv.size();
    const std::size_t m = splits.constraints.size();
    std::vector<const LagrangianSplit*> rows;
    for (const auto& c : splits.constraints) rows.push_back(&c);
    const std::size_t naux = variant == FrameVariant::T1 ? n - m : n - m - 1;
    if (splits.aux.size() < naux) throw Error(ErrorKind::InvalidModel, "aux splits missing");
    for (std::size_t j = 0; j < naux; ++j) rows.push_back(&splits.aux[j]);

    FrameMatrices f;
    f.variant = variant;
    f.W.resize(n, n);
    f.omega_rem.resize(n, n);
    f.omega_coeff.resize(n);
    for (std::size_t j = 0; j < rows.size(); ++j) {
        f.W.row(j) = rows[j]->dv.transpose();
        f.omega_coeff[j] = rows[j]->coeff;
        f.omega_rem.row(j) = rows[j]->remainder.transpose();
    }
    if (variant == FrameVariant::T2) {
        f.W.row(n - 1) = splits.l0.dv.transpose();
        f.omega_coeff[n - 1] = Mat::Zero(n, n);
        f.omega_rem.row(n - 1).setZero();
    }
    f.detW = n > 0 ? f.W.partialPivLu().determinant() : 1.0;
    f.threshold = rel_threshold * (n > 0 ? f.W.rowwise().norm().maxCoeff() : 1.0);
    return f;
}

FrameMatrices build_frames(const MechModel& model, const DynState& s, FrameVariant variant, double rel_threshold) {
    return build_frames(compute_splits(model, s), variant, rel_threshold);
}

Mat solve_A(const FrameMatrices& frames, const Vec& accel) {
    if (frames.singular()) throw SingularFrame(frames.detW, frames.threshold);
    return frames.W.partialPivLu().solve(frames.omega(accel));
}

Vec solve_frame_transpose(const FrameMatrices& frames, const Vec& p) {
    if (frames.singular()) throw SingularFrame(frames.detW, frames.threshold);
    return frames.W.transpose().partialPivLu().solve(p);
}

RankReport check_constraint_rank(const MechModel& model, const DynState& s) {
    RankReport r;
    try {
        Mat J(model.m(), model.n());
        for (int a = 0; a < model.m(); ++a) {
            Jet2 j = model.constraint(a).eval_jet2(s);
            for (int k = 0; k < model.n(); ++k) J(a, k) = j.d_v(k);
        }
        r.rank = numerical_rank(J, 1e-10, &r.singular_values);
        r.full_rank = r.rank == model.m();
    } catch (const DomainError& e) {
        r.defined = false;
        r.full_rank = false;
        r.note = e.what();
    }
    return r;
}

}  // namespace transposit
