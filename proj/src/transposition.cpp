#include "transposit/transposition.hpp"

#include <cmath>

#include "transposit/errors.hpp"
#include "transposit/linalg.hpp"

namespace transposit {

std::vector<VariationField> chetaev_basis(const MechModel& model, const DynState& s) {
    StateSplits sp = compute_splits(model, s, false);
    const Mat J = sp.constraint_jacobian();
    if (numerical_rank(J, 1e-10) < model.m())
        throw Error(ErrorKind::RankDeficient, "constraint jacobian rank below " + std::to_string(model.m()));
    const Mat basis = null_space(J);
    std::vector<VariationField> out;
    for (Eigen::Index k = 0; k < basis.cols(); ++k) {
        VariationField f;
        f.delta_x = basis.col(k);
        f.chetaev_ok = J.rows() == 0 || (J * f.delta_x).lpNorm<Eigen::Infinity>() < 1e-10;
        out.push_back(std::move(f));
    }
    return out;
}

double chetaev_residual(const MechModel& model, const DynState& s, const Vec& delta_x) {
    if (model.m() == 0) return 0.0;
    StateSplits sp = compute_splits(model, s, false);
    return (sp.constraint_jacobian() * delta_x).lpNorm<Eigen::Infinity>();
}

Vec transpositional_rate(const Mat& A, const Vec& delta_x) { return A * delta_x; }

double admissibility_residual(const MechModel& model, const DynState& s, const Vec& accel,
                              const VariationField& delta, FrameVariant variant) {
    StateSplits sp = compute_splits(model, s);
    FrameMatrices fr = build_frames(sp, variant);
    const Mat A = solve_A(fr, accel);
    const Vec rate = transpositional_rate(A, delta.delta_x);
    double worst = 0.0;
    for (int a = 0; a < model.m(); ++a) {
        const LagrangianSplit& c = sp.constraints[a];
        const double r = c.dv.dot(rate) - c.apply(accel).dot(delta.delta_x);
        worst = std::max(worst, std::abs(r));
    }
    return worst;
}

}  // namespace transposit
