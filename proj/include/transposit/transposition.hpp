#pragma once

#include <vector>

#include "transposit/lagrange.hpp"
#include "transposit/model.hpp"

namespace transposit {

/// Virtual displacement at a state.
struct VariationField {
    Vec delta_x;
    bool chetaev_ok = false;
};

/// Unit null-space basis of ∂L_α/∂v; first nonzero entry positive. Throws RankDeficient.
std::vector<VariationField> chetaev_basis(const MechModel& model, const DynState& s);

/// max_α |Σ_k ∂L_α/∂v_k δx_k|
double chetaev_residual(const MechModel& model, const DynState& s, const Vec& delta_x);

/// δ(dx/dt) − d(δx)/dt = A δx
Vec transpositional_rate(const Mat& A, const Vec& delta_x);

/// max_α |Σ_k ∂L_α/∂v_k (Aδx)_k − Σ_k E_k L_α δx_k| with A from the chosen frame.
double admissibility_residual(const MechModel& model, const DynState& s, const Vec& accel,
                              const VariationField& delta, FrameVariant variant = FrameVariant::T1);

}  // namespace transposit
