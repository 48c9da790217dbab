#pragma once

#include <string>
#include <vector>

#include "transposit/jet.hpp"
#include "transposit/model.hpp"
#include "transposit/state.hpp"

namespace transposit {

/// E_ν g = coeff.row(ν)·ẍ + remainder(ν) for all ν, plus the first-order data of g.
struct LagrangianSplit {
    Mat coeff;
    Vec remainder;
    double value = 0.0;
    double dt = 0.0;
    Vec dx;
    Vec dv;

    Vec apply(const Vec& accel) const { return coeff * accel + remainder; }
    /// dg/dt along (v, accel).
    double total_derivative(const Vec& v, const Vec& accel) const { return dv.dot(accel) + dx.dot(v) + dt; }
};

LagrangianSplit lagrangian_split(const Jet2& j, const DynState& s);
LagrangianSplit lagrangian_split(const CompiledExpr& g, const DynState& s);

/// Splits of L0, the constraints and the aux functions at one state.
struct StateSplits {
    LagrangianSplit l0;
    std::vector<LagrangianSplit> constraints;
    std::vector<LagrangianSplit> aux;

    Mat constraint_jacobian() const;
    /// x- and t-terms of dL_α/dt.
    Vec constraint_bias(const Vec& v) const;
    double max_constraint_residual() const;
};

StateSplits compute_splits(const MechModel& model, const DynState& s, bool with_aux = true);

enum class FrameVariant { T1, T2 };

const char* to_string(FrameVariant v);

struct FrameMatrices {
    FrameVariant variant = FrameVariant::T1;
    Mat W;
    /// omega_coeff[j](m, i): coefficient of ẍ_i in Ω_{jm}.
    std::vector<Mat> omega_coeff;
    Mat omega_rem;
    double detW = 0.0;
    double threshold = 0.0;

    Mat omega(const Vec& accel) const;
    bool singular() const { return !(std::abs(detW) > threshold); }
};

inline constexpr double kSingularRelThreshold = 1e-8;

FrameMatrices build_frames(const StateSplits& splits, FrameVariant variant,
                           double rel_threshold = kSingularRelThreshold);
FrameMatrices build_frames(const MechModel& model, const DynState& s, FrameVariant variant,
                           double rel_threshold = kSingularRelThreshold);

/// A = W⁻¹Ω(ẍ). Throws SingularFrame.
Mat solve_A(const FrameMatrices& frames, const Vec& accel);

/// ξ = W⁻ᵀ p, so that Aᵀp = Ωᵀξ. Throws SingularFrame.
Vec solve_frame_transpose(const FrameMatrices& frames, const Vec& p);

struct RankReport {
    bool defined = true;
    int rank = 0;
    bool full_rank = false;
    Vec singular_values;
    std::string note;
};

RankReport check_constraint_rank(const MechModel& model, const DynState& s);

}  // namespace transposit
