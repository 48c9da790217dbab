#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "transposit/lagrange.hpp"
#include "transposit/model.hpp"

namespace transposit {

enum class Formulation { DAlembert, Vakonomic, MvmT1, MvmT2, VoronetsReduced, ChaplyginReduced };

const char* formulation_id(Formulation f);
Formulation parse_formulation(std::string_view id);
const std::vector<Formulation>& all_formulations();

struct SolveOptions {
    double admission_tol = 1e-8;
    double singular_rel_threshold = kSingularRelThreshold;
    double min_rcond = 1e-13;
    bool require_on_manifold = true;
};

struct AccelSolution {
    Formulation formulation = Formulation::DAlembert;
    Vec accel;
    Vec mult_rate;  ///< μ, λ̇ or λ̃̇
    std::optional<FrameMatrices> frames;
    Mat A;
    double residual = 0.0;
    double rcond = 0.0;
    double detG = std::numeric_limits<double>::quiet_NaN();
    Vec F1, F2;
    Mat system;  ///< assembled rows, unknowns (ẍ, rates)
    Vec rhs;
};

AccelSolution accel_dalembert(const MechModel& model, const DynState& s, const SolveOptions& opt = {});
AccelSolution accel_mvm_t1(const MechModel& model, const DynState& s, const SolveOptions& opt = {});
AccelSolution accel_mvm_t2(const MechModel& model, const DynState& s, const SolveOptions& opt = {});
/// s.lambda carries the current multipliers (zeros when empty).
AccelSolution rhs_vakonomic(const MechModel& model, const DynState& s, const SolveOptions& opt = {});
AccelSolution accel_voronets_reduced(const MechModel& model, const DynState& s, const SolveOptions& opt = {});
AccelSolution accel_chaplygin_reduced(const MechModel& model, const DynState& s, const SolveOptions& opt = {});

/// Dependent-coordinate structure dx_α − Φ_α shared by the reduced forms.
struct ReducedForm {
    std::vector<int> dependent;    ///< coordinate index solved by constraint α
    std::vector<int> independent;  ///< remaining coordinates in order
    std::vector<Expr> phi;         ///< Φ_α as ASTs
    Expr reduced_lagrangian;       ///< L* = L0 with dx_α replaced by Φ_α
    std::vector<CompiledExpr> phi_compiled;
    CompiledExpr reduced_compiled;
};

/// Structural detection; throws NotVoronetsForm, or NotChaplyginForm when chaplygin is set.
ReducedForm reduced_form(const MechModel& model, bool chaplygin);

AccelSolution accel_voronets_reduced(const MechModel& model, const ReducedForm& form, const DynState& s,
                                     const SolveOptions& opt = {});
AccelSolution accel_chaplygin_reduced(const MechModel& model, const ReducedForm& form, const DynState& s,
                                      const SolveOptions& opt = {});

AccelSolution solve(Formulation f, const MechModel& model, const DynState& s, const SolveOptions& opt = {});

/// Right-hand side with per-model precomputation (reduced forms) done once.
using AccelFn = std::function<AccelSolution(const DynState&)>;
AccelFn make_accel_fn(Formulation f, const MechModel& model, const SolveOptions& opt = {});

struct Forces {
    Vec F1;
    Vec F2;
};

/// F1 = (W₁⁻¹Ω₁)ᵀ ∂L0/∂v and F2 = W₁ᵀλ̇ for an MvmT1 solution.
Forces force_decomposition(const MechModel& model, const DynState& s, const AccelSolution& sol);

struct Determinacy {
    Mat G;
    double detG = 0.0;
};

Determinacy determinacy_matrix(const MechModel& model, const DynState& s, const SolveOptions& opt = {});

}  // namespace transposit
