#pragma once

#include <string>
#include <vector>

#include "transposit/expr.hpp"
#include "transposit/jet.hpp"
#include "transposit/state.hpp"

namespace transposit {

/// ModelSpec with parameter values bound and every expression compiled.
class MechModel {
public:
    explicit MechModel(ModelSpec spec, const ParamValues& overrides = {});

    const ModelSpec& spec() const { return spec_; }
    const std::string& name() const { return spec_.name; }
    int n() const { return static_cast<int>(spec_.coords.size()); }
    int m() const { return static_cast<int>(spec_.constraints.size()); }
    const ParamValues& params() const { return params_; }
    double param(const std::string& key, double fallback) const;

    const CompiledExpr& lagrangian() const { return lagrangian_; }
    const CompiledExpr& constraint(int a) const { return constraints_[a]; }
    const CompiledExpr& aux(int j) const { return aux_[j]; }
    const std::vector<CompiledExpr>& monitors() const { return monitors_; }

    /// Constraint values L_1..L_M at a state.
    Vec constraint_values(const DynState& s) const;

    /// Spec with overrides folded into its param list.
    ModelSpec bound_spec() const;

    /// Velocity name `d<coord>` or coordinate name to packed-state slot; -1 if unknown.
    int slot_of(const std::string& name) const;

private:
    ModelSpec spec_;
    ParamValues params_;
    CompiledExpr lagrangian_;
    std::vector<CompiledExpr> constraints_;
    std::vector<CompiledExpr> aux_;
    std::vector<CompiledExpr> monitors_;
};

DynState make_state(const MechModel& model, double t = 0.0);

}  // namespace transposit
