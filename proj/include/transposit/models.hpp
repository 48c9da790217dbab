#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "transposit/dynamics.hpp"
#include "transposit/expr.hpp"
#include "transposit/model.hpp"

namespace transposit {

struct BuiltinModel {
    ModelSpec spec;
    std::string source;  ///< model-file text the spec was parsed from
    std::vector<Formulation> recommended;
    std::vector<std::string> oracles;
    std::string notes;
    /// Reference initial state, on the constraint manifold, built from bound params.
    std::function<DynState(const MechModel&)> reference;
};

const std::vector<std::string>& builtin_names();
bool is_builtin(const std::string& name);
BuiltinModel get_builtin(const std::string& name);

using OracleValues = std::map<std::string, double>;

/// Closed-form expectations. Missing setup keys fall back to the builtin's defaults.
OracleValues oracle_eval(const std::string& model_name, const std::string& oracle_name, double t,
                         const OracleValues& setup);

}  // namespace transposit
