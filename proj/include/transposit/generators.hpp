#pragma once

#include <random>
#include <vector>

#include "transposit/expr.hpp"
#include "transposit/model.hpp"

namespace transposit {

using Rng = std::mt19937_64;

/// Arbitrary parser-reachable AST (no evaluation guarantees).
Expr random_expr(Rng& rng, int depth, const Scope& scope);

/// Smooth expression over coordinates of `scope`, evaluable everywhere on the unit box.
Expr random_smooth_expr(Rng& rng, int depth, const Scope& scope);

/// Uniform t, x, v in [-1, 1], velocities projected onto the constraints.
/// Returns false when the draw cannot be admitted (domain error or projection failure).
bool random_state(const MechModel& model, Rng& rng, DynState& out);

/// Draw until `count` admissible states are found or `max_draws` is exhausted.
std::vector<DynState> random_states(const MechModel& model, Rng& rng, int count, int max_draws = 10000);

}  // namespace transposit
