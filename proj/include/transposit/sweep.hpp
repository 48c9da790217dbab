#pragma once

#include <string>
#include <vector>

#include "transposit/dynamics.hpp"
#include "transposit/errors.hpp"

namespace transposit {

/// Outcome of one state solve inside a batch.
struct SweepItem {
    bool ok = false;
    AccelSolution solution;
    ErrorKind error = ErrorKind::DomainError;
    std::string message;
};

/// Reference implementation: one state after another.
std::vector<SweepItem> sweep_serial(const MechModel& model, Formulation f, const std::vector<DynState>& states,
                                    const SolveOptions& opt = {});

/// OpenMP version; results are bit-identical to sweep_serial.
std::vector<SweepItem> sweep_parallel(const MechModel& model, Formulation f, const std::vector<DynState>& states,
                                      const SolveOptions& opt = {});

int sweep_threads();

}  // namespace transposit
