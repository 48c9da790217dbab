#include "transposit/sweep.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace transposit {

namespace {

SweepItem run_one(const AccelFn& fn, const DynState& s) {
    SweepItem item;
    try {
        item.solution = fn(s);
        item.ok = true;
    } catch (const Error& e) {
        item.error = e.kind();
        item.message = e.what();
    }
    return item;
}

}  // namespace

std::vector<SweepItem> sweep_serial(const MechModel& model, Formulation f, const std::vector<DynState>& states,
                                    const SolveOptions& opt) {
    const AccelFn fn = make_accel_fn(f, model, opt);
    std::vector<SweepItem> out(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) out[i] = run_one(fn, states[i]);
    return out;
}

std::vector<SweepItem> sweep_parallel(const MechModel& model, Formulation f, const std::vector<DynState>& states,
                                      const SolveOptions& opt) {
    const AccelFn fn = make_accel_fn(f, model, opt);
    std::vector<SweepItem> out(states.size());
    const long n = static_cast<long>(states.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (long i = 0; i < n; ++i) out[i] = run_one(fn, states[i]);
    return out;
}

int sweep_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace transposit
