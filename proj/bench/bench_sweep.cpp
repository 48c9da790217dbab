#include <benchmark/benchmark.h>

#include <map>
#include <string>

#include "transposit/generators.hpp"
#include "transposit/models.hpp"
#include "transposit/sweep.hpp"

using namespace transposit;

namespace {

struct Batch {
    MechModel model;
    std::vector<DynState> states;
};

const Batch& batch(const std::string& name, int count) {
    static std::map<std::pair<std::string, int>, Batch> cache;
    auto key = std::make_pair(name, count);
    auto it = cache.find(key);
    if (it == cache.end()) {
        MechModel m(get_builtin(name).spec);
        Rng rng(11);
        auto states = random_states(m, rng, count);
        it = cache.emplace(key, Batch{std::move(m), std::move(states)}).first;
    }
    return it->second;
}

void BM_Sweep(benchmark::State& st, const char* model, Formulation f, bool parallel) {
    const Batch& b = batch(model, static_cast<int>(st.range(0)));
    for (auto _ : st) {
        auto r = parallel ? sweep_parallel(b.model, f, b.states) : sweep_serial(b.model, f, b.states);
        benchmark::DoNotOptimize(r.data());
    }
    st.SetItemsProcessed(st.iterations() * static_cast<long>(b.states.size()));
}

}  // namespace

BENCHMARK_CAPTURE(BM_Sweep, drum_t1_serial, "rolling_drum", Formulation::MvmT1, false)->Arg(4096)->UseRealTime();
BENCHMARK_CAPTURE(BM_Sweep, drum_t1_parallel, "rolling_drum", Formulation::MvmT1, true)->Arg(4096)->UseRealTime();
BENCHMARK_CAPTURE(BM_Sweep, gantmacher_t2_serial, "gantmacher", Formulation::MvmT2, false)->Arg(4096)->UseRealTime();
BENCHMARK_CAPTURE(BM_Sweep, gantmacher_t2_parallel, "gantmacher", Formulation::MvmT2, true)->Arg(4096)->UseRealTime();
BENCHMARK_CAPTURE(BM_Sweep, skate_dalembert_serial, "skate", Formulation::DAlembert, false)->Arg(4096)->UseRealTime();
BENCHMARK_CAPTURE(BM_Sweep, skate_dalembert_parallel, "skate", Formulation::DAlembert, true)->Arg(4096)->UseRealTime();

BENCHMARK_MAIN();
