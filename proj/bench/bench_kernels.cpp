// Serial reference vs OpenMP population evaluation.

#include <benchmark/benchmark.h>

#include <string>

#include "wfcmdp/evolution.hpp"
#include "wfcmdp/parallel.hpp"

using namespace wfcmdp;

namespace {

const TileSet& desk() {
    static const TileSet ts = load_tileset_file(std::string(WFCMDP_DATA_DIR) + "/desk.tileset.json");
    return ts;
}

std::vector<Genome> population(GenomeLayout layout, Dims dims) {
    Rng rng(42);
    return init_population(48, layout, dims, desk().size(), rng);
}

template <bool Parallel>
void evaluate(benchmark::State& state, GenomeLayout layout) {
    const Dims dims{static_cast<int>(state.range(0)), static_cast<int>(state.range(0))};
    const Problem problem{desk(), dims, {ObjectiveKind::hybrid_river_binary, 10}};
    const auto pop = population(layout, dims);
    for (auto _ : state) {
        auto evals = Parallel ? evaluate_population(pop, problem) : evaluate_population_serial(pop, problem);
        benchmark::DoNotOptimize(evals.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(pop.size()));
}

void BM_direct_serial(benchmark::State& s) { evaluate<false>(s, GenomeLayout::direct_map); }
void BM_direct_parallel(benchmark::State& s) { evaluate<true>(s, GenomeLayout::direct_map); }
void BM_rollout_serial(benchmark::State& s) { evaluate<false>(s, GenomeLayout::grid2d); }
void BM_rollout_parallel(benchmark::State& s) { evaluate<true>(s, GenomeLayout::grid2d); }

}  // namespace

BENCHMARK(BM_direct_serial)->Arg(12)->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_direct_parallel)->Arg(12)->Arg(20)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_rollout_serial)->Arg(12)->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_rollout_parallel)->Arg(12)->Arg(20)->Unit(benchmark::kMillisecond)->UseRealTime();

int main(int argc, char** argv) {
    configure_threads();
    benchmark::Initialize(&argc, argv);
    if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
    benchmark::RunSpecifiedBenchmarks();
    benchmark::Shutdown();
    return 0;
}
