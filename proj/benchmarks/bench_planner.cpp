#include "normweaver/executor.hpp"
#include "normweaver/vacuum.hpp"

#include <benchmark/benchmark.h>

using namespace normweaver;

namespace {

void BM_BuildMdp(benchmark::State& state) {
    const auto sc = vacuum::scenario(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(vacuum::build_mdp(sc.config));
}
BENCHMARK(BM_BuildMdp)->DenseRange(1, 4)->Unit(benchmark::kMillisecond);

void BM_CompileNorms(benchmark::State& state) {
    const auto sc = vacuum::scenario(4);
    for (auto _ : state)
        for (const auto& n : sc.norms) benchmark::DoNotOptimize(build_crdra(n, compile_norm(n)));
}
BENCHMARK(BM_CompileNorms)->Unit(benchmark::kMicrosecond);

void BM_Plan(benchmark::State& state) {
    const auto sc = vacuum::scenario(static_cast<int>(state.range(0)));
    const auto vm = vacuum::build_mdp(sc.config);
    std::size_t product = 0;
    for (auto _ : state) {
        const auto pol = plan(vm.mdp, sc.norms, sc.planner);
        product = pol.stats.product_states;
        benchmark::DoNotOptimize(pol.initial_value());
    }
    state.counters["env_states"] = static_cast<double>(vm.mdp.num_states());
    state.counters["product_states"] = static_cast<double>(product);
}
BENCHMARK(BM_Plan)->DenseRange(1, 4)->Unit(benchmark::kMillisecond);

void BM_Episode(benchmark::State& state) {
    const auto sc = vacuum::scenario(static_cast<int>(state.range(0)));
    const auto vm = vacuum::build_mdp(sc.config);
    const auto pol = plan(vm.mdp, sc.norms, sc.planner);
    std::uint64_t k = 0;
    for (auto _ : state) benchmark::DoNotOptimize(run_episode(pol, 500, episode_seed(1, k++)).total_cost);
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * 500);
}
BENCHMARK(BM_Episode)->DenseRange(1, 4)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
