#include "sisdmdp/dense.hpp"
#include "sisdmdp/dp.hpp"
#include "sisdmdp/generator.hpp"
#include "sisdmdp/policy_eval.hpp"
#include "sisdmdp/steady_state.hpp"

#include <benchmark/benchmark.h>

#include <map>

using namespace sisdmdp;

namespace {

const MdpModel& instance(std::size_t n, std::size_t k, std::size_t actions = 1) {
    static std::map<std::tuple<std::size_t, std::size_t, std::size_t>, MdpModel> cache;
    auto key = std::make_tuple(n, k, actions);
    auto it = cache.find(key);
    if (it == cache.end()) {
        GeneratorConfig cfg;
        cfg.n_states = n;
        cfg.n_partitions = k;
        cfg.n_actions = actions;
        it = cache.emplace(key, generate_sisdmdp(cfg)).first;
    }
    return it->second;
}

void BM_StructuredAverage(benchmark::State& state) {
    const MdpModel& m = instance(state.range(0), state.range(1));
    for (auto _ : state)
        benchmark::DoNotOptimize(evaluate_policy_structured(m.transitions(0), m.layout(), Criterion::average()));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_StructuredAverage)->ArgsProduct({{10000, 20000, 40000, 80000}, {10, 100}})->Unit(benchmark::kMillisecond);

void BM_StructuredDiscounted(benchmark::State& state) {
    const MdpModel& m = instance(state.range(0), state.range(1));
    for (auto _ : state)
        benchmark::DoNotOptimize(
            evaluate_policy_structured(m.transitions(0), m.layout(), Criterion::discounted(0.9)));
}
BENCHMARK(BM_StructuredDiscounted)->ArgsProduct({{10000, 80000}, {10, 100}})->Unit(benchmark::kMillisecond);

void BM_DirectAverage(benchmark::State& state) {
    const MdpModel& m = instance(state.range(0), 10);
    for (auto _ : state)
        benchmark::DoNotOptimize(
            evaluate_policy_baseline(m.transitions(0), m.layout(), Criterion::average(), BaselineMethod::direct()));
}
BENCHMARK(BM_DirectAverage)->Arg(250)->Arg(500)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_FixedPointAverage(benchmark::State& state) {
    const MdpModel& m = instance(state.range(0), 10);
    for (auto _ : state)
        benchmark::DoNotOptimize(evaluate_policy_baseline(m.transitions(0), m.layout(), Criterion::average(),
                                                          BaselineMethod::fixed_point(1e-15)));
}
BENCHMARK(BM_FixedPointAverage)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_IntraSolver(benchmark::State& state) {
    const MdpModel& m = instance(state.range(0), 1);
    const IntraMatrix a = build_intra_matrix(m.transitions(0), m.layout(), 0);
    const bool robb = state.range(1) == 0;
    const DenseMatrix d = to_dense(a);
    for (auto _ : state) {
        if (robb)
            benchmark::DoNotOptimize(robb_steady_state(a));
        else
            benchmark::DoNotOptimize(gth_steady_state(d));
    }
    state.SetLabel(robb ? "robb" : "gth");
}
BENCHMARK(BM_IntraSolver)->ArgsProduct({{100, 400, 1000}, {0, 1}});

void BM_Chiu(benchmark::State& state) {
    const MdpModel& m = instance(state.range(0), state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(chiu_average_reward(m.transitions(0), m.layout()));
}
BENCHMARK(BM_Chiu)->ArgsProduct({{10000, 100000}, {10, 100}})->Unit(benchmark::kMillisecond);

void BM_PolicyIteration(benchmark::State& state) {
    const MdpModel& m = instance(2000, 20, state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(policy_iteration(m, Criterion::average(), Evaluator::structured()));
}
BENCHMARK(BM_PolicyIteration)->Arg(2)->Arg(10)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
