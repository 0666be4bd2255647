// Microbenchmarks for the hot paths: exact tests, law construction, table
// enumeration and the Monte Carlo loop.

#include <benchmark/benchmark.h>

#include "baseline_screen/exact_tests.hpp"
#include "baseline_screen/null_simulation.hpp"
#include "baseline_screen/pvalue_distribution.hpp"

using namespace bscreen;

namespace {

void BM_FisherExact2x2(benchmark::State& state) {
    const Table2x2 t{48, 55, 100, 100};
    for (auto _ : state) benchmark::DoNotOptimize(fisher_exact_p(t).value);
}
BENCHMARK(BM_FisherExact2x2);

void BM_ConditionalLaw2x2(benchmark::State& state) {
    const Marginals m{{state.range(0), 200 - state.range(0)}, {100, 100}};
    for (auto _ : state) benchmark::DoNotOptimize(conditional_law_2x2(m, TestKind::fisher, {}));
}
BENCHMARK(BM_ConditionalLaw2x2)->Arg(10)->Arg(100);

void BM_UnconditionalDistribution(benchmark::State& state) {
    for (auto _ : state) {
        const auto d =
            unconditional_distribution(100, 100, 0.05, TestKind::fisher, Tail::standard);
        benchmark::DoNotOptimize(expectation(d));
    }
}
BENCHMARK(BM_UnconditionalDistribution);

void BM_EnumerateRxc(benchmark::State& state) {
    // A 5x2 set comparable to a primary-diagnosis table.
    const Marginals m{{30, 25, 20, 15, 12}, {52, 50}};
    for (auto _ : state) benchmark::DoNotOptimize(count_tables(m));
    state.SetItemsProcessed(state.iterations() *
                            static_cast<int64_t>(count_tables(m)));
}
BENCHMARK(BM_EnumerateRxc);

void BM_SampleConditionalTable(benchmark::State& state) {
    const Marginals m{{60, 140}, {100, 100}};
    std::uint64_t sim = 0;
    for (auto _ : state) {
        StreamRng rng({7}, sim++, 0);
        benchmark::DoNotOptimize(sample_conditional_table(m, rng));
    }
}
BENCHMARK(BM_SampleConditionalTable);

void BM_SimulateCombined(benchmark::State& state) {
    std::vector<VariableNullSpec> spec;
    for (int v = 0; v < 20; ++v) {
        VariableNullSpec s;
        s.name = "v";
        s.marginals = Marginals{{40 + v, 160 - v}, {100, 100}};
        spec.push_back(std::move(s));
    }
    SimulationOptions opts;
    opts.statistic.kind = CombinationMethod::Kind::log_sum_statistic;
    opts.n_sims = static_cast<std::uint64_t>(state.range(0));
    opts.seed.value = 5;
    for (auto _ : state)
        benchmark::DoNotOptimize(simulate_combined_null(spec, -30.0, opts).estimate);
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulateCombined)->Arg(10'000);

} // namespace

BENCHMARK_MAIN();
