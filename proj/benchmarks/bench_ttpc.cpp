#include <benchmark/benchmark.h>

#include <vector>

#include "ttpc/circuit.hpp"
#include "ttpc/criteria.hpp"
#include "ttpc/gaussian.hpp"
#include "ttpc/homodyne.hpp"

using namespace ttpc;

namespace {

CircuitParams lossy_params() {
  CircuitParams params = CircuitParams::symmetric(0.3);
  params.losses = {0.9, 0.85, 0.95, 0.8};
  params.nopa_escape = {0.97, 0.95};
  return params;
}

void BM_BuildState(benchmark::State& state) {
  const CircuitParams params = lossy_params();
  for (auto _ : state) benchmark::DoNotOptimize(build_ttpc(params));
}
BENCHMARK(BM_BuildState);

void BM_CombinationVariance(benchmark::State& state) {
  const GaussianState st = build_ttpc(lossy_params());
  const QuadCombination combo = criterion_term(ComboId::I1).realized(0.41);
  for (auto _ : state) benchmark::DoNotOptimize(combination_variance(st, combo));
}
BENCHMARK(BM_CombinationVariance);

void BM_OptimizeAndEvaluate(benchmark::State& state) {
  const GaussianState st = build_ttpc(lossy_params());
  for (auto _ : state) {
    const Gains gains = optimal_named_gains(st);
    benchmark::DoNotOptimize(evaluate_criteria(st, gains));
  }
}
BENCHMARK(BM_OptimizeAndEvaluate);

void BM_Validate(benchmark::State& state) {
  const GaussianState st = build_ttpc(lossy_params());
  for (auto _ : state) benchmark::DoNotOptimize(validate(st));
}
BENCHMARK(BM_Validate);

void BM_SampleCombinations(benchmark::State& state) {
  const GaussianState st = build_ttpc(lossy_params());
  const Gains gains = optimal_named_gains(st);
  std::vector<LabeledCombination> combos;
  for (ComboId id : kAllComboIds) {
    const CriterionTerm& term = criterion_term(id);
    combos.push_back({to_string(id), term.realized(gains[term.slot.name])});
  }
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(sample_combinations(st, combos, n, 42));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(n * combos.size()));
}
BENCHMARK(BM_SampleCombinations)->Arg(8192)->Arg(131072);

}  // namespace

BENCHMARK_MAIN();
