#include <benchmark/benchmark.h>

#include "fixtures.hpp"
#include "inflogic/evaluator.hpp"
#include "inflogic/syntax.hpp"
#include "inflogic/transforms.hpp"

namespace {

using namespace inflogic;

void BM_EvaluateSentence(benchmark::State& state) {
  FiniteStructure m = bench::cycle(static_cast<std::size_t>(state.range(0)), 3);
  Formula f = parse_formula("(sup x (inf y (max (d x y) (ind (P y)))))", m.signature());
  for (auto _ : state) benchmark::DoNotOptimize(evaluate(m, f, {}));
}
BENCHMARK(BM_EvaluateSentence)->RangeMultiplier(2)->Range(4, 32);

void BM_EvaluateRho(benchmark::State& state) {
  FiniteStructure m = bench::cycle(static_cast<std::size_t>(state.range(0)), 3);
  Formula rho = parse_formula("(sup x (rho (y) (P y)))", m.signature());
  Formula flat = rho_eliminate(rho);
  const bool eliminated = state.range(1) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(evaluate(m, eliminated ? flat : rho, {}));
}
BENCHMARK(BM_EvaluateRho)->ArgsProduct({{4, 8, 16, 32}, {0, 1}});

// A family the recognizers do not cover: cost grows with the budget.
void BM_EvaluateBounds(benchmark::State& state) {
  FiniteStructure m = bench::cycle(8, 3);
  Formula f = parse_formula("(sup x (iinf n nat (max (P x) (recip n))))", m.signature());
  for (auto _ : state) benchmark::DoNotOptimize(evaluate(m, f, {}, state.range(0)));
}
BENCHMARK(BM_EvaluateBounds)->RangeMultiplier(4)->Range(16, 1024);

}  // namespace
