#include <benchmark/benchmark.h>

#include "fixtures.hpp"
#include "inflogic/scott.hpp"

namespace {

using namespace inflogic;

void BM_BackAndForthTables(benchmark::State& state) {
  FiniteStructure m = bench::cycle(static_cast<std::size_t>(state.range(0)), 2);
  const auto cap = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(bf_tables(m, cap).stable_stage());
}
BENCHMARK(BM_BackAndForthTables)->ArgsProduct({{3, 4, 6, 8}, {1, 2}});

void BM_ScottSentence(benchmark::State& state) {
  FiniteStructure m = bench::cycle(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(scott_sentence(m));
}
BENCHMARK(BM_ScottSentence)->DenseRange(2, 4);

void BM_DefineInvariantPredicate(benchmark::State& state) {
  FiniteStructure m = bench::cycle(6, 2);
  TupleTable p{1, {}};
  for (PointId i = 0; i < m.size(); ++i) p.values[Tuple{i}] = Rational(i % 2 == 0 ? 1 : 3, 10);
  for (auto _ : state) benchmark::DoNotOptimize(define_invariant_predicate(m, p, state.range(0)));
}
BENCHMARK(BM_DefineInvariantPredicate)->Arg(10)->Arg(100);

}  // namespace
