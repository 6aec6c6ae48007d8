#include <benchmark/benchmark.h>

#include "fixtures.hpp"
#include "inflogic/structure_io.hpp"

namespace {

using namespace inflogic;

void BM_EnumerateAutomorphisms(benchmark::State& state) {
  FiniteStructure m = bench::cycle(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(enumerate_automorphisms(m));
}
BENCHMARK(BM_EnumerateAutomorphisms)->DenseRange(4, 8, 2);

void BM_Validate(benchmark::State& state) {
  FiniteStructure m = bench::cycle(static_cast<std::size_t>(state.range(0)), 4);
  for (auto _ : state) benchmark::DoNotOptimize(validate_structure(m));
}
BENCHMARK(BM_Validate)->RangeMultiplier(2)->Range(8, 64);

void BM_SaveLoad(benchmark::State& state) {
  FiniteStructure m = bench::cycle(static_cast<std::size_t>(state.range(0)), 4);
  for (auto _ : state) benchmark::DoNotOptimize(parse_structure(save_structure(m)));
}
BENCHMARK(BM_SaveLoad)->RangeMultiplier(2)->Range(8, 64);

}  // namespace
