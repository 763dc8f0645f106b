#include <benchmark/benchmark.h>

#include <random>

#include "conformax/density_opt.hpp"

namespace {

void BM_ProjectToFeasible(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  conformax::FeasibleSet set;
  set.lower_bound = 0.0;
  set.cap = 8.0;
  set.vertex_weights = conformax::VecX::Constant(n, 1.0 / n);
  conformax::VecX raw(n);
  for (int i = 0; i < n; ++i) raw[i] = 1.0 + u(rng);
  for (auto _ : state) {
    auto projected = conformax::project_to_feasible(raw, set);
    benchmark::DoNotOptimize(projected);
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_ProjectToFeasible)->RangeMultiplier(8)->Range(1 << 10, 1 << 20);

}  // namespace

BENCHMARK_MAIN();
