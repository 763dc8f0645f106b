#include <benchmark/benchmark.h>

#include "conformax/assembly.hpp"
#include "conformax/eigensolver.hpp"
#include "conformax/surface.hpp"

namespace {

// cold solve: fresh factorization and random start
void BM_SolveSphere(benchmark::State& state) {
  const auto mesh = conformax::build_sphere_mesh(static_cast<int>(state.range(0)));
  const auto stiffness = conformax::assemble_stiffness(mesh);
  const auto mass =
      conformax::assemble_mass(mesh, conformax::uniform_density(mesh, 0.0, 4.0));
  conformax::SolverOptions options;
  options.count = 9;
  options.tol = 1e-9;
  for (auto _ : state) {
    auto result = conformax::solve_smallest(stiffness, mass, options);
    benchmark::DoNotOptimize(result);
  }
}
BENCHMARK(BM_SolveSphere)->DenseRange(3, 5)->Unit(benchmark::kMillisecond);

// warm solve: the optimizer's inner pattern, previous eigenvectors reused
void BM_SolveWarm(benchmark::State& state) {
  const auto mesh = conformax::build_sphere_mesh(static_cast<int>(state.range(0)));
  const auto stiffness = conformax::assemble_stiffness(mesh);
  const auto mass =
      conformax::assemble_mass(mesh, conformax::uniform_density(mesh, 0.0, 4.0));
  conformax::SolverOptions options;
  options.count = 7;
  options.tol = 1e-9;
  const auto seed_result = conformax::solve_smallest(stiffness, mass, options);
  options.warm_start = &seed_result.eigenvectors;
  for (auto _ : state) {
    auto result = conformax::solve_smallest(stiffness, mass, options);
    benchmark::DoNotOptimize(result);
  }
}
BENCHMARK(BM_SolveWarm)->DenseRange(3, 5)->Unit(benchmark::kMillisecond);

}  // namespace
