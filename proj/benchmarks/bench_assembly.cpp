#include <benchmark/benchmark.h>

#include "conformax/assembly.hpp"
#include "conformax/surface.hpp"

namespace {

void BM_SphereMesh(benchmark::State& state) {
  const int level = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto mesh = conformax::build_sphere_mesh(level);
    benchmark::DoNotOptimize(mesh);
  }
}
BENCHMARK(BM_SphereMesh)->DenseRange(3, 6);

void BM_AssembleStiffness(benchmark::State& state) {
  const auto mesh = conformax::build_sphere_mesh(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto form = conformax::assemble_stiffness(mesh);
    benchmark::DoNotOptimize(form);
  }
  state.SetItemsProcessed(state.iterations() * mesh.triangle_count());
}
BENCHMARK(BM_AssembleStiffness)->DenseRange(3, 6);

void BM_AssembleMass(benchmark::State& state) {
  const auto mesh = conformax::build_sphere_mesh(static_cast<int>(state.range(0)));
  const auto density = conformax::uniform_density(mesh, 0.0, 4.0);
  for (auto _ : state) {
    auto form = conformax::assemble_mass(mesh, density);
    benchmark::DoNotOptimize(form);
  }
}
BENCHMARK(BM_AssembleMass)->DenseRange(3, 6);

}  // namespace
