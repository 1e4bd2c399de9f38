#include "tacsim/constitutive.hpp"
#include "tacsim/fixtures.hpp"
#include "tacsim/mpm.hpp"
#include "tacsim/scenario.hpp"

#include <benchmark/benchmark.h>

#include <filesystem>

namespace {

using namespace tacsim;

// Press scenario built from the bundled fixtures in a scratch directory.
const Scenario& press_scenario() {
  static const Scenario sc = [] {
    const auto dir = std::filesystem::temp_directory_path() / "tacsim_bench_fixtures";
    write_fixtures(dir);
    return load_scenario(dir / "press_dotin.json");
  }();
  return sc;
}

SimulationSetup pressed_setup() {
  SimulationSetup setup = build_simulation(press_scenario());
  for (int k = 0; k < 200; ++k) step(setup.scene);
  return setup;
}

void BM_Step(benchmark::State& state) {
  SimulationSetup setup = pressed_setup();
  for (auto _ : state) step(setup.scene);
  state.counters["particles"] = static_cast<double>(setup.scene.particles.size());
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(setup.scene.particles.size()));
}
BENCHMARK(BM_Step)->Unit(benchmark::kMillisecond);

void BM_ParticleToGrid(benchmark::State& state) {
  SimulationSetup setup = pressed_setup();
  auto& s = setup.scene;
  for (auto _ : state) {
    s.grid.clear();
    particle_to_grid(s.particles, s.grid, s.config);
  }
}
BENCHMARK(BM_ParticleToGrid)->Unit(benchmark::kMillisecond);

void BM_GridUpdate(benchmark::State& state) {
  SimulationSetup setup = pressed_setup();
  auto& s = setup.scene;
  s.grid.clear();
  particle_to_grid(s.particles, s.grid, s.config);
  for (auto _ : state) grid_update(s.grid, s.config);
}
BENCHMARK(BM_GridUpdate)->Unit(benchmark::kMillisecond);

void BM_GridToParticle(benchmark::State& state) {
  SimulationSetup setup = pressed_setup();
  auto& s = setup.scene;
  s.grid.clear();
  particle_to_grid(s.particles, s.grid, s.config);
  grid_update(s.grid, s.config);
  for (auto _ : state) grid_to_particle(s.particles, s.grid, s.config);
}
BENCHMARK(BM_GridToParticle)->Unit(benchmark::kMillisecond);

void BM_UpdateDeformation(benchmark::State& state) {
  SimulationSetup setup = pressed_setup();
  auto& s = setup.scene;
  auto saved = s.particles;
  for (auto _ : state) {
    update_deformation_and_advect(s.particles, s.config);
    state.PauseTiming();
    s.particles = saved;
    state.ResumeTiming();
  }
}
BENCHMARK(BM_UpdateDeformation)->Unit(benchmark::kMillisecond);

}  // namespace

namespace {

void BM_ComputeStress(benchmark::State& state) {
  using namespace tacsim;
  Mat3 F;
  F << 1.002, 0.001, -0.0005, 0.0007, 0.998, 0.0012, -0.0003, 0.0009, 1.001;
  const auto lame = LameParameters::from_youngs(1.45e5, 0.45);
  for (auto _ : state) {
    benchmark::DoNotOptimize(F);
    benchmark::DoNotOptimize(compute_stress(F, lame));
  }
}
BENCHMARK(BM_ComputeStress);

}  // namespace
