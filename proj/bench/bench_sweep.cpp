// Serial reference vs OpenMP kernels over the same cells.
#include <benchmark/benchmark.h>

#include "blimp/sweep.hpp"

namespace {

using namespace blimp;

Vehicle published() { return {published_vehicle(), published_aero(), {}}; }

std::vector<TrimCell> all_cells() {
  std::vector<TrimCell> cells = straight_grid();
  for (const TrimCell& c : spiral_grid()) cells.push_back(c);
  return cells;
}

template <auto Sweep>
void BM_Sweep(benchmark::State& state) {
  const Vehicle veh = published();
  const auto cells = all_cells();
  for (auto _ : state) benchmark::DoNotOptimize(Sweep(cells, veh, SolveMode::kSteady, {}));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(cells.size()));
}
BENCHMARK(BM_Sweep<sweep_serial>)->Name("sweep/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Sweep<sweep_parallel>)->Name("sweep/parallel")->Unit(benchmark::kMillisecond);

const std::vector<TrialRecord>& trials() {
  static const std::vector<TrialRecord> t = [] {
    const Vehicle veh = published();
    const auto cells = sweep_serial(all_cells(), veh, SolveMode::kSteady);
    return synth_trials_serial(cells, veh, 12.0);
  }();
  return t;
}

template <auto Extract>
void BM_Extract(benchmark::State& state) {
  const VehicleParams params = published_vehicle();
  const auto& t = trials();
  for (auto _ : state) benchmark::DoNotOptimize(Extract(t, params, {}));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(t.size()));
}
BENCHMARK(BM_Extract<extract_serial>)->Name("extract/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Extract<extract_parallel>)->Name("extract/parallel")->Unit(benchmark::kMillisecond);

template <auto Synth>
void BM_Synth(benchmark::State& state) {
  const Vehicle veh = published();
  const auto cells = sweep_serial(all_cells(), veh, SolveMode::kSteady);
  for (auto _ : state) benchmark::DoNotOptimize(Synth(cells, veh, 6.0));
}
BENCHMARK(BM_Synth<synth_trials_serial>)->Name("synth/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Synth<synth_trials_parallel>)->Name("synth/parallel")->Unit(benchmark::kMillisecond);

template <auto MonteCarlo>
void BM_MonteCarlo(benchmark::State& state) {
  const Vehicle veh = published();
  const auto cells = all_cells();
  const auto solved = sweep_serial(cells, veh, SolveMode::kSteady);
  std::vector<LoadSample> base;
  for (std::size_t i = 0; i < solved.size(); ++i) {
    const TrialKind kind = i < 11 ? TrialKind::kStraight : TrialKind::kSpiral;
    const auto o = observation_from_solution(*solved[i].sol, kind, solved[i].cell.dr_x);
    base.push_back({o, invert_aero(o, veh.params)});
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        MonteCarlo(base, veh.params, veh.params.A_ref, 20, 0.02, 1000, {}));
  }
}
BENCHMARK(BM_MonteCarlo<monte_carlo_serial>)->Name("monte_carlo/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MonteCarlo<monte_carlo_parallel>)->Name("monte_carlo/parallel")->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
