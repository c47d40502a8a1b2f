#include "blimp/sweep.hpp"

#include <cstdio>
#include <random>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace blimp {

std::vector<TrimCell> straight_grid(double F) {
  std::vector<TrimCell> cells;
  for (int i = -5; i <= 5; ++i) cells.push_back({i * 0.01, F, F});
  return cells;
}

std::vector<TrimCell> spiral_grid() {
  std::vector<TrimCell> cells;
  for (int i = -1; i <= 4; ++i) {
    for (double dF : {-3.2, -3.7, -4.2, -4.3, -4.4, -4.9}) {
      cells.push_back({i * 0.01, gf_to_newton(0.5 * (7.0 + dF)), gf_to_newton(0.5 * (7.0 - dF))});
    }
  }
  return cells;
}

int parallel_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace {

CellResult solve_cell(const TrimCell& c, const Vehicle& veh, SolveMode mode,
                      const SolverOptions& opt) {
  CellResult r{c, std::nullopt, {}};
  try {
    switch (mode) {
      case SolveMode::kStraight:
        r.sol = solve_straight(c.dr_x, 0.5 * (c.Fl + c.Fr), veh, opt);
        break;
      case SolveMode::kSpiral:
        r.sol = solve_spiral(c.dr_x, c.Fl, c.Fr, veh, opt);
        break;
      case SolveMode::kSteady:
        r.sol = solve_steady(c.dr_x, c.Fl, c.Fr, veh, opt);
        break;
    }
  } catch (const Error& e) {
    r.error = e.what();
  }
  return r;
}

ExtractResult extract_one(const TrialRecord& t, const VehicleParams& p, const ExtractOptions& o) {
  ExtractResult r;
  try {
    r.obs = extract_steady(t, p, o);
  } catch (const Error& e) {
    r.error = e.what();
  }
  return r;
}

TrialRecord synth_one(const CellResult& c, const Vehicle& veh, double duration, std::size_t i) {
  const SteadySolution& s = *c.sol;
  const double dt = 1.0 / 240.0;
  const Trajectory tr =
      integrate(steady_state(s, s.rbar), InputSchedule::constant(s.Fl, s.Fr, duration), veh, dt,
                duration);
  const TrialKind kind = s.Fl == s.Fr ? TrialKind::kStraight : TrialKind::kSpiral;
  char id[32];
  std::snprintf(id, sizeof id, "trial_%03zu", i + 1);
  return record_trial(tr, 4, id, kind, c.cell.dr_x, s.Fl, s.Fr);
}

AeroModel mc_one(const std::vector<LoadSample>& base, const VehicleParams& params, double A_ref,
                 double noise, std::uint64_t seed, const FitOptions& opt) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<LoadSample> d = base;
  for (auto& s : d) {
    for (double& v : s.loads.v) v *= 1.0 + noise * n(rng);
  }
  return fit_loads(d, params, A_ref, opt).model;
}

}  // namespace

std::vector<CellResult> sweep_serial(const std::vector<TrimCell>& cells, const Vehicle& veh,
                                     SolveMode mode, const SolverOptions& opt) {
  std::vector<CellResult> out;
  out.reserve(cells.size());
  for (const auto& c : cells) out.push_back(solve_cell(c, veh, mode, opt));
  return out;
}

std::vector<CellResult> sweep_parallel(const std::vector<TrimCell>& cells, const Vehicle& veh,
                                       SolveMode mode, const SolverOptions& opt) {
  std::vector<CellResult> out(cells.size());
  const long n = static_cast<long>(cells.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) out[i] = solve_cell(cells[i], veh, mode, opt);
  return out;
}

std::vector<ExtractResult> extract_serial(const std::vector<TrialRecord>& trials,
                                          const VehicleParams& params,
                                          const ExtractOptions& opt) {
  std::vector<ExtractResult> out;
  out.reserve(trials.size());
  for (const auto& t : trials) out.push_back(extract_one(t, params, opt));
  return out;
}

std::vector<ExtractResult> extract_parallel(const std::vector<TrialRecord>& trials,
                                            const VehicleParams& params,
                                            const ExtractOptions& opt) {
  std::vector<ExtractResult> out(trials.size());
  const long n = static_cast<long>(trials.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) out[i] = extract_one(trials[i], params, opt);
  return out;
}

std::vector<TrialRecord> synth_trials_serial(const std::vector<CellResult>& cells,
                                             const Vehicle& veh, double duration) {
  std::vector<TrialRecord> out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (cells[i].sol) out.push_back(synth_one(cells[i], veh, duration, i));
  }
  return out;
}

std::vector<TrialRecord> synth_trials_parallel(const std::vector<CellResult>& cells,
                                               const Vehicle& veh, double duration) {
  std::vector<TrialRecord> slots(cells.size());
  const long n = static_cast<long>(cells.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    if (cells[i].sol) slots[i] = synth_one(cells[i], veh, duration, static_cast<std::size_t>(i));
  }
  std::vector<TrialRecord> out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (cells[i].sol) out.push_back(std::move(slots[i]));
  }
  return out;
}

std::vector<AeroModel> monte_carlo_serial(const std::vector<LoadSample>& base,
                                          const VehicleParams& params, double A_ref, int reps,
                                          double noise, std::uint64_t seed,
                                          const FitOptions& opt) {
  std::vector<AeroModel> out;
  for (int r = 0; r < reps; ++r) out.push_back(mc_one(base, params, A_ref, noise, seed + r, opt));
  return out;
}

std::vector<AeroModel> monte_carlo_parallel(const std::vector<LoadSample>& base,
                                            const VehicleParams& params, double A_ref, int reps,
                                            double noise, std::uint64_t seed,
                                            const FitOptions& opt) {
  std::vector<AeroModel> out(static_cast<std::size_t>(std::max(reps, 0)));
#pragma omp parallel for schedule(dynamic)
  for (int r = 0; r < reps; ++r) out[r] = mc_one(base, params, A_ref, noise, seed + r, opt);
  return out;
}

}  // namespace blimp
