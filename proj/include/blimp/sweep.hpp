#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "blimp/equilibria.hpp"
#include "blimp/sysid.hpp"

// Embarrassingly parallel kernels. Each *_serial function is the reference;
// the *_parallel variant splits the same independent cells across OpenMP
// threads and returns bitwise-identical results.
namespace blimp {

struct TrimCell {
  double dr_x = 0.0;  // [m]
  double Fl = 0.0;    // [N]
  double Fr = 0.0;    // [N]
};

// Straight-flight grid: dr_x in {-5..5} cm at F each side.
std::vector<TrimCell> straight_grid(double F = gf_to_newton(2.0));

// Spiral grid: dr_x in {-1..4} cm, Fl + Fr = 7 gf, Fl - Fr in
// {-3.2, -3.7, -4.2, -4.3, -4.4, -4.9} gf.
std::vector<TrimCell> spiral_grid();

enum class SolveMode {
  kStraight,  // solve_straight (planar)
  kSpiral,    // solve_spiral
  kSteady,    // solve_steady (full six unknowns)
};

struct CellResult {
  TrimCell cell;
  std::optional<SteadySolution> sol;
  std::string error;
};

std::vector<CellResult> sweep_serial(const std::vector<TrimCell>& cells, const Vehicle& veh,
                                     SolveMode mode, const SolverOptions& opt = {});
std::vector<CellResult> sweep_parallel(const std::vector<TrimCell>& cells, const Vehicle& veh,
                                       SolveMode mode, const SolverOptions& opt = {});

struct ExtractResult {
  std::optional<SteadyObservation> obs;
  std::string error;
};

std::vector<ExtractResult> extract_serial(const std::vector<TrialRecord>& trials,
                                          const VehicleParams& params,
                                          const ExtractOptions& opt = {});
std::vector<ExtractResult> extract_parallel(const std::vector<TrialRecord>& trials,
                                            const VehicleParams& params,
                                            const ExtractOptions& opt = {});

// Simulates each steady cell from its equilibrium and samples it as a trial
// at 60 Hz (dt = 1/240 s, every 4th step).
std::vector<TrialRecord> synth_trials_serial(const std::vector<CellResult>& cells,
                                             const Vehicle& veh, double duration);
std::vector<TrialRecord> synth_trials_parallel(const std::vector<CellResult>& cells,
                                               const Vehicle& veh, double duration);

// Repetition r multiplies every load by (1 + noise N(0,1)) drawn from
// mt19937_64 seeded with seed + r, then refits.
std::vector<AeroModel> monte_carlo_serial(const std::vector<LoadSample>& base,
                                          const VehicleParams& params, double A_ref, int reps,
                                          double noise, std::uint64_t seed,
                                          const FitOptions& opt = {});
std::vector<AeroModel> monte_carlo_parallel(const std::vector<LoadSample>& base,
                                            const VehicleParams& params, double A_ref, int reps,
                                            double noise, std::uint64_t seed,
                                            const FitOptions& opt = {});

// Number of threads the parallel kernels use (1 without OpenMP).
int parallel_threads();

}  // namespace blimp
