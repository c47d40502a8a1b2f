#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "blimp/aero.hpp"
#include "blimp/dynamics.hpp"
#include "blimp/equilibria.hpp"
#include "blimp/simulate.hpp"

namespace blimp {

enum class TrialKind { kStraight, kSpiral };

const char* to_string(TrialKind k);

struct TrialSample {
  double t = 0.0;
  Vec3 p = Vec3::Zero();
  EulerAngles e;
};

struct TrialRecord {
  std::string id;
  TrialKind kind = TrialKind::kStraight;
  double dr_x = 0.0;  // [m]
  double Fl = 0.0;    // [N]
  double Fr = 0.0;    // [N]
  std::vector<TrialSample> samples;

  double duration() const { return samples.empty() ? 0.0 : samples.back().t - samples.front().t; }
};

// Manifest: trial_id,file,kind,dr_x_cm,Fl_gf,Fr_gf (file relative to the
// manifest). Trial files: t,x,y,z,phi,theta,psi in s, m, rad.
// Throws Error(kSchemaError) on structure problems and Error(kUnitError) on
// values outside |position| <= 20 m, |angle| <= pi.
std::vector<TrialRecord> load_trials(const std::filesystem::path& manifest);

// Writes the manifest and one <id>.csv per record beside it.
void write_trials(const std::filesystem::path& manifest, const std::vector<TrialRecord>& trials);

// Samples a trajectory every `stride` steps into a trial record. Angles are
// wrapped to (-pi, pi].
TrialRecord record_trial(const Trajectory& traj, int stride, std::string id, TrialKind kind,
                         double dr_x, double Fl, double Fr);

struct SteadyObservation {
  std::string id;
  TrialKind kind = TrialKind::kStraight;
  double theta = 0.0;
  double phi = 0.0;
  double psidot = 0.0;
  double V = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  Vec3 w_b = Vec3::Zero();
  double Fl = 0.0;
  double Fr = 0.0;
  double dr_x = 0.0;
  Vec3 rbar = Vec3::Zero();
  double weight = 1.0;
  bool mirrored = false;
};

// Exact observation of a converged steady solution.
SteadyObservation observation_from_solution(const SteadySolution& sol, TrialKind kind,
                                            double dr_x, std::string id = {});

struct ExtractOptions {
  double window = 4.0;        // trailing averaging window [s]
  int smoothing_samples = 11; // local quadratic fit length
  double max_speed_cv = 0.05; // std(V) / mean(V)
  double max_theta_std = deg_to_rad(1.0);
};

// Reduces a trial to a steady observation. Throws Error(kNotSteady) if the
// steadiness test fails on any window in the trailing half, and
// Error(kSchemaError) if the record is shorter than window + 1 s.
SteadyObservation extract_steady(const TrialRecord& rec, const VehicleParams& params,
                                 const ExtractOptions& opt = {});

// Aerodynamic loads that balance the steady equations for the observation.
AeroLoads invert_aero(const SteadyObservation& obs, const VehicleParams& params,
                      const ModelOptions& mopt = {});

// Reflection through the x-O-z plane.
SteadyObservation mirror(const SteadyObservation& obs);

// Appends the mirror of every spiral observation.
std::vector<SteadyObservation> mirror_augment(const std::vector<SteadyObservation>& obs);

// Averages observations sharing (kind, dr_x, Fl, Fr).
std::vector<SteadyObservation> average_settings(const std::vector<SteadyObservation>& obs);

struct LoadSample {
  SteadyObservation obs;
  AeroLoads loads;
};

struct FitOptions {
  bool reject_outliers = true;
  double outlier_mads = 3.0;
  double max_drop_fraction = 0.2;
  bool refine = true;
  int max_lm_iter = 50;
  double max_condition = 1e10;
  std::size_t min_observations = 12;
  int min_alpha_values = 4;
  int min_beta_values = 3;
};

struct FitResult {
  AeroModel model;
  std::array<double, kNumChannels> rms{};        // final load residual RMS [N or N m]
  std::array<double, kNumChannels> condition{};  // column-scaled design condition number
  std::vector<std::string> excluded;             // ids dropped by the outlier pass
  double stage1_rms = 0.0;  // steady-residual RMS of stage 1 projected onto K <= 0
  double final_rms = 0.0;
  bool refinement_accepted = false;
};

// Inverts each observation and fits. Throws Error(kInsufficientSpan) or
// Error(kRankDeficient) naming the channel.
FitResult fit(const std::vector<SteadyObservation>& obs, const VehicleParams& params,
              const FitOptions& opt = {}, const ModelOptions& mopt = {});

// Fit from precomputed loads (used for noise studies).
FitResult fit_loads(const std::vector<LoadSample>& samples, const VehicleParams& params,
                    double A_ref, const FitOptions& opt = {});

// channel,c0,c_alpha,c_beta,K,rms,condition
void write_diagnostics_csv(const std::filesystem::path& path, const FitResult& r);

}  // namespace blimp
