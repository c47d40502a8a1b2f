#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "blimp/dynamics.hpp"

namespace blimp {

enum class MassCommand { kHold, kGoto };

struct ScheduleSegment {
  double t_start = 0.0;  // [s]
  double t_end = 0.0;    // [s]
  double Fl = 0.0;       // [N]
  double Fr = 0.0;       // [N]
  MassCommand cmd = MassCommand::kHold;
  double target_dr = 0.0;  // goto target, displacement along x_b from rbar0 [m]
};

struct InputSchedule {
  std::vector<ScheduleSegment> segments;

  // Throws Error(kSchemaError) unless segments are non-empty, contiguous,
  // ascending, with non-negative thrust.
  void validate() const;

  static InputSchedule constant(double Fl, double Fr, double T);
};

// CSV: t_start,t_end,Fl_gf,Fr_gf,mm_cmd,mm_target_cm with mm_cmd in {hold, goto}.
InputSchedule load_schedule(const std::filesystem::path& path);
void write_schedule(const std::filesystem::path& path, const InputSchedule& s);

struct MovingMassLimits {
  double vmax = 0.05;  // [m/s]
  double amax = 0.5;   // [m/s^2]
};

// Trapezoidal velocity profile snapped to the step grid: accel_steps at +a,
// cruise_steps at 0, accel_steps at -a. Moves exactly `distance` under RK4.
struct MassProfile {
  int accel_steps = 0;
  int cruise_steps = 0;
  double accel = 0.0;  // signed [m/s^2]

  int total_steps() const { return 2 * accel_steps + cruise_steps; }
  // Commanded acceleration for the k-th step after the profile starts.
  double at_step(int k) const;
};

MassProfile plan_mass_move(double distance, double dt, const MovingMassLimits& lim = {});

enum class TrajectoryStatus { kComplete, kGimbalLock, kNonFinite };

const char* to_string(TrajectoryStatus s);

struct Trajectory {
  double dt = 0.0;
  std::vector<double> t;
  std::vector<State> states;
  std::vector<ControlInput> inputs;  // input held over [t_k, t_k + dt)
  TrajectoryStatus status = TrajectoryStatus::kComplete;
  std::string message;

  std::size_t size() const { return states.size(); }
  bool complete() const { return status == TrajectoryStatus::kComplete; }
};

// Classical RK4 with inputs held within each step. Returns floor(T/dt) + 1
// samples, or a partial trajectory flagged with the failing status.
// Throws Error(kConfigError) for dt outside (0, 0.05] or T <= 0.
Trajectory integrate(const State& x0, const InputSchedule& sched, const Vehicle& veh, double dt,
                     double T, const MovingMassLimits& lim = {});

// One RK4 step.
State rk4_step(const State& x, const ControlInput& u, const Vehicle& veh, double dt);

// Largest |x_i(t) - x_i(0)| / max(|x_i(0)|, floor) over the attitude-rate
// states (phi, theta, u, v, w, p, q, r) and all samples.
double max_relative_drift(const Trajectory& traj, double floor = 1e-3);

// Inertial yaw rate from edot = J w at each sample [rad/s].
std::vector<double> yaw_rate_series(const Trajectory& traj);

// Horizontal speed over |psidot|, median-smoothed over a centred window.
// Samples with |psidot| < kStraightYawRate are +inf.
inline constexpr double kStraightYawRate = 1e-3;
std::vector<double> turning_radius_series(const Trajectory& traj, double window);

// Same, from raw horizontal speed and yaw-rate series with sample spacing dt.
std::vector<double> turning_radius_series(const std::vector<double>& horizontal_speed,
                                          const std::vector<double>& yaw_rate, double dt,
                                          double window);

struct GlideMetrics {
  std::vector<double> forward;  // horizontal speed [m/s]
  std::vector<double> descent;  // zdot, positive sinking [m/s]
  double glide_ratio = 0.0;     // mean forward / mean descent over the last half
};

// Throws Error(kDegenerateDescent) if the mean descent is below 1e-3 m/s.
GlideMetrics glide_metrics(const Trajectory& traj);

// Columns t,x,y,z,phi,theta,psi,u,v,w,p,q,r,rbar_x,alpha,beta,V,R,Vz. rbar_x
// is the displacement from rbar0; R uses the given smoothing window.
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj,
                          const VehicleParams& params, double window = 1.0);

}  // namespace blimp
