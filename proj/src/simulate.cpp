#include "blimp/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "blimp/csv.hpp"

namespace blimp {

void InputSchedule::validate() const {
  if (segments.empty()) throw Error(ErrorCode::kSchemaError, "schedule has no segments");
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& s = segments[i];
    const std::string where = "schedule segment " + std::to_string(i + 1);
    if (!(s.t_end > s.t_start)) throw Error(ErrorCode::kSchemaError, where + ": t_end <= t_start");
    if (i > 0 && std::abs(s.t_start - segments[i - 1].t_end) > 1e-9) {
      throw Error(ErrorCode::kSchemaError, where + ": not contiguous with the previous segment");
    }
    if (!(s.Fl >= 0.0) || !(s.Fr >= 0.0)) {
      throw Error(ErrorCode::kSchemaError, where + ": negative thrust");
    }
  }
}

InputSchedule InputSchedule::constant(double Fl, double Fr, double T) {
  return {{{0.0, T, Fl, Fr, MassCommand::kHold, 0.0}}};
}

InputSchedule load_schedule(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  require_header(t, {"t_start", "t_end", "Fl_gf", "Fr_gf", "mm_cmd", "mm_target_cm"}, path);
  InputSchedule s;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    const std::size_t ln = t.line_numbers[i];
    ScheduleSegment seg;
    seg.t_start = parse_double(row[0], path, ln, "t_start");
    seg.t_end = parse_double(row[1], path, ln, "t_end");
    seg.Fl = gf_to_newton(parse_double(row[2], path, ln, "Fl_gf"));
    seg.Fr = gf_to_newton(parse_double(row[3], path, ln, "Fr_gf"));
    if (row[4] == "hold") {
      seg.cmd = MassCommand::kHold;
    } else if (row[4] == "goto") {
      seg.cmd = MassCommand::kGoto;
    } else {
      throw Error(ErrorCode::kSchemaError, path.string() + ":" + std::to_string(ln) +
                                               ": mm_cmd must be hold or goto, got '" + row[4] +
                                               "'");
    }
    seg.target_dr = parse_double(row[5], path, ln, "mm_target_cm") * 1e-2;
    s.segments.push_back(seg);
  }
  try {
    s.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kSchemaError, path.string() + ": " + e.what());
  }
  return s;
}

void write_schedule(const std::filesystem::path& path, const InputSchedule& s) {
  CsvWriter w(path);
  w.header({"t_start", "t_end", "Fl_gf", "Fr_gf", "mm_cmd", "mm_target_cm"});
  for (const auto& seg : s.segments) {
    w.cell(seg.t_start).cell(seg.t_end).cell(newton_to_gf(seg.Fl)).cell(newton_to_gf(seg.Fr));
    w.cell(seg.cmd == MassCommand::kGoto ? "goto" : "hold").cell(seg.target_dr * 1e2);
    w.end_row();
  }
}

double MassProfile::at_step(int k) const {
  if (k < 0 || k >= total_steps()) return 0.0;
  if (k < accel_steps) return accel;
  if (k < accel_steps + cruise_steps) return 0.0;
  return -accel;
}

MassProfile plan_mass_move(double distance, double dt, const MovingMassLimits& lim) {
  MassProfile p;
  const double dist = std::abs(distance);
  if (dist == 0.0) return p;
  const double ta = lim.vmax / lim.amax;
  if (dist >= lim.vmax * ta) {
    p.accel_steps = static_cast<int>(std::ceil(ta / dt - 1e-9));
    p.cruise_steps = static_cast<int>(std::ceil((dist / lim.vmax - ta) / dt - 1e-9));
  } else {
    p.accel_steps = static_cast<int>(std::ceil(std::sqrt(dist / lim.amax) / dt - 1e-9));
  }
  p.accel_steps = std::max(p.accel_steps, 1);
  p.accel = distance / (dt * dt * p.accel_steps * (p.accel_steps + p.cruise_steps));
  return p;
}

const char* to_string(TrajectoryStatus s) {
  switch (s) {
    case TrajectoryStatus::kComplete: return "complete";
    case TrajectoryStatus::kGimbalLock: return "GimbalLock";
    case TrajectoryStatus::kNonFinite: return "NonFinite";
  }
  return "?";
}

State rk4_step(const State& x, const ControlInput& u, const Vehicle& veh, double dt) {
  const StateVector x0 = x.pack();
  const StateVector k1 = state_derivative(x, u, veh).pack();
  const StateVector k2 = state_derivative(State::unpack(x0 + 0.5 * dt * k1), u, veh).pack();
  const StateVector k3 = state_derivative(State::unpack(x0 + 0.5 * dt * k2), u, veh).pack();
  const StateVector k4 = state_derivative(State::unpack(x0 + dt * k3), u, veh).pack();
  return State::unpack(x0 + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

namespace {

struct StepPlan {
  long first = 0;  // first step index of the segment
  long last = 0;   // one past the last step index
};

}  // namespace

Trajectory integrate(const State& x0, const InputSchedule& sched, const Vehicle& veh, double dt,
                     double T, const MovingMassLimits& lim) {
  if (!(dt > 0.0 && dt <= 0.05)) throw Error(ErrorCode::kConfigError, "dt must lie in (0, 0.05]");
  if (!(T > 0.0)) throw Error(ErrorCode::kConfigError, "T must be positive");
  sched.validate();

  const long n_steps = static_cast<long>(std::floor(T / dt + 1e-9));
  std::vector<StepPlan> plan;
  for (const auto& s : sched.segments) {
    plan.push_back({std::lround(s.t_start / dt), std::lround(s.t_end / dt)});
  }

  Trajectory tr;
  tr.dt = dt;
  tr.t.reserve(n_steps + 1);
  tr.states.reserve(n_steps + 1);
  tr.inputs.reserve(n_steps + 1);

  State x = x0;
  std::size_t seg = 0;
  MassProfile profile;
  long profile_start = 0;
  bool entered = false;

  for (long k = 0; k <= n_steps; ++k) {
    while (seg + 1 < plan.size() && k >= plan[seg].last) {
      ++seg;
      entered = false;
    }
    const ScheduleSegment& s = sched.segments[seg];
    if (!entered) {
      profile = {};
      if (s.cmd == MassCommand::kGoto && k >= plan[seg].first) {
        const double target = veh.params.rbar0.x() + s.target_dr;
        profile = plan_mass_move(target - x.rbar.x(), dt, lim);
      }
      profile_start = k;
      entered = true;
    }
    ControlInput u{s.Fl, s.Fr, Vec3::Zero()};
    u.Fbar.x() = profile.at_step(static_cast<int>(k - profile_start));

    tr.t.push_back(static_cast<double>(k) * dt);
    tr.states.push_back(x);
    tr.inputs.push_back(u);
    if (k == n_steps) break;

    try {
      x = rk4_step(x, u, veh, dt);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kGimbalLock && e.code() != ErrorCode::kSingularMass) throw;
      tr.status = e.code() == ErrorCode::kGimbalLock ? TrajectoryStatus::kGimbalLock
                                                     : TrajectoryStatus::kNonFinite;
      tr.message = std::string(e.what()) + " at t=" + format_number(tr.t.back());
      return tr;
    }
    if (!x.pack().allFinite()) {
      tr.status = TrajectoryStatus::kNonFinite;
      tr.message = "non-finite state after t=" + format_number(tr.t.back());
      return tr;
    }
    if (!x.e.kinematically_valid()) {
      tr.status = TrajectoryStatus::kGimbalLock;
      tr.message = "pitch reached the gimbal-lock margin after t=" + format_number(tr.t.back());
      return tr;
    }
  }
  return tr;
}

double max_relative_drift(const Trajectory& traj, double floor) {
  if (traj.states.empty()) return 0.0;
  auto pick = [](const State& s) {
    Eigen::Matrix<double, 8, 1> x;
    x << s.e.phi, s.e.theta, s.v, s.w;
    return x;
  };
  const auto x0 = pick(traj.states.front());
  double worst = 0.0;
  for (const State& s : traj.states) {
    const auto x = pick(s);
    for (int i = 0; i < 8; ++i) {
      worst = std::max(worst, std::abs(x[i] - x0[i]) / std::max(std::abs(x0[i]), floor));
    }
  }
  return worst;
}

std::vector<double> yaw_rate_series(const Trajectory& traj) {
  std::vector<double> out;
  out.reserve(traj.size());
  for (const State& s : traj.states) out.push_back((euler_rate_matrix(s.e) * s.w).z());
  return out;
}

std::vector<double> turning_radius_series(const std::vector<double>& horizontal_speed,
                                          const std::vector<double>& yaw_rate, double dt,
                                          double window) {
  const std::size_t n = yaw_rate.size();
  std::vector<double> raw(n);
  for (std::size_t i = 0; i < n; ++i) {
    raw[i] = std::abs(yaw_rate[i]) < kStraightYawRate
                 ? std::numeric_limits<double>::infinity()
                 : horizontal_speed[i] / std::abs(yaw_rate[i]);
  }
  const long half = std::max(0L, std::lround(0.5 * window / dt));
  std::vector<double> out(n), buf;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= static_cast<std::size_t>(half) ? i - half : 0;
    const std::size_t hi = std::min(n - 1, i + half);
    buf.assign(raw.begin() + lo, raw.begin() + hi + 1);
    const std::size_t mid = buf.size() / 2;
    std::nth_element(buf.begin(), buf.begin() + mid, buf.end());
    double med = buf[mid];
    if (buf.size() % 2 == 0) {
      const double lower = *std::max_element(buf.begin(), buf.begin() + mid);
      med = std::isinf(med) || std::isinf(lower) ? std::max(med, lower) : 0.5 * (med + lower);
    }
    out[i] = med;
  }
  return out;
}

std::vector<double> turning_radius_series(const Trajectory& traj, double window) {
  std::vector<double> speed;
  speed.reserve(traj.size());
  for (const State& s : traj.states) {
    const Vec3 vi = rotation_body_to_inertial(s.e) * s.v;
    speed.push_back(std::hypot(vi.x(), vi.y()));
  }
  return turning_radius_series(speed, yaw_rate_series(traj), traj.dt, window);
}

GlideMetrics glide_metrics(const Trajectory& traj) {
  GlideMetrics g;
  for (const State& s : traj.states) {
    const Vec3 vi = rotation_body_to_inertial(s.e) * s.v;
    g.forward.push_back(std::hypot(vi.x(), vi.y()));
    g.descent.push_back(vi.z());
  }
  const std::size_t n = g.forward.size();
  const std::size_t start = n / 2;
  double fwd = 0.0, dsc = 0.0;
  for (std::size_t i = start; i < n; ++i) {
    fwd += g.forward[i];
    dsc += g.descent[i];
  }
  const double cnt = static_cast<double>(n - start);
  if (cnt == 0.0 || dsc / cnt < 1e-3) {
    throw Error(ErrorCode::kDegenerateDescent, "mean descent speed below 1e-3 m/s");
  }
  g.glide_ratio = fwd / dsc;
  return g;
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj,
                          const VehicleParams& params, double window) {
  const std::vector<double> radius = turning_radius_series(traj, window);
  CsvWriter w(path);
  w.header({"t", "x", "y", "z", "phi", "theta", "psi", "u", "v", "w", "p", "q", "r", "rbar_x",
            "alpha", "beta", "V", "R", "Vz"});
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const State& s = traj.states[i];
    const AeroAngles aa = aero_angles(s.v);
    const Vec3 vi = rotation_body_to_inertial(s.e) * s.v;
    w.cell(traj.t[i]);
    for (int j = 0; j < 3; ++j) w.cell(s.p[j]);
    w.cell(wrap_angle(s.e.phi)).cell(s.e.theta).cell(wrap_angle(s.e.psi));
    for (int j = 0; j < 3; ++j) w.cell(s.v[j]);
    for (int j = 0; j < 3; ++j) w.cell(s.w[j]);
    w.cell(s.rbar.x() - params.rbar0.x());
    w.cell(aa.alpha).cell(aa.beta).cell(aa.V).cell(radius[i]).cell(vi.z());
    w.end_row();
  }
}

}  // namespace blimp
