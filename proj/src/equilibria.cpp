#include "blimp/equilibria.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "blimp/csv.hpp"

namespace blimp {

const char* to_string(SteadyKind k) { return k == SteadyKind::kStraight ? "straight" : "spiral"; }

SteadySolution make_steady(double theta, double phi, double psidot, double V, double alpha,
                           double beta) {
  SteadySolution s;
  s.theta = theta;
  s.phi = phi;
  s.psidot = psidot;
  s.V = V;
  s.alpha = alpha;
  s.beta = beta;
  s.v_b = body_velocity({alpha, beta, V});
  s.w_b = psidot * down_in_body({phi, theta, 0.0});
  return s;
}

State steady_state(const SteadySolution& sol, const Vec3& rbar) {
  State s;
  s.e = {sol.phi, sol.theta, 0.0};
  s.v = sol.v_b;
  s.w = sol.w_b;
  s.rbar = rbar;
  return s;
}

Vec3 inertial_velocity(const SteadySolution& sol) {
  return rotation_body_to_inertial({sol.phi, sol.theta, 0.0}) * sol.v_b;
}

double turning_radius(const SteadySolution& sol) {
  if (std::abs(sol.psidot) < 1e-12) return std::numeric_limits<double>::infinity();
  const Vec3 vi = inertial_velocity(sol);
  return std::hypot(vi.x(), vi.y()) / std::abs(sol.psidot);
}

Vec6 steady_residual(const SteadySolution& sol, const ControlInput& u, const Vec3& rbar,
                     const Vehicle& veh) {
  const VehicleParams& p = veh.params;
  const State s = steady_state(sol, rbar);
  const AeroAngles aa{sol.alpha, sol.beta, sol.V};
  const BodyLoads aero = loads_to_body(aa, aero_loads(veh.aero, aa, s.w, p.rho));
  const ThrustLoads thrust = thrust_loads(u.Fl, u.Fr, p, rbar, veh.options);

  const double w = p.total_mass() * p.g;
  Vec6 r;
  r.head<3>() = (generalized_force(s, aero.force, p, veh.options) + thrust.force) / w;
  r.tail<3>() = (generalized_torque(s, aero.torque, p, veh.options) + thrust.torque) /
                (w * std::max(rbar.norm(), 0.1));
  return r;
}

namespace {

using Residual = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct NewtonResult {
  Eigen::VectorXd x;
  double norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

NewtonResult damped_newton(const Residual& f, Eigen::VectorXd x, const SolverOptions& opt) {
  Eigen::VectorXd r = f(x);
  double n = r.norm();
  NewtonResult out{x, n, 0, false};
  if (!std::isfinite(n)) return out;
  if (n < 1e-14) {
    out.converged = true;
    return out;
  }
  const Eigen::Index m = x.size();
  for (int it = 1; it <= opt.max_iter; ++it) {
    Eigen::MatrixXd jac(r.size(), m);
    for (Eigen::Index j = 0; j < m; ++j) {
      const double h = 1e-7 * std::max(1.0, std::abs(x[j]));
      Eigen::VectorXd xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      jac.col(j) = (f(xp) - f(xm)) / (2.0 * h);
    }
    const Eigen::VectorXd dx = jac.completeOrthogonalDecomposition().solve(-r);
    if (!dx.allFinite()) break;

    double lam = 1.0;
    bool improved = false;
    Eigen::VectorXd xn, rn;
    double nn = 0.0;
    for (int k = 0; k <= opt.max_halvings; ++k) {
      xn = x + lam * dx;
      rn = f(xn);
      nn = rn.norm();
      if (std::isfinite(nn) && nn < n) {
        improved = true;
        break;
      }
      lam *= 0.5;
    }
    out.iterations = it;
    const double step = lam * dx.norm();
    if (!improved) {
      // Stalled at the rounding floor counts as converged.
      out.converged = n < opt.tol && step < opt.step_tol;
      return out;
    }
    x = xn;
    r = rn;
    n = nn;
    out.x = x;
    out.norm = n;
    if ((n < opt.tol && step < opt.step_tol) || n < 1e-14) {
      out.converged = true;
      return out;
    }
  }
  return out;
}

SteadySolution finish(SteadySolution s, double Fl, double Fr, const Vec3& rbar,
                      const Vehicle& veh, SteadyKind kind, double norm, int iterations) {
  s.kind = kind;
  s.Fl = Fl;
  s.Fr = Fr;
  s.rbar = rbar;
  s.iterations = iterations;
  const Vec6 r = steady_residual(s, {Fl, Fr, Vec3::Zero()}, rbar, veh);
  if (kind == SteadyKind::kStraight) {
    s.residual_norm = std::hypot(r[0], r[2], r[4]);
    s.lateral_residual = std::hypot(r[1], r[3], r[5]);
  } else {
    s.residual_norm = norm;
    s.lateral_residual = 0.0;
  }
  s.stalled = std::abs(s.alpha) > veh.aero.alpha_stall;
  return s;
}

Eigen::VectorXd pack6(const SteadySolution& s) {
  Eigen::VectorXd x(6);
  x << s.theta, s.phi, s.psidot, s.V, s.alpha, s.beta;
  return x;
}

SteadySolution unpack6(const Eigen::VectorXd& x) {
  return make_steady(x[0], x[1], x[2], x[3], x[4], x[5]);
}

std::optional<SteadySolution> try_spiral(const SteadySolution& start, double Fl, double Fr,
                                         const Vec3& rbar, const Vehicle& veh,
                                         const SolverOptions& opt) {
  const ControlInput u{Fl, Fr, Vec3::Zero()};
  const Residual f = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return steady_residual(unpack6(x), u, rbar, veh);
  };
  const NewtonResult nr = damped_newton(f, pack6(start), opt);
  if (!nr.converged || !(nr.x[3] > 0.0)) return std::nullopt;
  return finish(unpack6(nr.x), Fl, Fr, rbar, veh, SteadyKind::kSpiral, nr.norm, nr.iterations);
}

// Ramps thrust asymmetry from zero to (Fl - Fr) at fixed rbar.
std::optional<SteadySolution> thrust_ramp(double dr_x, double Fl, double Fr, const Vehicle& veh,
                                          const SolverOptions& opt, int steps) {
  const Vec3 rbar = veh.params.rbar_at(dr_x);
  const double mean = 0.5 * (Fl + Fr);
  const double half = 0.5 * (Fl - Fr);
  SteadySolution cur;
  try {
    cur = solve_straight(dr_x, mean, veh, opt);
  } catch (const Error&) {
    return std::nullopt;
  }
  for (int k = 1; k <= steps; ++k) {
    const double s = static_cast<double>(k) / steps;
    auto next = try_spiral(cur, mean + s * half, mean - s * half, rbar, veh, opt);
    if (!next) return std::nullopt;
    cur = *next;
  }
  return cur;
}

void check_rail(double dr_x, const VehicleParams& p) {
  if (!(std::abs(dr_x) <= p.rail_limit)) {
    throw Error(ErrorCode::kConfigError, "dr_x=" + format_number(dr_x * 1e2) +
                                             " cm is outside the rail limit of +-" +
                                             format_number(p.rail_limit * 1e2) + " cm");
  }
}

}  // namespace

SteadyGuess straight_guess(const Vehicle& veh, double V0) {
  const VehicleParams& p = veh.params;
  const ChannelCoeffs& cl = veh.aero[Channel::kL];
  const double qa = 0.5 * p.rho * V0 * V0 * veh.aero.A_ref;
  double alpha = 0.0;
  if (qa > 0.0 && cl.calpha != 0.0) alpha = (p.net_weight() / qa - cl.c0) / cl.calpha;
  alpha = std::clamp(alpha, -deg_to_rad(10.0), deg_to_rad(15.0));
  return {alpha, V0, alpha};
}

SteadySolution solve_straight(double dr_x, double F, const Vehicle& veh,
                              const SolverOptions& opt) {
  check_rail(dr_x, veh.params);
  const Vec3 rbar = veh.params.rbar_at(dr_x);
  const ControlInput u{F, F, Vec3::Zero()};
  const Residual f = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    const Vec6 r = steady_residual(make_steady(x[0], 0.0, 0.0, x[1], x[2], 0.0), u, rbar, veh);
    return Eigen::Vector3d(r[0], r[2], r[4]);
  };

  std::vector<SteadyGuess> guesses;
  if (opt.guess) {
    guesses.push_back(*opt.guess);
  } else {
    for (double v0 : {opt.V0, 0.5 * opt.V0, 2.0 * opt.V0}) guesses.push_back(straight_guess(veh, v0));
  }
  NewtonResult best;
  best.norm = std::numeric_limits<double>::infinity();
  for (const SteadyGuess& g : guesses) {
    const NewtonResult nr = damped_newton(f, Eigen::Vector3d(g.theta, g.V, g.alpha), opt);
    // V <= 0 roots are mirror images of the residual, not flight states.
    if (nr.converged && nr.x[1] > 0.0) {
      return finish(make_steady(nr.x[0], 0.0, 0.0, nr.x[1], nr.x[2], 0.0), F, F, rbar, veh,
                    SteadyKind::kStraight, nr.norm, nr.iterations);
    }
    if (nr.norm < best.norm) best = nr;
  }
  throw Error(ErrorCode::kNoConvergence,
              "straight trim at dr_x=" + std::to_string(dr_x) + " m, F=" + std::to_string(F) +
                  " N did not converge (residual " + std::to_string(best.norm) + ")");
}

SteadySolution refine_spiral(const SteadySolution& start, double Fl, double Fr, const Vec3& rbar,
                             const Vehicle& veh, const SolverOptions& opt) {
  auto s = try_spiral(start, Fl, Fr, rbar, veh, opt);
  if (!s) throw Error(ErrorCode::kNoConvergence, "spiral Newton solve did not converge");
  return *s;
}

SteadySolution solve_spiral(double dr_x, double Fl, double Fr, const Vehicle& veh,
                            const SolverOptions& opt) {
  if (Fl == Fr) return solve_straight(dr_x, Fl, veh, opt);
  check_rail(dr_x, veh.params);
  const int steps = std::clamp(opt.ramp_steps, 1, 10);

  if (auto s = thrust_ramp(dr_x, Fl, Fr, veh, opt, steps)) return *s;

  // Fallback: reach the thrust target at dr_x = 0, then walk the moving mass.
  if (dr_x != 0.0) {
    if (auto s = thrust_ramp(0.0, Fl, Fr, veh, opt, steps)) {
      SteadySolution cur = *s;
      bool ok = true;
      for (int k = 1; k <= steps && ok; ++k) {
        const double dr = dr_x * static_cast<double>(k) / steps;
        auto next = try_spiral(cur, Fl, Fr, veh.params.rbar_at(dr), veh, opt);
        if (next) cur = *next;
        ok = next.has_value();
      }
      if (ok) return cur;
    }
  }
  throw Error(ErrorCode::kContinuationBreakdown,
              "spiral at dr_x=" + std::to_string(dr_x) + " m, Fl=" + std::to_string(Fl) +
                  " N, Fr=" + std::to_string(Fr) + " N: continuation failed");
}

SteadySolution solve_steady(double dr_x, double Fl, double Fr, const Vehicle& veh,
                            const SolverOptions& opt) {
  if (Fl != Fr) return solve_spiral(dr_x, Fl, Fr, veh, opt);
  const SteadySolution planar = solve_straight(dr_x, Fl, veh, opt);
  SteadySolution s = refine_spiral(planar, Fl, Fr, planar.rbar, veh, opt);
  s.kind = SteadyKind::kStraight;
  return s;
}

ReducedState reduced_state(const SteadySolution& sol) {
  ReducedState x;
  x << sol.phi, sol.theta, sol.v_b, sol.w_b;
  return x;
}

ReducedState reduced_derivative(const ReducedState& x, const ControlInput& u, const Vec3& rbar,
                                const Vehicle& veh) {
  State s;
  s.e = {x[0], x[1], 0.0};
  s.v = x.segment<3>(2);
  s.w = x.segment<3>(5);
  s.rbar = rbar;
  ControlInput frozen = u;
  frozen.Fbar = Vec3::Zero();
  const StateDerivative d = state_derivative(s, frozen, veh);
  ReducedState out;
  out << d.edot.x(), d.edot.y(), d.vdot, d.wdot;
  return out;
}

Mat8 linearize(const SteadySolution& sol, const ControlInput& u, const Vec3& rbar,
               const Vehicle& veh, double step_scale) {
  const ReducedState x0 = reduced_state(sol);
  Mat8 a;
  for (int j = 0; j < 8; ++j) {
    const double h = step_scale * std::max(1e-6, 1e-4 * std::abs(x0[j]));
    ReducedState xp = x0, xm = x0;
    xp[j] += h;
    xm[j] -= h;
    a.col(j) = (reduced_derivative(xp, u, rbar, veh) - reduced_derivative(xm, u, rbar, veh)) /
               (2.0 * h);
  }
  return a;
}

StabilityReport eigen_report(const Eigen::MatrixXd& a) {
  if (!a.allFinite() || a.rows() != a.cols()) {
    throw Error(ErrorCode::kEigenFailure, "matrix is not square and finite");
  }
  const Eigen::EigenSolver<Eigen::MatrixXd> es(a, false);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::kEigenFailure, "nonsymmetric eigensolve did not converge");
  }
  StabilityReport rep;
  const auto ev = es.eigenvalues();
  rep.eigenvalues.assign(ev.data(), ev.data() + ev.size());
  std::sort(rep.eigenvalues.begin(), rep.eigenvalues.end(),
            [](const auto& l, const auto& r) {
              if (l.real() != r.real()) return l.real() > r.real();
              return l.imag() > r.imag();
            });
  rep.hurwitz = true;
  bool found = false;
  for (const auto& l : rep.eigenvalues) {
    if (std::abs(l) < kNeutralEigenvalue) continue;
    if (!found) {
      rep.slowest_mode = l;
      found = true;
    }
    if (l.real() >= 0.0) rep.hurwitz = false;
  }
  return rep;
}

}  // namespace blimp
