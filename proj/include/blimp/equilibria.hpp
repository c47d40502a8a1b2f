#pragma once

#include <complex>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "blimp/dynamics.hpp"

namespace blimp {

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat8 = Eigen::Matrix<double, 8, 8>;

enum class SteadyKind { kStraight, kSpiral };

const char* to_string(SteadyKind k);

// Steady straight or spiral flight, parameterized by the six unknowns
// (theta, phi, psidot, V, alpha, beta). v_b and w_b are derived.
struct SteadySolution {
  double theta = 0.0;   // [rad]
  double phi = 0.0;     // [rad]
  double psidot = 0.0;  // [rad/s]
  double V = 0.0;       // [m/s]
  double alpha = 0.0;   // [rad]
  double beta = 0.0;    // [rad]
  Vec3 v_b = Vec3::Zero();
  Vec3 w_b = Vec3::Zero();
  double residual_norm = 0.0;
  // Straight solves balance only the planar components; this is the norm
  // of the remaining (Fy, Mx, Mz) residual.
  double lateral_residual = 0.0;
  SteadyKind kind = SteadyKind::kStraight;
  bool stalled = false;
  int iterations = 0;

  // Inputs the solution was computed for.
  double Fl = 0.0;
  double Fr = 0.0;
  Vec3 rbar = Vec3::Zero();
};

// Fills v_b = R_v^b (V, 0, 0) and w_b = psidot R^T k.
SteadySolution make_steady(double theta, double phi, double psidot, double V, double alpha,
                           double beta);

// Full state at psi = 0, origin, moving mass at rest at rbar.
State steady_state(const SteadySolution& sol, const Vec3& rbar);

// Inertial velocity at psi = 0 [m/s].
Vec3 inertial_velocity(const SteadySolution& sol);

// Horizontal speed over |psidot|; +inf for straight flight (|psidot| < 1e-12).
double turning_radius(const SteadySolution& sol);

// Force residual over (m+mbar) g, moment residual over (m+mbar) g max(|rbar|, 0.1 m).
// Fbar is ignored; the moving mass is held at rest.
Vec6 steady_residual(const SteadySolution& sol, const ControlInput& u, const Vec3& rbar,
                     const Vehicle& veh);

struct SteadyGuess {
  double theta = 0.0;
  double V = 1.0;
  double alpha = 0.0;
};

struct SolverOptions {
  double tol = 1e-9;        // nondimensional residual
  double step_tol = 1e-10;  // Newton step norm
  int max_iter = 100;
  int max_halvings = 20;
  int ramp_steps = 10;      // continuation steps, at most 10
  double V0 = 1.0;          // airspeed for the default straight-flight guess
  std::optional<SteadyGuess> guess;
};

// Lift-balance starting point: V = V0, theta = alpha with C_L(alpha) q A
// equal to the net weight minus nothing else.
SteadyGuess straight_guess(const Vehicle& veh, double V0);

// Planar trim at thrust F on each propeller. Throws Error(kNoConvergence).
SteadySolution solve_straight(double dr_x, double F, const Vehicle& veh,
                              const SolverOptions& opt = {});

// Steady spiral. Fl == Fr delegates to solve_straight. Throws
// Error(kContinuationBreakdown) if no continuation route reaches the target.
SteadySolution solve_spiral(double dr_x, double Fl, double Fr, const Vehicle& veh,
                            const SolverOptions& opt = {});

// Full six-unknown equilibrium for any thrust pair. With Fl == Fr this
// refines the planar trim, so an asymmetric vehicle gets its true (slightly
// turning) equilibrium. Throws like solve_spiral.
SteadySolution solve_steady(double dr_x, double Fl, double Fr, const Vehicle& veh,
                            const SolverOptions& opt = {});

// Spiral Newton solve from an explicit starting solution, no continuation.
// Throws Error(kNoConvergence).
SteadySolution refine_spiral(const SteadySolution& start, double Fl, double Fr, const Vec3& rbar,
                             const Vehicle& veh, const SolverOptions& opt = {});

// Reduced state (phi, theta, u, v, w, p, q, r).
using ReducedState = Eigen::Matrix<double, 8, 1>;

ReducedState reduced_state(const SteadySolution& sol);

// Derivative of the reduced state with the moving mass frozen at rbar.
ReducedState reduced_derivative(const ReducedState& x, const ControlInput& u, const Vec3& rbar,
                                const Vehicle& veh);

// Central-difference Jacobian of reduced_derivative at the solution with
// steps h_i = scale * max(1e-6, 1e-4 |x_i|); scale = 1 is the default.
Mat8 linearize(const SteadySolution& sol, const ControlInput& u, const Vec3& rbar,
               const Vehicle& veh, double step_scale = 1.0);

struct StabilityReport {
  std::vector<std::complex<double>> eigenvalues;  // sorted by descending real part
  std::complex<double> slowest_mode;
  bool hurwitz = false;
};

// Eigenvalues with |lambda| below this count as neutral.
inline constexpr double kNeutralEigenvalue = 1e-8;

// Throws Error(kEigenFailure) if the solver does not converge or the matrix
// is not finite.
StabilityReport eigen_report(const Eigen::MatrixXd& a);

}  // namespace blimp
