#pragma once

#include <Eigen/Core>

#include "blimp/aero.hpp"
#include "blimp/frames.hpp"
#include "blimp/params.hpp"

namespace blimp {

using Vec9 = Eigen::Matrix<double, 9, 1>;
using Mat9 = Eigen::Matrix<double, 9, 9>;
using StateVector = Eigen::Matrix<double, 18, 1>;

// Full vehicle state. Layout of the packed vector:
// [p(3), e(3), v(3), w(3), rbar(3), rbardot(3)].
struct State {
  Vec3 p = Vec3::Zero();        // inertial position [m], z down
  EulerAngles e;                // attitude [rad]
  Vec3 v = Vec3::Zero();        // body velocity (u, v, w) [m/s]
  Vec3 w = Vec3::Zero();        // body rates (p, q, r) [rad/s]
  Vec3 rbar = Vec3::Zero();     // moving-mass position in the body frame [m]
  Vec3 rbardot = Vec3::Zero();  // [m/s]

  StateVector pack() const;
  static State unpack(const StateVector& x);
};

struct ControlInput {
  double Fl = 0.0;             // left thrust [N]
  double Fr = 0.0;             // right thrust [N]
  Vec3 Fbar = Vec3::Zero();    // commanded moving-mass acceleration [m/s^2]
};

struct StateDerivative {
  Vec3 pdot, edot, vdot, wdot, rbardot, rbarddot;

  StateVector pack() const;
};

// Which thrust yaw-moment arm to use. kRailOffset keeps the moving-mass
// lateral offset, (rbar_y +/- d); kSymmetricArm uses (Fl - Fr) d only.
enum class ThrustYawForm { kRailOffset, kSymmetricArm };

struct ModelOptions {
  // Drop the CG-CB coupling terms (l_g in the mass matrix and the
  // Coriolis/centrifugal terms) the way a conventional blimp model does.
  // The gravity restoring torque is kept.
  bool legacy = false;
  ThrustYawForm yaw_form = ThrustYawForm::kRailOffset;
};

struct Vehicle {
  VehicleParams params;
  AeroModel aero;
  ModelOptions options;
};

struct CompositeCg {
  Vec3 l_g;  // m r + mbar rbar [kg m]
  Vec3 r_g;  // l_g / (m + mbar) [m]
};

CompositeCg composite_cg(const VehicleParams& p, const Vec3& rbar);

// Inertia of stationary body plus point moving mass about the CB.
Mat3 composite_inertia(const VehicleParams& p, const Vec3& rbar);

// Generalized force excluding thrust [N].
Vec3 generalized_force(const State& s, const Vec3& aero_force, const VehicleParams& p,
                       const ModelOptions& opt = {});

// Generalized torque excluding thrust [N m].
Vec3 generalized_torque(const State& s, const Vec3& aero_torque, const VehicleParams& p,
                        const ModelOptions& opt = {});

// The 9x9 matrix M with M * (vdot, wdot, rbarddot) = rhs. Callers solve it;
// it is never inverted.
Mat9 mass_matrix(const VehicleParams& p, const Vec3& rbar, const ModelOptions& opt = {});

// Input map before the mass-matrix solve: columns (Fl, Fr, Fbar_x..z).
Eigen::Matrix<double, 9, 5> input_matrix(const VehicleParams& p, const Vec3& rbar,
                                         const ModelOptions& opt = {});

// Thrust force and moment about the CB in the body frame.
struct ThrustLoads {
  Vec3 force;
  Vec3 torque;
};
ThrustLoads thrust_loads(double Fl, double Fr, const VehicleParams& p, const Vec3& rbar,
                         const ModelOptions& opt = {});

// Full state derivative. Throws Error(kGimbalLock) and Error(kSingularMass).
StateDerivative state_derivative(const State& s, const ControlInput& u, const Vehicle& veh);

// Kinetic plus potential energy for the conservative case (no aero, no
// thrust, moving mass at rest), z down:
// 0.5 xi^T M6 xi - (m + mbar - B/g) g z - g (R l_g)_z.
double mechanical_energy(const State& s, const VehicleParams& p);

}  // namespace blimp
