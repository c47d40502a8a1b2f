#pragma once

#include "blimp/types.hpp"

namespace blimp {

// Gimbal-lock guard on pitch: |theta| must stay below pi/2 - kGimbalMargin.
inline constexpr double kGimbalMargin = 1e-3;
// Below this airspeed the aerodynamic angles are defined as zero.
inline constexpr double kMinAirspeed = 1e-6;

struct EulerAngles {
  double phi = 0.0;    // roll [rad]
  double theta = 0.0;  // pitch [rad]
  double psi = 0.0;    // yaw [rad]

  bool kinematically_valid() const;
};

struct AeroAngles {
  double alpha = 0.0;  // angle of attack [rad]
  double beta = 0.0;   // sideslip [rad]
  double V = 0.0;      // airspeed [m/s]
};

// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

// Body-to-inertial rotation R = R_psi * R_theta * R_phi (roll-pitch-yaw).
// The inertial frame has z pointing down.
Mat3 rotation_body_to_inertial(const EulerAngles& e);

// J such that edot = J * omega_b. Throws Error(kGimbalLock) near |theta| = pi/2.
Mat3 euler_rate_matrix(const EulerAngles& e);

// Inverse of euler_rate_matrix: omega_b = W * edot. Defined everywhere.
Mat3 euler_rate_matrix_inverse(const EulerAngles& e);

AeroAngles aero_angles(const Vec3& v_body);

// Rotation from the velocity (wind) frame to the body frame.
Mat3 wind_to_body(const AeroAngles& a);

// Body velocity for a given airspeed and aerodynamic angles:
// wind_to_body(a) * (V, 0, 0).
Vec3 body_velocity(const AeroAngles& a);

// R^T k: the inertial down axis expressed in the body frame.
Vec3 down_in_body(const EulerAngles& e);

}  // namespace blimp
