#include "blimp/frames.hpp"

#include <algorithm>
#include <cmath>

namespace blimp {

bool EulerAngles::kinematically_valid() const {
  return std::isfinite(phi) && std::isfinite(theta) && std::isfinite(psi) &&
         std::abs(theta) < kPi / 2 - kGimbalMargin;
}

double wrap_angle(double a) {
  double w = std::remainder(a, 2.0 * kPi);  // [-pi, pi]
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

Mat3 rotation_body_to_inertial(const EulerAngles& e) {
  const double cf = std::cos(e.phi), sf = std::sin(e.phi);
  const double ct = std::cos(e.theta), st = std::sin(e.theta);
  const double cp = std::cos(e.psi), sp = std::sin(e.psi);
  Mat3 r;
  r << cp * ct, cp * st * sf - sp * cf, cp * st * cf + sp * sf,
       sp * ct, sp * st * sf + cp * cf, sp * st * cf - cp * sf,
       -st,     ct * sf,                ct * cf;
  return r;
}

Mat3 euler_rate_matrix(const EulerAngles& e) {
  if (!(std::abs(e.theta) < kPi / 2 - kGimbalMargin)) {
    throw Error(ErrorCode::kGimbalLock,
                "pitch " + std::to_string(e.theta) + " rad is within the gimbal-lock margin");
  }
  const double cf = std::cos(e.phi), sf = std::sin(e.phi);
  const double ct = std::cos(e.theta), tt = std::tan(e.theta);
  Mat3 j;
  j << 1.0, sf * tt, cf * tt,
       0.0, cf, -sf,
       0.0, sf / ct, cf / ct;
  return j;
}

Mat3 euler_rate_matrix_inverse(const EulerAngles& e) {
  const double cf = std::cos(e.phi), sf = std::sin(e.phi);
  const double ct = std::cos(e.theta), st = std::sin(e.theta);
  Mat3 w;
  w << 1.0, 0.0, -st,
       0.0, cf, sf * ct,
       0.0, -sf, cf * ct;
  return w;
}

AeroAngles aero_angles(const Vec3& v) {
  AeroAngles a;
  a.V = v.norm();
  if (a.V < kMinAirspeed) return a;
  a.alpha = std::atan2(v.z(), v.x());
  a.beta = std::asin(std::clamp(v.y() / a.V, -1.0, 1.0));
  return a;
}

Mat3 wind_to_body(const AeroAngles& a) {
  const double ca = std::cos(a.alpha), sa = std::sin(a.alpha);
  const double cb = std::cos(a.beta), sb = std::sin(a.beta);
  Mat3 r;
  r << ca * cb, -ca * sb, -sa,
       sb,      cb,       0.0,
       sa * cb, -sa * sb, ca;
  return r;
}

Vec3 body_velocity(const AeroAngles& a) {
  const double ca = std::cos(a.alpha), sa = std::sin(a.alpha);
  const double cb = std::cos(a.beta), sb = std::sin(a.beta);
  return {a.V * ca * cb, a.V * sb, a.V * sa * cb};
}

Vec3 down_in_body(const EulerAngles& e) {
  const double cf = std::cos(e.phi), sf = std::sin(e.phi);
  const double ct = std::cos(e.theta), st = std::sin(e.theta);
  return {-st, ct * sf, ct * cf};
}

}  // namespace blimp
