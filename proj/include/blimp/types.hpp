#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace blimp {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Gravity used at the gram-force boundary (1 gf = kGfGravity * 1e-3 N).
inline constexpr double kGfGravity = 9.80;
inline constexpr double kPi = 3.14159265358979323846;

inline constexpr double gf_to_newton(double gf) { return gf * kGfGravity * 1e-3; }
inline constexpr double newton_to_gf(double n) { return n / (kGfGravity * 1e-3); }
inline constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

enum class ErrorCode {
  kGimbalLock,
  kSingularMass,
  kNoConvergence,
  kContinuationBreakdown,
  kDegenerateModel,
  kDegenerateDescent,
  kEigenFailure,
  kNotSteady,
  kRankDeficient,
  kInsufficientSpan,
  kNonFinite,
  kSchemaError,
  kUnitError,
  kConfigError,
  kIoError,
};

const char* to_string(ErrorCode code);

// Usage/IO-class errors map to CLI exit status 2; everything else is a domain
// error (exit status 1).
bool is_usage_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Skew-symmetric cross-product matrix: skew(a) * b == a.cross(b).
inline Mat3 skew(const Vec3& a) {
  Mat3 s;
  s << 0.0, -a.z(), a.y(),
       a.z(), 0.0, -a.x(),
       -a.y(), a.x(), 0.0;
  return s;
}

}  // namespace blimp
