#pragma once

#include <array>
#include <span>
#include <vector>

#include "blimp/frames.hpp"

namespace blimp {

// Aerodynamic channels in wind-frame order: drag, side force, lift and the
// roll/pitch/yaw moments.
enum class Channel : int { kD = 0, kS, kL, kM1, kM2, kM3 };
inline constexpr int kNumChannels = 6;
inline constexpr std::array<Channel, kNumChannels> kAllChannels = {
    Channel::kD, Channel::kS, Channel::kL, Channel::kM1, Channel::kM2, Channel::kM3};

const char* channel_name(Channel c);

// Fixed polynomial shape per channel: C = c0 + c_alpha * alpha^pa + c_beta * beta^pb.
struct ChannelShape {
  int alpha_power;
  int beta_power;
};
inline constexpr std::array<ChannelShape, kNumChannels> kChannelShapes = {{
    {2, 2},  // D
    {2, 1},  // S
    {1, 2},  // L
    {1, 1},  // M1
    {1, 4},  // M2
    {1, 1},  // M3
}};

inline constexpr ChannelShape shape_of(Channel c) { return kChannelShapes[static_cast<int>(c)]; }
inline constexpr bool is_moment(Channel c) { return static_cast<int>(c) >= 3; }

struct ChannelCoeffs {
  double c0 = 0.0;
  double calpha = 0.0;
  double cbeta = 0.0;
};

struct AeroModel {
  std::array<ChannelCoeffs, kNumChannels> channels{};
  Vec3 K = Vec3::Zero();  // rotational damping K1..K3 [N m s/rad], each <= 0
  double A_ref = 0.0;     // [m^2]
  double alpha_stall = deg_to_rad(16.0);
  double beta_limit = deg_to_rad(30.0);

  ChannelCoeffs& operator[](Channel c) { return channels[static_cast<int>(c)]; }
  const ChannelCoeffs& operator[](Channel c) const { return channels[static_cast<int>(c)]; }

  // Throws Error(kConfigError) if a damping term is positive or A_ref <= 0.
  void validate() const;
};

// Identified coefficients of the prototype.
AeroModel published_aero();

// Bundled wingless counterpart; reconstructed to reproduce its reported
// qualitative behaviour, not identified from data.
AeroModel wingless_aero();

// Zeroes the beta-even terms of the odd channels (S, M1, M3) so loads are
// exactly mirror-symmetric in beta.
AeroModel symmetrized(const AeroModel& m);

struct AeroCoefficients {
  std::array<double, kNumChannels> c{};
  bool stalled = false;            // |alpha| beyond the stall bound
  bool sideslip_exceeded = false;  // |beta| beyond the validity bound

  double operator[](Channel ch) const { return c[static_cast<int>(ch)]; }
};

AeroCoefficients eval_coeffs(const AeroModel& model, double alpha, double beta);

// Wind-frame loads.
struct AeroLoads {
  std::array<double, kNumChannels> v{};

  double& operator[](Channel ch) { return v[static_cast<int>(ch)]; }
  double operator[](Channel ch) const { return v[static_cast<int>(ch)]; }
  double D() const { return v[0]; }
  double S() const { return v[1]; }
  double L() const { return v[2]; }
  double M1() const { return v[3]; }
  double M2() const { return v[4]; }
  double M3() const { return v[5]; }
};

// Loads from dynamic pressure and damping against the body rates w.
AeroLoads aero_loads(const AeroModel& model, const AeroAngles& a, const Vec3& w, double rho);

struct BodyLoads {
  Vec3 force = Vec3::Zero();
  Vec3 torque = Vec3::Zero();
};

BodyLoads loads_to_body(const AeroAngles& a, const AeroLoads& loads);

struct LiftDragRow {
  double alpha = 0.0;
  double CL = 0.0;
  double CD = 0.0;
  double LD = 0.0;
};

struct LiftDragTable {
  std::vector<LiftDragRow> rows;
  double alpha_star = 0.0;  // argmax of C_L/C_D [rad]
  double max_LD = 0.0;
};

// Tabulates C_L, C_D and L/D over the alpha grid, then refines the maximum
// with a golden-section search between the grid neighbours of the best row.
// Throws Error(kDegenerateModel) if C_D <= 0 anywhere on the range.
LiftDragTable lift_drag_analysis(const AeroModel& model, std::span<const double> alphas,
                                 double beta);

// Evenly spaced grid [lo, hi] with the given step, endpoints included.
std::vector<double> alpha_grid(double lo, double hi, double step);

struct StabilitySlopes {
  double cm2_alpha = 0.0;  // [1/rad]
  double cm3_beta = 0.0;   // [1/rad]
};

StabilitySlopes stability_slopes(const AeroModel& model);

}  // namespace blimp
