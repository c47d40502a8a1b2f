#pragma once

#include "blimp/types.hpp"

namespace blimp {

// Constant physical properties of the vehicle, SI throughout. The body frame
// originates at the centre of buoyancy (CB): x forward, y right, z down.
struct VehicleParams {
  double m = 0.0;                  // stationary mass [kg]
  double mbar = 0.0;               // moving mass (gondola) [kg]
  Mat3 inertia = Mat3::Zero();     // stationary-body inertia about the CB [kg m^2]
  Vec3 r = Vec3::Zero();           // stationary-mass CG offset from the CB [m]
  Vec3 rbar0 = Vec3::Zero();       // moving-mass home position [m]
  double d = 0.0;                  // propeller offset from the x-O-z plane [m]
  double B = 0.0;                  // buoyant force [N]
  double rho = 0.0;                // air density [kg/m^3]
  double g = 0.0;                  // gravitational acceleration [m/s^2]
  double V_He = 0.0;               // lifting-gas volume [m^3]
  double A_ref = 0.0;              // aerodynamic reference area [m^2]
  double reynolds = 0.0;           // metadata only
  double rail_limit = 0.06;        // |moving-mass displacement| limit [m]

  double total_mass() const { return m + mbar; }
  // m + mbar - B/g [kg]; positive means heavier than air.
  double net_mass() const { return m + mbar - B / g; }
  // (m + mbar) g - B [N].
  double net_weight() const { return total_mass() * g - B; }

  // Moving-mass position for a longitudinal displacement along x_b.
  Vec3 rbar_at(double dr_x) const { return rbar0 + Vec3(dr_x, 0.0, 0.0); }

  // Throws Error(kConfigError) naming the first violated invariant.
  void validate() const;
};

// Reference area derived from the gas volume: V^(2/3).
double reference_area_from_volume(double volume);

// Mass budget, geometry and environment of the prototype as measured.
VehicleParams published_vehicle();

// Wingless counterpart: same mass distribution, ballasted to a lighter net
// weight (3.0 gf) since the body alone cannot carry the full 6.85 gf.
VehicleParams wingless_vehicle();

// Copy with every y-offset zeroed so the vehicle is exactly symmetric about
// its x-O-z plane.
VehicleParams symmetrized(const VehicleParams& p);

}  // namespace blimp
