#include "blimp/params.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

namespace blimp {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::kConfigError, what);
}

}  // namespace

void VehicleParams::validate() const {
  require(m > 0.0, "m must be > 0");
  require(mbar > 0.0, "mbar must be > 0");
  require(B > 0.0, "buoyancy must be > 0");
  require(rho > 0.0, "rho must be > 0");
  require(g > 0.0, "g must be > 0");
  require(V_He > 0.0, "V_He must be > 0");
  require(A_ref > 0.0, "A_ref must be > 0");
  require(d > 0.0, "d must be > 0");
  require(rail_limit > 0.0, "rail_limit must be > 0");
  require(r.allFinite() && rbar0.allFinite() && inertia.allFinite(), "geometry must be finite");
  require((inertia - inertia.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * inertia.norm(),
          "inertia must be symmetric");
  Eigen::SelfAdjointEigenSolver<Mat3> es(inertia);
  require(es.eigenvalues().minCoeff() > 0.0, "inertia must be positive definite");
}

double reference_area_from_volume(double volume) { return std::cbrt(volume * volume); }

VehicleParams published_vehicle() {
  VehicleParams p;
  p.m = 104.81e-3;
  p.mbar = 54.08e-3;
  p.inertia = Vec3(0.030, 0.015, 0.010).asDiagonal();
  p.r = Vec3(-43.2, 0.3, 7.9) * 1e-3;
  p.rbar0 = Vec3(74.7, 0.6, 238.0) * 1e-3;
  p.d = 0.150;
  p.g = 9.80;
  p.B = 152.04e-3 * p.g;
  p.rho = 1.219;
  p.V_He = 0.125;
  p.A_ref = reference_area_from_volume(p.V_He);
  p.reynolds = 3.4e4;
  return p;
}

VehicleParams wingless_vehicle() {
  VehicleParams p = published_vehicle();
  p.B = p.total_mass() * p.g - 3.0e-3 * p.g;
  return p;
}

VehicleParams symmetrized(const VehicleParams& p) {
  VehicleParams s = p;
  s.r.y() = 0.0;
  s.rbar0.y() = 0.0;
  s.inertia(0, 1) = s.inertia(1, 0) = 0.0;
  s.inertia(1, 2) = s.inertia(2, 1) = 0.0;
  return s;
}

}  // namespace blimp
