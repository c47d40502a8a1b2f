#include "blimp/dynamics.hpp"

#include <Eigen/LU>

namespace blimp {

StateVector State::pack() const {
  StateVector x;
  x << p, e.phi, e.theta, e.psi, v, w, rbar, rbardot;
  return x;
}

State State::unpack(const StateVector& x) {
  State s;
  s.p = x.segment<3>(0);
  s.e = {x[3], x[4], x[5]};
  s.v = x.segment<3>(6);
  s.w = x.segment<3>(9);
  s.rbar = x.segment<3>(12);
  s.rbardot = x.segment<3>(15);
  return s;
}

StateVector StateDerivative::pack() const {
  StateVector x;
  x << pdot, edot, vdot, wdot, rbardot, rbarddot;
  return x;
}

CompositeCg composite_cg(const VehicleParams& p, const Vec3& rbar) {
  const Vec3 lg = p.m * p.r + p.mbar * rbar;
  return {lg, lg / p.total_mass()};
}

Mat3 composite_inertia(const VehicleParams& p, const Vec3& rbar) {
  const Mat3 s = skew(rbar);
  return p.inertia - p.mbar * s * s;
}

Vec3 generalized_force(const State& s, const Vec3& aero_force, const VehicleParams& p,
                       const ModelOptions& opt) {
  const Vec3 lg = composite_cg(p, s.rbar).l_g;
  Vec3 f = p.total_mass() * s.v.cross(s.w) + p.net_weight() * down_in_body(s.e) + aero_force +
           2.0 * p.mbar * s.rbardot.cross(s.w);
  if (!opt.legacy) f += s.w.cross(lg).cross(s.w);
  return f;
}

Vec3 generalized_torque(const State& s, const Vec3& aero_torque, const VehicleParams& p,
                        const ModelOptions& opt) {
  const Vec3 lg = composite_cg(p, s.rbar).l_g;
  const Mat3 jb = composite_inertia(p, s.rbar);
  Vec3 t = (jb * s.w).cross(s.w) + lg.cross(p.g * down_in_body(s.e)) + aero_torque +
           2.0 * p.mbar * s.rbar.cross(s.rbardot.cross(s.w));
  if (!opt.legacy) t += lg.cross(s.v.cross(s.w));
  return t;
}

Mat9 mass_matrix(const VehicleParams& p, const Vec3& rbar, const ModelOptions& opt) {
  const Mat3 i3 = Mat3::Identity();
  const Mat3 lgx = opt.legacy ? Mat3::Zero() : Mat3(skew(composite_cg(p, rbar).l_g));
  Mat9 m = Mat9::Zero();
  m.block<3, 3>(0, 0) = p.total_mass() * i3;
  m.block<3, 3>(0, 3) = -lgx;
  m.block<3, 3>(0, 6) = p.mbar * i3;
  m.block<3, 3>(3, 0) = lgx;
  m.block<3, 3>(3, 3) = composite_inertia(p, rbar);
  m.block<3, 3>(3, 6) = p.mbar * skew(rbar);
  m.block<3, 3>(6, 6) = i3;
  return m;
}

Eigen::Matrix<double, 9, 5> input_matrix(const VehicleParams& p, const Vec3& rbar,
                                         const ModelOptions& opt) {
  Eigen::Matrix<double, 9, 5> b = Eigen::Matrix<double, 9, 5>::Zero();
  const double arm_y = opt.yaw_form == ThrustYawForm::kRailOffset ? rbar.y() : 0.0;
  b(0, 0) = 1.0;
  b(4, 0) = rbar.z();
  b(5, 0) = arm_y + p.d;
  b(0, 1) = 1.0;
  b(4, 1) = rbar.z();
  b(5, 1) = arm_y - p.d;
  b.block<3, 3>(6, 2) = Mat3::Identity();
  return b;
}

ThrustLoads thrust_loads(double Fl, double Fr, const VehicleParams& p, const Vec3& rbar,
                         const ModelOptions& opt) {
  const auto b = input_matrix(p, rbar, opt);
  const Vec9 col = b.col(0) * Fl + b.col(1) * Fr;
  return {col.segment<3>(0), col.segment<3>(3)};
}

StateDerivative state_derivative(const State& s, const ControlInput& u, const Vehicle& veh) {
  const VehicleParams& p = veh.params;
  const Mat3 r = rotation_body_to_inertial(s.e);
  const Mat3 j = euler_rate_matrix(s.e);

  const AeroAngles aa = aero_angles(s.v);
  const BodyLoads aero = loads_to_body(aa, aero_loads(veh.aero, aa, s.w, p.rho));

  Vec9 rhs;
  rhs << generalized_force(s, aero.force, p, veh.options),
      generalized_torque(s, aero.torque, p, veh.options), Vec3::Zero();
  Eigen::Matrix<double, 5, 1> in;
  in << u.Fl, u.Fr, u.Fbar;
  rhs += input_matrix(p, s.rbar, veh.options) * in;

  const Eigen::PartialPivLU<Mat9> lu(mass_matrix(p, s.rbar, veh.options));
  const Vec9 acc = lu.solve(rhs);
  if (!acc.allFinite() || !(lu.rcond() > 1e-14)) {
    throw Error(ErrorCode::kSingularMass, "mass matrix solve failed");
  }

  StateDerivative d;
  d.pdot = r * s.v;
  d.edot = j * s.w;
  d.vdot = acc.segment<3>(0);
  d.wdot = acc.segment<3>(3);
  d.rbardot = s.rbardot;
  d.rbarddot = acc.segment<3>(6);
  return d;
}

double mechanical_energy(const State& s, const VehicleParams& p) {
  const Mat9 m = mass_matrix(p, s.rbar);
  Eigen::Matrix<double, 6, 1> xi;
  xi << s.v, s.w;
  const double kinetic = 0.5 * xi.dot(m.topLeftCorner<6, 6>() * xi);
  const Vec3 lg = composite_cg(p, s.rbar).l_g;
  const double cg_drop = (rotation_body_to_inertial(s.e) * lg).z();
  return kinetic - p.net_weight() * s.p.z() - p.g * cg_drop;
}

}  // namespace blimp
