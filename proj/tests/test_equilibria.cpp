#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "blimp/equilibria.hpp"
#include "blimp/simulate.hpp"

namespace blimp {
namespace {

Vehicle published() { return {published_vehicle(), published_aero(), {}}; }
Vehicle symmetric() { return {symmetrized(published_vehicle()), symmetrized(published_aero()), {}}; }

const double k2gf = gf_to_newton(2.0);

ControlInput thrust(const SteadySolution& s) { return {s.Fl, s.Fr, Vec3::Zero()}; }

TEST(SteadyResidual, ConvergedSolutionIsSmall) {
  const Vehicle veh = published();
  const SteadySolution s = solve_spiral(0.01, gf_to_newton(1.5), gf_to_newton(5.5), veh);
  EXPECT_LT(steady_residual(s, thrust(s), s.rbar, veh).norm(), 1e-9);
  EXPECT_LT(s.residual_norm, 1e-9);
}

TEST(SteadyResidual, StraightCandidateHasNoLateralResidual) {
  const Vehicle veh = symmetric();
  const Vec3 rbar = veh.params.rbar_at(0.01);
  for (double th : {-0.1, 0.05, 0.3}) {
    const SteadySolution c = make_steady(th, 0.0, 0.0, 0.9, 0.1, 0.0);
    const Vec6 r = steady_residual(c, {k2gf, k2gf, Vec3::Zero()}, rbar, veh);
    EXPECT_EQ(r[1], 0.0);
    EXPECT_EQ(r[3], 0.0);
    EXPECT_EQ(r[5], 0.0);
  }
}

TEST(SteadyResidual, MatchesMassMatrixTimesAcceleration) {
  const Vehicle veh = published();
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const SteadySolution c =
        make_steady(0.3 * u(rng), 0.3 * u(rng), 0.3 * u(rng), 1.0 + 0.5 * u(rng), 0.2 * u(rng),
                    0.2 * u(rng));
    const Vec3 rbar = veh.params.rbar_at(0.04 * u(rng));
    const ControlInput in{0.02 + 0.01 * u(rng), 0.02 + 0.01 * u(rng), Vec3::Zero()};
    const Vec6 r = steady_residual(c, in, rbar, veh);
    const StateDerivative d = state_derivative(steady_state(c, rbar), in, veh);
    Vec6 acc;
    acc << d.vdot, d.wdot;
    const Vec6 lhs = mass_matrix(veh.params, rbar).topLeftCorner<6, 6>() * acc;
    const double w = veh.params.total_mass() * veh.params.g;
    const double scale = w * std::max(rbar.norm(), 0.1);
    EXPECT_LT((lhs.head<3>() / w - r.head<3>()).norm(), 1e-10);
    EXPECT_LT((lhs.tail<3>() / scale - r.tail<3>()).norm(), 1e-10);
  }
}

TEST(SolveStraight, PublishedGridConvergesMonotone) {
  const Vehicle veh = published();
  double prev = 1e9;
  for (int i = -5; i <= 5; ++i) {
    const SteadySolution s = solve_straight(i * 0.01, k2gf, veh);
    EXPECT_LT(s.residual_norm, 1e-9) << i;
    EXPECT_LT(s.theta, prev) << i;
    EXPECT_GT(s.V, 0.0);
    EXPECT_EQ(s.kind, SteadyKind::kStraight);
    prev = s.theta;
  }
}

TEST(SolveStraight, NeutralTestVehicle) {
  Vehicle veh;
  veh.params = published_vehicle();
  veh.params.r.setZero();
  veh.params.rbar0.setZero();
  veh.params.B = veh.params.total_mass() * veh.params.g;
  veh.aero.A_ref = 0.25;
  veh.aero[Channel::kL].calpha = 2.9;
  veh.aero[Channel::kD].calpha = 4.4;
  for (double V : {0.5, 1.0, 2.0}) {
    const SteadySolution at_zero = make_steady(0.0, 0.0, 0.0, V, 0.0, 0.0);
    EXPECT_EQ(steady_residual(at_zero, {}, Vec3::Zero(), veh).norm(), 0.0);
  }

  // Unpowered, every V is a root and Newton slides toward V = 0, so a thrust
  // balancing the zero-lift drag at 1 m/s pins the speed.
  veh.aero[Channel::kD].c0 = 0.2;
  const double F = 0.25 * veh.params.rho * veh.aero.A_ref * 0.2;
  SolverOptions opt;
  opt.guess = SteadyGuess{0.0, 1.1, 0.02};
  const SteadySolution s = solve_straight(0.0, F, veh, opt);
  EXPECT_NEAR(s.theta, 0.0, 1e-12);
  EXPECT_NEAR(s.alpha, 0.0, 1e-9);
  EXPECT_NEAR(s.V, 1.0, 1e-9);
  EXPECT_LT(s.residual_norm, 1e-9);
}

TEST(SolveStraight, StallAdvisoryReported) {
  const SteadySolution s = solve_straight(-0.05, k2gf, published());
  EXPECT_EQ(s.stalled, std::abs(s.alpha) > deg_to_rad(16.0));
}

TEST(SolveStraight, RailLimitEnforced) {
  for (double dr : {0.07, -0.2}) {
    try {
      solve_straight(dr, k2gf, published());
      FAIL() << dr;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kConfigError);
    }
    EXPECT_THROW(solve_spiral(dr, gf_to_newton(1.5), gf_to_newton(5.5), published()), Error);
  }
  VehicleParams wide = published_vehicle();
  wide.rail_limit = 0.1;
  EXPECT_NO_THROW(solve_straight(0.07, k2gf, {wide, published_aero(), {}}));
}

TEST(SolveSpiral, PublishedGridConverges) {
  const Vehicle veh = published();
  int n = 0;
  for (int i = -1; i <= 4; ++i) {
    for (double dF : {-3.2, -3.7, -4.2, -4.3, -4.4, -4.9}) {
      const SteadySolution s =
          solve_spiral(i * 0.01, gf_to_newton(0.5 * (7 + dF)), gf_to_newton(0.5 * (7 - dF)), veh);
      EXPECT_LT(s.residual_norm, 1e-9);
      EXPECT_EQ(s.kind, SteadyKind::kSpiral);
      EXPECT_LT(s.psidot, 0.0);  // stronger right propeller yaws the nose left
      ++n;
    }
  }
  EXPECT_EQ(n, 36);
}

TEST(SolveSpiral, MirrorSymmetry) {
  const Vehicle veh = symmetric();
  for (double dr : {-0.01, 0.02}) {
    for (double dF : {-3.2, -4.9}) {
      const double a = gf_to_newton(0.5 * (7 + dF)), b = gf_to_newton(0.5 * (7 - dF));
      const SteadySolution s = solve_spiral(dr, a, b, veh);
      const SteadySolution m = solve_spiral(dr, b, a, veh);
      EXPECT_NEAR(m.theta, s.theta, 1e-8);
      EXPECT_NEAR(m.V, s.V, 1e-8);
      EXPECT_NEAR(m.alpha, s.alpha, 1e-8);
      EXPECT_NEAR(m.phi, -s.phi, 1e-8);
      EXPECT_NEAR(m.psidot, -s.psidot, 1e-8);
      EXPECT_NEAR(m.beta, -s.beta, 1e-8);
    }
  }
}

TEST(SolveSpiral, EqualThrustReturnsStraight) {
  const Vehicle veh = symmetric();
  const SteadySolution s = solve_spiral(0.01, k2gf, k2gf, veh);
  const SteadySolution t = solve_straight(0.01, k2gf, veh);
  EXPECT_LT(std::abs(s.beta), 1e-10);
  EXPECT_LT(std::abs(s.phi), 1e-10);
  EXPECT_LT(std::abs(s.psidot), 1e-10);
  EXPECT_NEAR(s.theta, t.theta, 1e-12);
  EXPECT_EQ(s.kind, SteadyKind::kStraight);
  EXPECT_TRUE(std::isinf(turning_radius(s)));
}

TEST(SolveSteady, FullEquilibriumOfAsymmetricVehicle) {
  const Vehicle veh = published();
  const SteadySolution planar = solve_straight(0.0, k2gf, veh);
  EXPECT_GT(planar.lateral_residual, 1e-6);
  const SteadySolution full = solve_steady(0.0, k2gf, k2gf, veh);
  EXPECT_LT(steady_residual(full, thrust(full), full.rbar, veh).norm(), 1e-9);
  EXPECT_NEAR(full.theta, planar.theta, deg_to_rad(0.5));
}

// Algebraic least-squares circle through the horizontal track.
double circle_fit_radius(const Trajectory& tr, std::size_t from) {
  const std::size_t n = tr.size() - from;
  Eigen::MatrixXd a(n, 3);
  Eigen::VectorXd b(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3& p = tr.states[from + i].p;
    a.row(i) << p.x(), p.y(), 1.0;
    b[i] = -(p.x() * p.x() + p.y() * p.y());
  }
  const Eigen::Vector3d c = a.colPivHouseholderQr().solve(b);
  return std::sqrt(0.25 * (c[0] * c[0] + c[1] * c[1]) - c[2]);
}

TEST(SolveSpiral, RadiusMatchesCircleFit) {
  const Vehicle veh = published();
  const SteadySolution s = solve_spiral(0.0, gf_to_newton(1.5), gf_to_newton(5.5), veh);
  const Trajectory tr = integrate(steady_state(s, s.rbar), InputSchedule::constant(s.Fl, s.Fr, 60.0),
                                  veh, 0.005, 60.0);
  ASSERT_TRUE(tr.complete());
  const double fit = circle_fit_radius(tr, 0);
  EXPECT_NEAR(fit / turning_radius(s), 1.0, 0.02);
}

TEST(Linearize, PublishedSlowestMode) {
  const Vehicle veh = published();
  const SteadySolution s = solve_steady(0.0, k2gf, k2gf, veh);
  const StabilityReport r = eigen_report(linearize(s, thrust(s), s.rbar, veh));
  EXPECT_TRUE(r.hurwitz);
  EXPECT_NEAR(r.slowest_mode.real(), -0.37, 0.10);
  EXPECT_EQ(r.eigenvalues.size(), 8u);
}

TEST(Linearize, WinglessSlowestMode) {
  const Vehicle veh{wingless_vehicle(), wingless_aero(), {}};
  const SteadySolution s = solve_straight(0.0, k2gf, veh);
  const StabilityReport r = eigen_report(linearize(s, thrust(s), s.rbar, veh));
  EXPECT_TRUE(r.hurwitz);
  EXPECT_NEAR(r.slowest_mode.real(), -0.06, 0.05);
}

TEST(Linearize, StraightGridAllHurwitz) {
  const Vehicle veh = published();
  for (int i = -5; i <= 5; ++i) {
    const SteadySolution s = solve_straight(i * 0.01, k2gf, veh);
    EXPECT_TRUE(eigen_report(linearize(s, thrust(s), s.rbar, veh)).hurwitz) << i;
  }
}

TEST(Linearize, RichardsonConsistency) {
  const Vehicle veh = published();
  const SteadySolution s = solve_spiral(0.01, gf_to_newton(1.5), gf_to_newton(5.5), veh);
  const Mat8 a1 = linearize(s, thrust(s), s.rbar, veh, 1.0);
  const Mat8 a2 = linearize(s, thrust(s), s.rbar, veh, 0.5);
  const Mat8 extrapolated = (4.0 * a2 - a1) / 3.0;
  for (int j = 0; j < 8; ++j) {
    const double scale = 1.0 + a2.col(j).norm();
    EXPECT_LT((a2.col(j) - extrapolated.col(j)).norm() / scale, 1e-6) << "column " << j;
  }
}

TEST(EigenReport, Diagonal) {
  Eigen::VectorXd d(8);
  d << -1, -2, -3, -4, -5, -6, -7, -8;
  const StabilityReport r = eigen_report(d.asDiagonal().toDenseMatrix());
  ASSERT_EQ(r.eigenvalues.size(), 8u);
  for (int i = 0; i < 8; ++i) EXPECT_NEAR(r.eigenvalues[i].real(), -(i + 1), 1e-12);
  EXPECT_NEAR(r.slowest_mode.real(), -1.0, 1e-12);
  EXPECT_TRUE(r.hurwitz);
}

TEST(EigenReport, ImaginaryPairIsNotHurwitz) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(8, 8);
  for (int i = 2; i < 8; ++i) a(i, i) = -i;
  a(0, 1) = 1.0;
  a(1, 0) = -1.0;
  const StabilityReport r = eigen_report(a);
  EXPECT_FALSE(r.hurwitz);
  EXPECT_NEAR(std::abs(r.eigenvalues[0].imag()), 1.0, 1e-12);
  EXPECT_NEAR(r.eigenvalues[0].real(), 0.0, 1e-12);
}

TEST(EigenReport, ConstructedSpectrum) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd m(8, 8);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) m(i, j) = u(rng);
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(m).householderQ();
  Eigen::VectorXd d(8);
  d << -0.1, -0.5, -0.9, -1.3, -2.0, -3.5, -5.0, -8.0;
  const StabilityReport r = eigen_report(q.transpose() * d.asDiagonal() * q);
  for (int i = 0; i < 8; ++i) {
    EXPECT_NEAR(r.eigenvalues[i].real(), d[i], 1e-8);
    EXPECT_NEAR(r.eigenvalues[i].imag(), 0.0, 1e-8);
  }
}

TEST(EigenReport, NonFiniteThrows) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(8, 8);
  a(3, 3) = std::nan("");
  try {
    eigen_report(a);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEigenFailure);
  }
}

}  // namespace
}  // namespace blimp
