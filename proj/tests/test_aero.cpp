#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <unistd.h>

#include <gtest/gtest.h>

#include "blimp/aero.hpp"
#include "blimp/config.hpp"
#include "blimp/params.hpp"

namespace blimp {
namespace {

namespace fs = std::filesystem;

AeroModel random_model(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> c(-2.0, 2.0), k(-0.1, 0.0);
  AeroModel m;
  for (auto& ch : m.channels) ch = {c(rng), c(rng), c(rng)};
  m.K = Vec3(k(rng), k(rng), k(rng));
  m.A_ref = 0.25;
  return m;
}

TEST(Coeffs, TableAtZeroAngles) {
  const AeroCoefficients c = eval_coeffs(published_aero(), 0.0, 0.0);
  const double expect[6] = {0.243, 0.001, 0.159, 0.001, 0.057, 0.001};
  for (int i = 0; i < 6; ++i) EXPECT_DOUBLE_EQ(c.c[i], expect[i]);
}

TEST(Coeffs, TableAtPositiveAlpha) {
  const AeroCoefficients c = eval_coeffs(published_aero(), 0.1868, 0.0);
  EXPECT_NEAR(c[Channel::kL], 0.7078, 1e-4);
  EXPECT_NEAR(c[Channel::kD], 0.3971, 1e-4);
}

TEST(Coeffs, ZeroModelIsZero) {
  const AeroModel zero;
  for (double a : {-0.3, 0.0, 0.2}) {
    for (double b : {-0.4, 0.1}) {
      for (double v : eval_coeffs(zero, a, b).c) EXPECT_EQ(v, 0.0);
    }
  }
}

TEST(Coeffs, ExponentShape) {
  AeroModel m;
  for (auto& ch : m.channels) ch = {0.0, 1.0, 1.0};
  const AeroCoefficients c = eval_coeffs(m, 0.3, -0.2);
  EXPECT_DOUBLE_EQ(c[Channel::kD], 0.09 + 0.04);
  EXPECT_DOUBLE_EQ(c[Channel::kS], 0.09 - 0.2);
  EXPECT_DOUBLE_EQ(c[Channel::kL], 0.3 + 0.04);
  EXPECT_DOUBLE_EQ(c[Channel::kM1], 0.3 - 0.2);
  EXPECT_NEAR(c[Channel::kM2], 0.3 + 0.0016, 1e-15);
  EXPECT_DOUBLE_EQ(c[Channel::kM3], 0.3 - 0.2);
}

TEST(Coeffs, StallFlagExactlyBeyondSixteenDegrees) {
  const AeroModel m = published_aero();
  const double s = deg_to_rad(16.0);
  EXPECT_FALSE(eval_coeffs(m, s, 0.0).stalled);
  EXPECT_FALSE(eval_coeffs(m, -s, 0.0).stalled);
  EXPECT_TRUE(eval_coeffs(m, std::nextafter(s, 1.0), 0.0).stalled);
  EXPECT_TRUE(eval_coeffs(m, -0.3, 0.0).stalled);
  EXPECT_TRUE(eval_coeffs(m, 0.0, deg_to_rad(31.0)).sideslip_exceeded);
  EXPECT_FALSE(eval_coeffs(m, 0.0, deg_to_rad(29.0)).sideslip_exceeded);
}

TEST(Loads, ZeroAirspeedZeroRates) {
  for (double v : aero_loads(published_aero(), {0.2, 0.1, 0.0}, Vec3::Zero(), 1.219).v) {
    EXPECT_EQ(v, 0.0);
  }
}

TEST(Loads, LiftAtBestGlideAngle) {
  const AeroLoads l = aero_loads(published_aero(), {0.1868, 0.0, 1.0}, Vec3::Zero(), 1.219);
  EXPECT_NEAR(l.L(), 0.10785, 1e-4);
  EXPECT_NEAR(newton_to_gf(l.L()), 11.0, 0.05);
}

TEST(Loads, RollDamping) {
  const AeroLoads l = aero_loads(published_aero(), {}, Vec3(1.0, 0.0, 0.0), 1.219);
  EXPECT_DOUBLE_EQ(l.M1(), -0.050);
  EXPECT_EQ(l.M2(), 0.0);
}

TEST(Loads, ScaleWithVelocitySquared) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 50; ++i) {
    const AeroModel m = random_model(rng);
    const AeroLoads base = aero_loads(m, {0.1, -0.05, 1.0}, Vec3::Zero(), 1.2);
    for (double V : {0.5, 2.0}) {
      const AeroLoads l = aero_loads(m, {0.1, -0.05, V}, Vec3::Zero(), 1.2);
      for (int c = 0; c < 6; ++c) EXPECT_NEAR(l.v[c], V * V * base.v[c], 1e-13);
    }
  }
}

TEST(Loads, DampingLinearAndIndependentOfSpeed) {
  std::mt19937_64 rng(9);
  const AeroModel m = random_model(rng);
  const Vec3 w(0.3, -0.2, 0.5);
  for (double V : {0.0, 0.7, 1.5}) {
    const AeroLoads a = aero_loads(m, {0.1, 0.05, V}, Vec3::Zero(), 1.2);
    const AeroLoads b = aero_loads(m, {0.1, 0.05, V}, w, 1.2);
    const AeroLoads c = aero_loads(m, {0.1, 0.05, V}, 2.0 * w, 1.2);
    for (int i = 0; i < 3; ++i) {
      EXPECT_NEAR(b.v[3 + i] - a.v[3 + i], m.K[i] * w[i], 1e-15);
      EXPECT_NEAR(c.v[3 + i] - a.v[3 + i], 2.0 * m.K[i] * w[i], 1e-15);
    }
  }
}

TEST(LoadsToBody, IdentityRotation) {
  AeroLoads l;
  l[Channel::kD] = 1.0;
  l[Channel::kL] = 2.0;
  const BodyLoads b = loads_to_body({}, l);
  EXPECT_TRUE(b.force.isApprox(Vec3(-1.0, 0.0, -2.0)));
  EXPECT_EQ(b.torque.norm(), 0.0);
}

TEST(LoadsToBody, DragAtAlpha) {
  AeroLoads l;
  l[Channel::kD] = 1.0;
  const BodyLoads b = loads_to_body({0.2, 0.0, 1.0}, l);
  EXPECT_NEAR(b.force.x(), -0.98007, 1e-5);
  EXPECT_NEAR(b.force.y(), 0.0, 1e-15);
  EXPECT_NEAR(b.force.z(), -0.19867, 1e-5);
}

TEST(LoadsToBody, PreservesNormAndPlanarSideForce) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    AeroLoads l;
    for (double& v : l.v) v = u(rng);
    const AeroAngles a{u(rng), u(rng), 1.0};
    const BodyLoads b = loads_to_body(a, l);
    EXPECT_NEAR(b.force.norm(), Vec3(-l.D(), l.S(), -l.L()).norm(), 1e-12);
    const AeroAngles planar{a.alpha, 0.0, 1.0};
    EXPECT_NEAR(loads_to_body(planar, l).force.y(), l.S(), 1e-15);
    l[Channel::kS] = 0.0;
    EXPECT_EQ(loads_to_body(planar, l).force.y(), 0.0);
  }
}

TEST(LiftDrag, PublishedMaximum) {
  const auto alphas = alpha_grid(0.0, deg_to_rad(16.0), deg_to_rad(0.1));
  const LiftDragTable t = lift_drag_analysis(published_aero(), alphas, 0.0);
  EXPECT_EQ(t.rows.size(), 161u);
  EXPECT_NEAR(t.max_LD, 1.78, 0.02);
  EXPECT_NEAR(rad_to_deg(t.alpha_star), 10.7, 0.3);
}

TEST(LiftDrag, ConstantRatio) {
  AeroModel m;
  m[Channel::kL].c0 = 0.5;
  m[Channel::kD].c0 = 0.25;
  m.A_ref = 1.0;
  const auto alphas = alpha_grid(0.0, 0.3, 0.01);
  const LiftDragTable t = lift_drag_analysis(m, alphas, 0.0);
  for (const auto& r : t.rows) EXPECT_DOUBLE_EQ(r.LD, 2.0);
  EXPECT_DOUBLE_EQ(t.max_LD, 2.0);
}

TEST(LiftDrag, WinglessMatchesDenseScan) {
  const AeroModel m = wingless_aero();
  const auto alphas = alpha_grid(0.0, deg_to_rad(16.0), deg_to_rad(0.1));
  const LiftDragTable t = lift_drag_analysis(m, alphas, 0.0);
  double best = 0.0;
  for (double a = 0.0; a <= 16.0; a += 0.001) {
    const AeroCoefficients c = eval_coeffs(m, deg_to_rad(a), 0.0);
    best = std::max(best, c[Channel::kL] / c[Channel::kD]);
  }
  EXPECT_NEAR(t.max_LD, best, 0.02);
  EXPECT_NEAR(t.max_LD, 0.66, 0.05);
}

TEST(LiftDrag, NonPositiveDragThrows) {
  AeroModel m;
  m[Channel::kL].c0 = 0.5;
  m.A_ref = 1.0;
  const auto alphas = alpha_grid(0.0, 0.1, 0.01);
  try {
    lift_drag_analysis(m, alphas, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateModel);
  }
}

TEST(StabilitySlopes, AccessorSemantics) {
  const StabilitySlopes s = stability_slopes(published_aero());
  EXPECT_DOUBLE_EQ(s.cm2_alpha, 0.093);
  EXPECT_DOUBLE_EQ(s.cm3_beta, -0.093);
  const StabilitySlopes z = stability_slopes(AeroModel{});
  EXPECT_EQ(z.cm2_alpha, 0.0);
  EXPECT_EQ(z.cm3_beta, 0.0);
  std::mt19937_64 rng(1);
  const AeroModel r = random_model(rng);
  EXPECT_EQ(stability_slopes(r).cm2_alpha, r[Channel::kM2].calpha);
  EXPECT_EQ(stability_slopes(r).cm3_beta, r[Channel::kM3].cbeta);
}

TEST(Symmetrize, ZeroesBetaEvenOddChannelTerms) {
  const AeroModel s = symmetrized(published_aero());
  for (Channel c : {Channel::kS, Channel::kM1, Channel::kM3}) {
    EXPECT_EQ(s[c].c0, 0.0);
    EXPECT_EQ(s[c].calpha, 0.0);
    EXPECT_EQ(s[c].cbeta, published_aero()[c].cbeta);
  }
  const VehicleParams p = symmetrized(published_vehicle());
  EXPECT_EQ(p.r.y(), 0.0);
  EXPECT_EQ(p.rbar0.y(), 0.0);
}

TEST(Params, NetMassBudget) {
  EXPECT_NEAR(published_vehicle().net_mass() * 1e3, 6.85, 0.01);
  EXPECT_NEAR(newton_to_gf(published_vehicle().net_weight()), 6.85, 0.01);
  EXPECT_DOUBLE_EQ(gf_to_newton(2.0), 0.0196);
  EXPECT_NO_THROW(published_vehicle().validate());
  EXPECT_NO_THROW(wingless_vehicle().validate());
}

TEST(Params, ValidateRejectsBadValues) {
  VehicleParams p = published_vehicle();
  p.mbar = 0.0;
  EXPECT_THROW(p.validate(), Error);
  p = published_vehicle();
  p.inertia(0, 0) = -1.0;
  EXPECT_THROW(p.validate(), Error);
  AeroModel a = published_aero();
  a.K.y() = 0.01;
  EXPECT_THROW(a.validate(), Error);
}

class ConfigFiles : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("blimp_cfg_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

TEST_F(ConfigFiles, RoundTrip) {
  const VehicleConfig in{published_vehicle(), published_aero()};
  write_vehicle_file(dir_ / "v.ini", in, "round trip");
  const VehicleConfig out = load_vehicle_file(dir_ / "v.ini");
  EXPECT_NEAR(out.params.m, in.params.m, 1e-12);
  EXPECT_NEAR(out.params.B, in.params.B, 1e-12);
  EXPECT_LT((out.params.rbar0 - in.params.rbar0).norm(), 1e-12);
  EXPECT_LT((out.params.inertia - in.params.inertia).norm(), 1e-12);
  for (int c = 0; c < 6; ++c) {
    EXPECT_DOUBLE_EQ(out.aero.channels[c].calpha, in.aero.channels[c].calpha);
  }
  EXPECT_EQ(out.aero.K, in.aero.K);
  EXPECT_NEAR(out.params.net_mass() * 1e3, 6.85, 0.01);

  write_aero_file(dir_ / "a.ini", in.aero, "aero only");
  const AeroModel a = load_aero_file(dir_ / "a.ini", 1.0);
  EXPECT_DOUBLE_EQ(a.A_ref, in.aero.A_ref);
  EXPECT_DOUBLE_EQ(a[Channel::kM2].cbeta, 5.236);
}

TEST_F(ConfigFiles, ErrorsNameTheInput) {
  std::ofstream(dir_ / "bad.ini") << "[mass]\nm_kg = 0.1\n";
  try {
    load_vehicle_file(dir_ / "bad.ini");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfigError);
    EXPECT_NE(std::string(e.what()).find("bad.ini"), std::string::npos);
  }
  std::ofstream(dir_ / "nan.ini") << "[aero]\nCD = 1, x, 2\n";
  EXPECT_THROW(load_aero_file(dir_ / "nan.ini", 1.0), Error);
  try {
    load_vehicle_file(dir_ / "missing.ini");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIoError);
  }
}

}  // namespace
}  // namespace blimp
