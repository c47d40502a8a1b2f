#include "blimp/aero.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace blimp {

namespace {

double ipow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

struct LiftDragPoint {
  double CL, CD;
};

LiftDragPoint lift_drag_at(const AeroModel& model, double alpha, double beta) {
  const AeroCoefficients c = eval_coeffs(model, alpha, beta);
  if (!(c[Channel::kD] > 0.0)) {
    throw Error(ErrorCode::kDegenerateModel,
                "C_D = " + std::to_string(c[Channel::kD]) + " at alpha = " +
                    std::to_string(rad_to_deg(alpha)) + " deg");
  }
  return {c[Channel::kL], c[Channel::kD]};
}

}  // namespace

const char* channel_name(Channel c) {
  switch (c) {
    case Channel::kD: return "D";
    case Channel::kS: return "S";
    case Channel::kL: return "L";
    case Channel::kM1: return "M1";
    case Channel::kM2: return "M2";
    case Channel::kM3: return "M3";
  }
  return "?";
}

void AeroModel::validate() const {
  if (!(A_ref > 0.0)) throw Error(ErrorCode::kConfigError, "aero A_ref must be > 0");
  for (int i = 0; i < 3; ++i) {
    if (K[i] > 0.0) {
      throw Error(ErrorCode::kConfigError,
                  "damping K" + std::to_string(i + 1) + " must be <= 0");
    }
  }
  for (const auto& ch : channels) {
    if (!std::isfinite(ch.c0) || !std::isfinite(ch.calpha) || !std::isfinite(ch.cbeta)) {
      throw Error(ErrorCode::kConfigError, "aero coefficients must be finite");
    }
  }
}

AeroModel published_aero() {
  AeroModel m;
  m[Channel::kD] = {0.243, 4.419, 7.508};
  m[Channel::kS] = {0.001, -0.074, -2.113};
  m[Channel::kL] = {0.159, 2.938, 4.554};
  m[Channel::kM1] = {0.001, -0.030, -0.526};
  m[Channel::kM2] = {0.057, 0.093, 5.236};
  m[Channel::kM3] = {0.001, -0.001, -0.093};
  m.K = Vec3(-0.050, -0.026, -0.014);
  m.A_ref = 0.25;
  return m;
}

AeroModel wingless_aero() {
  AeroModel m = published_aero();
  m[Channel::kD] = {0.212, 3.72, 7.0};
  m[Channel::kL] = {0.024, 1.07, 3.0};
  m[Channel::kM2] = {0.057, 0.14, 5.236};
  m[Channel::kM3] = {0.001, -0.001, -0.12};
  m.K = Vec3(-0.045, -0.023, -0.0125);
  return m;
}

AeroModel symmetrized(const AeroModel& m) {
  AeroModel s = m;
  for (Channel c : {Channel::kS, Channel::kM1, Channel::kM3}) {
    s[c].c0 = 0.0;
    s[c].calpha = 0.0;
  }
  return s;
}

AeroCoefficients eval_coeffs(const AeroModel& model, double alpha, double beta) {
  AeroCoefficients out;
  for (Channel c : kAllChannels) {
    const ChannelShape sh = shape_of(c);
    const ChannelCoeffs& k = model[c];
    out.c[static_cast<int>(c)] =
        k.c0 + k.calpha * ipow(alpha, sh.alpha_power) + k.cbeta * ipow(beta, sh.beta_power);
  }
  out.stalled = std::abs(alpha) > model.alpha_stall;
  out.sideslip_exceeded = std::abs(beta) > model.beta_limit;
  return out;
}

AeroLoads aero_loads(const AeroModel& model, const AeroAngles& a, const Vec3& w, double rho) {
  const AeroCoefficients c = eval_coeffs(model, a.alpha, a.beta);
  const double qa = 0.5 * rho * a.V * a.V * model.A_ref;
  AeroLoads loads;
  for (int i = 0; i < kNumChannels; ++i) loads.v[i] = qa * c.c[i];
  for (int i = 0; i < 3; ++i) loads.v[3 + i] += model.K[i] * w[i];
  return loads;
}

BodyLoads loads_to_body(const AeroAngles& a, const AeroLoads& loads) {
  const Mat3 rvb = wind_to_body(a);
  BodyLoads b;
  b.force = rvb * Vec3(-loads.D(), loads.S(), -loads.L());
  b.torque = rvb * Vec3(loads.M1(), loads.M2(), loads.M3());
  return b;
}

std::vector<double> alpha_grid(double lo, double hi, double step) {
  std::vector<double> g;
  if (!(step > 0.0) || hi < lo) return g;
  const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  g.reserve(static_cast<std::size_t>(n) + 2);
  for (long i = 0; i <= n; ++i) g.push_back(lo + static_cast<double>(i) * step);
  if (hi - g.back() > 1e-12) g.push_back(hi);
  return g;
}

LiftDragTable lift_drag_analysis(const AeroModel& model, std::span<const double> alphas,
                                 double beta) {
  if (alphas.empty()) throw Error(ErrorCode::kConfigError, "alpha range is empty");
  LiftDragTable t;
  t.rows.reserve(alphas.size());
  std::size_t best = 0;
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    const LiftDragPoint p = lift_drag_at(model, alphas[i], beta);
    t.rows.push_back({alphas[i], p.CL, p.CD, p.CL / p.CD});
    if (t.rows[i].LD > t.rows[best].LD) best = i;
  }

  double lo = alphas[best > 0 ? best - 1 : 0];
  double hi = alphas[best + 1 < alphas.size() ? best + 1 : best];
  auto ratio = [&](double a) {
    const LiftDragPoint p = lift_drag_at(model, a, beta);
    return p.CL / p.CD;
  };

  // Golden-section maximisation to 1e-4 rad.
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - invphi * (hi - lo);
  double x2 = lo + invphi * (hi - lo);
  double f1 = ratio(x1), f2 = ratio(x2);
  while (hi - lo > 1e-4) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + invphi * (hi - lo);
      f2 = ratio(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - invphi * (hi - lo);
      f1 = ratio(x1);
    }
  }
  const double a_mid = 0.5 * (lo + hi);
  const double f_mid = ratio(a_mid);
  if (f_mid >= t.rows[best].LD) {
    t.alpha_star = a_mid;
    t.max_LD = f_mid;
  } else {
    t.alpha_star = t.rows[best].alpha;
    t.max_LD = t.rows[best].LD;
  }
  return t;
}

StabilitySlopes stability_slopes(const AeroModel& model) {
  return {model[Channel::kM2].calpha, model[Channel::kM3].cbeta};
}

}  // namespace blimp
