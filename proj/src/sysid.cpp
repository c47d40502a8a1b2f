#include "blimp/sysid.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <string_view>
#include <tuple>

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "blimp/csv.hpp"

namespace blimp {

const char* to_string(TrialKind k) { return k == TrialKind::kStraight ? "straight" : "spiral"; }

namespace {

constexpr double kMaxPosition = 20.0;

TrialKind parse_kind(const std::string& s, const std::filesystem::path& path, std::size_t line) {
  if (s == "straight") return TrialKind::kStraight;
  if (s == "spiral") return TrialKind::kSpiral;
  throw Error(ErrorCode::kSchemaError, path.string() + ":" + std::to_string(line) +
                                           ": kind must be straight or spiral, got '" + s + "'");
}

std::vector<TrialSample> load_samples(const std::filesystem::path& path, const std::string& id) {
  const CsvTable t = read_csv(path);
  require_header(t, {"t", "x", "y", "z", "phi", "theta", "psi"}, path);
  std::vector<TrialSample> out;
  out.reserve(t.rows.size());
  static const char* names[] = {"t", "x", "y", "z", "phi", "theta", "psi"};
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    double v[7];
    for (int j = 0; j < 7; ++j) v[j] = parse_double(t.rows[i][j], path, t.line_numbers[i], names[j]);
    const std::string where = path.string() + ":" + std::to_string(t.line_numbers[i]);
    for (int j = 1; j <= 3; ++j) {
      if (!(std::abs(v[j]) <= kMaxPosition)) {
        throw Error(ErrorCode::kUnitError,
                    where + ": |" + names[j] + "| exceeds 20 m (expected metres)");
      }
    }
    for (int j = 4; j <= 6; ++j) {
      if (!(std::abs(v[j]) <= kPi)) {
        throw Error(ErrorCode::kUnitError,
                    where + ": |" + names[j] + "| exceeds pi (expected radians)");
      }
    }
    if (!out.empty() && !(v[0] > out.back().t)) {
      throw Error(ErrorCode::kSchemaError, where + ": time is not strictly increasing");
    }
    out.push_back({v[0], Vec3(v[1], v[2], v[3]), {v[4], v[5], v[6]}});
  }
  if (out.size() < 2 || out.back().t - out.front().t < 2.0) {
    throw Error(ErrorCode::kSchemaError, "trial " + id + " (" + path.string() +
                                             ") has less than 2 s of samples");
  }
  std::vector<double> gaps(out.size() - 1);
  for (std::size_t i = 1; i < out.size(); ++i) gaps[i - 1] = out[i].t - out[i - 1].t;
  std::nth_element(gaps.begin(), gaps.begin() + gaps.size() / 2, gaps.end());
  const double rate = 1.0 / gaps[gaps.size() / 2];
  if (rate < 20.0 || rate > 500.0) {
    throw Error(ErrorCode::kSchemaError, "trial " + id + " (" + path.string() +
                                             "): sample rate " + format_number(rate) +
                                             " Hz is far from the nominal 60 Hz");
  }
  return out;
}

}  // namespace

std::vector<TrialRecord> load_trials(const std::filesystem::path& manifest) {
  const CsvTable t = read_csv(manifest);
  require_header(t, {"trial_id", "file", "kind", "dr_x_cm", "Fl_gf", "Fr_gf"}, manifest);
  const std::filesystem::path dir = manifest.parent_path();
  std::vector<TrialRecord> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    const std::size_t ln = t.line_numbers[i];
    TrialRecord r;
    r.id = row[0];
    r.kind = parse_kind(row[2], manifest, ln);
    r.dr_x = parse_double(row[3], manifest, ln, "dr_x_cm") * 1e-2;
    r.Fl = gf_to_newton(parse_double(row[4], manifest, ln, "Fl_gf"));
    r.Fr = gf_to_newton(parse_double(row[5], manifest, ln, "Fr_gf"));
    const std::filesystem::path file = dir / row[1];
    if (!std::filesystem::exists(file)) {
      throw Error(ErrorCode::kSchemaError, manifest.string() + ":" + std::to_string(ln) +
                                               ": trial '" + r.id + "' references missing file " +
                                               file.string());
    }
    r.samples = load_samples(file, r.id);
    out.push_back(std::move(r));
  }
  return out;
}

void write_trials(const std::filesystem::path& manifest, const std::vector<TrialRecord>& trials) {
  const std::filesystem::path dir = manifest.parent_path();
  CsvWriter m(manifest);
  m.header({"trial_id", "file", "kind", "dr_x_cm", "Fl_gf", "Fr_gf"});
  for (const auto& r : trials) {
    const std::string file = r.id + ".csv";
    m.cell(r.id).cell(file).cell(to_string(r.kind)).cell(r.dr_x * 1e2);
    m.cell(newton_to_gf(r.Fl)).cell(newton_to_gf(r.Fr));
    m.end_row();
    CsvWriter w(dir / file);
    w.header({"t", "x", "y", "z", "phi", "theta", "psi"});
    for (const auto& s : r.samples) {
      w.cell(s.t).cell(s.p.x()).cell(s.p.y()).cell(s.p.z());
      w.cell(s.e.phi).cell(s.e.theta).cell(s.e.psi);
      w.end_row();
    }
  }
}

TrialRecord record_trial(const Trajectory& traj, int stride, std::string id, TrialKind kind,
                         double dr_x, double Fl, double Fr) {
  TrialRecord r;
  r.id = std::move(id);
  r.kind = kind;
  r.dr_x = dr_x;
  r.Fl = Fl;
  r.Fr = Fr;
  for (std::size_t i = 0; i < traj.size(); i += static_cast<std::size_t>(std::max(stride, 1))) {
    const State& s = traj.states[i];
    r.samples.push_back(
        {traj.t[i], s.p, {wrap_angle(s.e.phi), s.e.theta, wrap_angle(s.e.psi)}});
  }
  return r;
}

SteadyObservation observation_from_solution(const SteadySolution& sol, TrialKind kind,
                                            double dr_x, std::string id) {
  SteadyObservation o;
  o.id = std::move(id);
  o.kind = kind;
  o.theta = sol.theta;
  o.phi = sol.phi;
  o.psidot = sol.psidot;
  o.V = sol.V;
  o.alpha = sol.alpha;
  o.beta = sol.beta;
  o.w_b = sol.w_b;
  o.Fl = sol.Fl;
  o.Fr = sol.Fr;
  o.dr_x = dr_x;
  o.rbar = sol.rbar;
  return o;
}

namespace {

double mean(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
  double s = 0.0;
  for (std::size_t i = lo; i < hi; ++i) s += v[i];
  return s / static_cast<double>(hi - lo);
}

double stdev(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
  const double m = mean(v, lo, hi);
  double s = 0.0;
  for (std::size_t i = lo; i < hi; ++i) s += (v[i] - m) * (v[i] - m);
  return std::sqrt(s / static_cast<double>(hi - lo));
}

// Derivative at each sample of a local quadratic least-squares fit.
std::vector<Vec3> smoothed_velocity(const std::vector<TrialSample>& s, int len) {
  const int n = static_cast<int>(s.size());
  const int half = len / 2;
  std::vector<Vec3> out(n);
  for (int i = 0; i < n; ++i) {
    const int lo = std::clamp(i - half, 0, std::max(0, n - len));
    const int hi = std::min(n, lo + len);
    Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
    Eigen::Matrix3d aty = Eigen::Matrix3d::Zero();
    for (int k = lo; k < hi; ++k) {
      const double dt = s[k].t - s[i].t;
      const Eigen::Vector3d row(1.0, dt, dt * dt);
      ata += row * row.transpose();
      aty += row * s[k].p.transpose();
    }
    const Eigen::Matrix3d coef = ata.ldlt().solve(aty);
    out[i] = coef.row(1).transpose();
  }
  return out;
}

}  // namespace

SteadyObservation extract_steady(const TrialRecord& rec, const VehicleParams& params,
                                 const ExtractOptions& opt) {
  (void)params;
  if (rec.duration() < opt.window + 1.0) {
    throw Error(ErrorCode::kSchemaError, "trial " + rec.id + " is shorter than window + 1 s");
  }
  const auto& s = rec.samples;
  const std::size_t n = s.size();
  const std::vector<Vec3> vel = smoothed_velocity(s, opt.smoothing_samples);

  std::vector<double> V(n), alpha(n), beta(n), theta(n), phi(n), psi(n);
  double unwrap = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 vb = rotation_body_to_inertial(s[i].e).transpose() * vel[i];
    const AeroAngles aa = aero_angles(vb);
    V[i] = aa.V;
    alpha[i] = aa.alpha;
    beta[i] = aa.beta;
    theta[i] = s[i].e.theta;
    phi[i] = s[i].e.phi;
    if (i > 0) unwrap += wrap_angle(s[i].e.psi - s[i - 1].e.psi);
    psi[i] = s[0].e.psi + unwrap;
  }

  // First sample index at or after time t.
  auto index_at = [&](double t) {
    return static_cast<std::size_t>(
        std::lower_bound(s.begin(), s.end(), t,
                         [](const TrialSample& a, double v) { return a.t < v; }) -
        s.begin());
  };
  const double t_end = s.back().t;
  const std::size_t half = index_at(s.front().t + 0.5 * rec.duration());
  const std::size_t win = std::max<std::size_t>(2, n - index_at(t_end - opt.window));
  if (n - half < win) {
    throw Error(ErrorCode::kSchemaError,
                "trial " + rec.id + ": window is longer than half the record");
  }
  for (std::size_t lo = half; lo + win <= n; ++lo) {
    const double vm = mean(V, lo, lo + win);
    const double vs = stdev(V, lo, lo + win);
    const double ts = stdev(theta, lo, lo + win);
    if (!(vs < opt.max_speed_cv * vm) || !(ts < opt.max_theta_std)) {
      throw Error(ErrorCode::kNotSteady,
                  "trial " + rec.id + ": unsteady window starting at t=" + format_number(s[lo].t) +
                      " (std V/mean V=" + format_number(vs / vm) +
                      ", std theta=" + format_number(rad_to_deg(ts)) + " deg)");
    }
  }

  const std::size_t lo = n - win;
  SteadyObservation o;
  o.id = rec.id;
  o.kind = rec.kind;
  o.theta = mean(theta, lo, n);
  o.phi = mean(phi, lo, n);
  o.V = mean(V, lo, n);
  o.alpha = mean(alpha, lo, n);
  o.beta = mean(beta, lo, n);
  {
    double st = 0.0, sp = 0.0;
    const double tm = [&] {
      double a = 0.0;
      for (std::size_t i = lo; i < n; ++i) a += s[i].t;
      return a / static_cast<double>(win);
    }();
    const double pm = mean(psi, lo, n);
    for (std::size_t i = lo; i < n; ++i) {
      st += (s[i].t - tm) * (s[i].t - tm);
      sp += (s[i].t - tm) * (psi[i] - pm);
    }
    o.psidot = sp / st;
  }
  o.w_b = o.psidot * down_in_body({o.phi, o.theta, 0.0});
  o.Fl = rec.Fl;
  o.Fr = rec.Fr;
  o.dr_x = rec.dr_x;
  o.rbar = params.rbar_at(rec.dr_x);
  return o;
}

AeroLoads invert_aero(const SteadyObservation& obs, const VehicleParams& params,
                      const ModelOptions& mopt) {
  const AeroAngles aa{obs.alpha, obs.beta, obs.V};
  State s;
  s.e = {obs.phi, obs.theta, 0.0};
  s.v = body_velocity(aa);
  s.w = obs.w_b;
  s.rbar = obs.rbar;
  const ThrustLoads th = thrust_loads(obs.Fl, obs.Fr, params, obs.rbar, mopt);
  const Vec3 f = -(generalized_force(s, Vec3::Zero(), params, mopt) + th.force);
  const Vec3 t = -(generalized_torque(s, Vec3::Zero(), params, mopt) + th.torque);
  const Mat3 rbv = wind_to_body(aa).transpose();
  const Vec3 fw = rbv * f;
  const Vec3 tw = rbv * t;
  AeroLoads l;
  l.v = {-fw.x(), fw.y(), -fw.z(), tw.x(), tw.y(), tw.z()};
  return l;
}

SteadyObservation mirror(const SteadyObservation& obs) {
  SteadyObservation m = obs;
  m.phi = -obs.phi;
  m.psidot = -obs.psidot;
  m.beta = -obs.beta;
  m.w_b = Vec3(-obs.w_b.x(), obs.w_b.y(), -obs.w_b.z());
  m.Fl = obs.Fr;
  m.Fr = obs.Fl;
  m.rbar.y() = -obs.rbar.y();
  m.mirrored = !obs.mirrored;
  constexpr std::string_view kSuffix = "_mirror";
  if (!obs.mirrored) {
    m.id = obs.id + std::string(kSuffix);
  } else if (obs.id.ends_with(kSuffix)) {
    m.id = obs.id.substr(0, obs.id.size() - kSuffix.size());
  }
  return m;
}

std::vector<SteadyObservation> mirror_augment(const std::vector<SteadyObservation>& obs) {
  std::vector<SteadyObservation> out = obs;
  for (const auto& o : obs) {
    if (o.kind == TrialKind::kSpiral) out.push_back(mirror(o));
  }
  return out;
}

std::vector<SteadyObservation> average_settings(const std::vector<SteadyObservation>& obs) {
  using Key = std::tuple<int, double, double, double, bool>;
  std::map<Key, std::vector<const SteadyObservation*>> groups;
  std::vector<Key> order;
  for (const auto& o : obs) {
    const Key k{static_cast<int>(o.kind), o.dr_x, o.Fl, o.Fr, o.mirrored};
    auto [it, inserted] = groups.try_emplace(k);
    if (inserted) order.push_back(k);
    it->second.push_back(&o);
  }
  std::vector<SteadyObservation> out;
  for (const Key& k : order) {
    const auto& g = groups[k];
    SteadyObservation a = *g.front();
    const double n = static_cast<double>(g.size());
    a.theta = a.phi = a.psidot = a.V = a.alpha = a.beta = 0.0;
    a.w_b.setZero();
    for (const auto* o : g) {
      a.theta += o->theta / n;
      a.phi += o->phi / n;
      a.psidot += o->psidot / n;
      a.V += o->V / n;
      a.alpha += o->alpha / n;
      a.beta += o->beta / n;
      a.w_b += o->w_b / n;
    }
    a.weight = n;
    out.push_back(a);
  }
  return out;
}

namespace {

double ipow(double x, int p) {
  double r = 1.0;
  for (int i = 0; i < p; ++i) r *= x;
  return r;
}

int count_distinct(std::vector<double> v, double tol) {
  std::sort(v.begin(), v.end());
  int n = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i == 0 || v[i] - v[i - 1] > tol) ++n;
  }
  return n;
}

double qa_of(const SteadyObservation& o, double rho, double A_ref) {
  return 0.5 * rho * o.V * o.V * A_ref;
}

// Regressor row for channel c; moments append the damping column.
Eigen::RowVectorXd regressor(Channel c, const SteadyObservation& o, double qa) {
  const ChannelShape sh = shape_of(c);
  Eigen::RowVectorXd row(is_moment(c) ? 4 : 3);
  row[0] = 1.0;
  row[1] = ipow(o.alpha, sh.alpha_power);
  row[2] = ipow(o.beta, sh.beta_power);
  if (is_moment(c)) row[3] = o.w_b[static_cast<int>(c) - 3] / qa;
  return row;
}

struct Stage1 {
  AeroModel model;
  std::array<double, kNumChannels> condition{};
  // residual[j][c] in coefficient units
  std::vector<std::array<double, kNumChannels>> residual;
};

Stage1 stage1(const std::vector<LoadSample>& data, const std::vector<int>& use, double rho,
              double A_ref, const FitOptions& opt) {
  Stage1 out;
  out.model.A_ref = A_ref;
  out.residual.assign(data.size(), {});
  for (Channel c : kAllChannels) {
    const int ci = static_cast<int>(c);
    const int cols = is_moment(c) ? 4 : 3;
    Eigen::MatrixXd a(use.size(), cols);
    Eigen::VectorXd y(use.size());
    for (std::size_t r = 0; r < use.size(); ++r) {
      const LoadSample& d = data[use[r]];
      const double qa = qa_of(d.obs, rho, A_ref);
      const double w = std::sqrt(d.obs.weight);
      a.row(r) = w * regressor(c, d.obs, qa);
      y[r] = w * d.loads[c] / qa;
    }
    Eigen::VectorXd scale = a.colwise().norm().transpose();
    for (int j = 0; j < cols; ++j) {
      if (scale[j] == 0.0) scale[j] = 1.0;
    }
    const Eigen::MatrixXd as = a * scale.cwiseInverse().asDiagonal();
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(as);
    const auto sv = svd.singularValues();
    const double cond = sv[sv.size() - 1] > 0.0 ? sv[0] / sv[sv.size() - 1]
                                                : std::numeric_limits<double>::infinity();
    out.condition[ci] = cond;
    if (!(cond <= opt.max_condition)) {
      throw Error(ErrorCode::kRankDeficient, std::string("channel ") + channel_name(c) +
                                                 ": design condition number " +
                                                 format_number(cond) + " exceeds " +
                                                 format_number(opt.max_condition));
    }
    const Eigen::VectorXd xs = as.colPivHouseholderQr().solve(y);
    const Eigen::VectorXd x = xs.cwiseQuotient(scale);
    out.model[c] = {x[0], x[1], x[2]};
    if (is_moment(c)) out.model.K[ci - 3] = x[3];
    for (std::size_t j = 0; j < data.size(); ++j) {
      const double qa = qa_of(data[j].obs, rho, A_ref);
      out.residual[j][ci] = regressor(c, data[j].obs, qa).dot(x) - data[j].loads[c] / qa;
    }
  }
  return out;
}

// Parameter vector: 18 coefficients channel-major, then K1..K3.
Eigen::VectorXd to_vector(const AeroModel& m) {
  Eigen::VectorXd p(21);
  for (int c = 0; c < kNumChannels; ++c) {
    p[3 * c] = m.channels[c].c0;
    p[3 * c + 1] = m.channels[c].calpha;
    p[3 * c + 2] = m.channels[c].cbeta;
  }
  p.tail<3>() = m.K;
  return p;
}

AeroModel from_vector(const Eigen::VectorXd& p, const AeroModel& base) {
  AeroModel m = base;
  for (int c = 0; c < kNumChannels; ++c) m.channels[c] = {p[3 * c], p[3 * c + 1], p[3 * c + 2]};
  m.K = p.tail<3>();
  return m;
}

// Body-frame nondimensional steady residual, stacked over observations.
// Equals steady_residual when the loads are the inverted ones.
Eigen::VectorXd steady_stack(const AeroModel& m, const std::vector<LoadSample>& data,
                             const std::vector<int>& use, const VehicleParams& params) {
  const double w = params.total_mass() * params.g;
  Eigen::VectorXd r(6 * use.size());
  for (std::size_t j = 0; j < use.size(); ++j) {
    const LoadSample& d = data[use[j]];
    const AeroAngles aa{d.obs.alpha, d.obs.beta, d.obs.V};
    AeroLoads diff = aero_loads(m, aa, d.obs.w_b, params.rho);
    for (int i = 0; i < kNumChannels; ++i) diff.v[i] -= d.loads.v[i];
    const BodyLoads b = loads_to_body(aa, diff);
    const double sw = std::sqrt(d.obs.weight);
    r.segment<3>(6 * j) = sw * b.force / w;
    r.segment<3>(6 * j + 3) = sw * b.torque / (w * std::max(d.obs.rbar.norm(), 0.1));
  }
  return r;
}

double rms(const Eigen::VectorXd& r) {
  return r.size() == 0 ? 0.0 : std::sqrt(r.squaredNorm() / static_cast<double>(r.size()));
}

Eigen::VectorXd project(Eigen::VectorXd p) {
  for (int i = 18; i < 21; ++i) p[i] = std::min(p[i], 0.0);
  return p;
}

// Projected Levenberg-Marquardt with the K <= 0 bounds.
AeroModel refine(const AeroModel& start, const std::vector<LoadSample>& data,
                 const std::vector<int>& use, const VehicleParams& params, int max_iter) {
  Eigen::VectorXd p = project(to_vector(start));
  auto res = [&](const Eigen::VectorXd& q) {
    return steady_stack(from_vector(q, start), data, use, params);
  };
  Eigen::VectorXd r = res(p);
  double cost = r.squaredNorm();
  double lambda = 1e-3;
  for (int it = 0; it < max_iter; ++it) {
    Eigen::MatrixXd jac(r.size(), 21);
    for (int j = 0; j < 21; ++j) {
      const double h = 1e-6 * std::max(1.0, std::abs(p[j]));
      Eigen::VectorXd pp = p, pm = p;
      pp[j] += h;
      pm[j] -= h;
      jac.col(j) = (res(pp) - res(pm)) / (2.0 * h);
    }
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd g = jac.transpose() * r;
    if (g.norm() < 1e-300) break;
    bool accepted = false;
    for (int k = 0; k < 30 && !accepted; ++k) {
      Eigen::MatrixXd a = jtj;
      a.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-30);
      const Eigen::VectorXd step = a.ldlt().solve(-g);
      const Eigen::VectorXd pn = project(p + step);
      const Eigen::VectorXd rn = res(pn);
      const double cn = rn.squaredNorm();
      if (std::isfinite(cn) && cn < cost) {
        const double rel = (cost - cn) / std::max(cost, 1e-300);
        p = pn;
        r = rn;
        cost = cn;
        lambda = std::max(lambda / 3.0, 1e-12);
        accepted = true;
        if (rel < 1e-14) return from_vector(p, start);
      } else {
        lambda *= 4.0;
      }
    }
    if (!accepted) break;
  }
  return from_vector(p, start);
}

}  // namespace

FitResult fit_loads(const std::vector<LoadSample>& data, const VehicleParams& params,
                    double A_ref, const FitOptions& opt) {
  if (data.size() < opt.min_observations) {
    throw Error(ErrorCode::kInsufficientSpan,
                std::to_string(data.size()) + " observations, need at least " +
                    std::to_string(opt.min_observations));
  }
  std::vector<double> alphas, betas;
  for (const auto& d : data) {
    alphas.push_back(d.obs.alpha);
    betas.push_back(d.obs.beta);
  }
  const int na = count_distinct(alphas, 1e-6);
  const int nb = count_distinct(betas, 1e-6);
  if (na < opt.min_alpha_values || nb < opt.min_beta_values) {
    throw Error(ErrorCode::kInsufficientSpan,
                std::to_string(na) + " distinct alpha and " + std::to_string(nb) +
                    " distinct beta values; need " + std::to_string(opt.min_alpha_values) +
                    " and " + std::to_string(opt.min_beta_values));
  }

  std::vector<int> use(data.size());
  std::iota(use.begin(), use.end(), 0);
  Stage1 s1 = stage1(data, use, params.rho, A_ref, opt);

  FitResult out;
  if (opt.reject_outliers) {
    // Per-channel robust scale, with a floor so clean data drops nothing.
    std::vector<double> score(data.size(), 0.0);
    for (int c = 0; c < kNumChannels; ++c) {
      std::vector<double> absr(data.size()), y(data.size());
      for (std::size_t j = 0; j < data.size(); ++j) {
        absr[j] = std::abs(s1.residual[j][c]);
        y[j] = std::abs(data[j].loads.v[c] / qa_of(data[j].obs, params.rho, A_ref));
      }
      std::vector<double> tmp = absr;
      std::nth_element(tmp.begin(), tmp.begin() + tmp.size() / 2, tmp.end());
      const double mad = tmp[tmp.size() / 2];
      std::nth_element(y.begin(), y.begin() + y.size() / 2, y.end());
      const double floor = 1e-8 * std::max(y[y.size() / 2], 1e-3);
      const double limit = opt.outlier_mads * std::max(1.4826 * mad, floor);
      for (std::size_t j = 0; j < data.size(); ++j) score[j] = std::max(score[j], absr[j] / limit);
    }
    std::vector<int> flagged;
    for (std::size_t j = 0; j < data.size(); ++j) {
      if (score[j] > 1.0) flagged.push_back(static_cast<int>(j));
    }
    std::stable_sort(flagged.begin(), flagged.end(),
                     [&](int a, int b) { return score[a] > score[b]; });
    const auto cap = static_cast<std::size_t>(
        std::floor(opt.max_drop_fraction * static_cast<double>(data.size())));
    if (flagged.size() > cap) flagged.resize(cap);
    if (!flagged.empty()) {
      std::set<int> drop(flagged.begin(), flagged.end());
      use.clear();
      for (int j = 0; j < static_cast<int>(data.size()); ++j) {
        if (!drop.count(j)) use.push_back(j);
      }
      for (int j : drop) out.excluded.push_back(data[j].obs.id);
      std::sort(out.excluded.begin(), out.excluded.end());
      s1 = stage1(data, use, params.rho, A_ref, opt);
    }
  }
  out.condition = s1.condition;

  AeroModel base = s1.model;
  base.K = base.K.cwiseMin(0.0);
  out.stage1_rms = rms(steady_stack(base, data, use, params));
  out.model = base;
  out.final_rms = out.stage1_rms;
  if (opt.refine) {
    const AeroModel refined = refine(s1.model, data, use, params, opt.max_lm_iter);
    const double r2 = rms(steady_stack(refined, data, use, params));
    if (r2 <= out.stage1_rms) {
      out.model = refined;
      out.final_rms = r2;
      out.refinement_accepted = true;
    }
  }

  for (int c = 0; c < kNumChannels; ++c) {
    double ss = 0.0;
    for (int j : use) {
      const auto& d = data[j];
      const AeroLoads m =
          aero_loads(out.model, {d.obs.alpha, d.obs.beta, d.obs.V}, d.obs.w_b, params.rho);
      ss += (m.v[c] - d.loads.v[c]) * (m.v[c] - d.loads.v[c]);
    }
    out.rms[c] = std::sqrt(ss / static_cast<double>(use.size()));
  }
  return out;
}

FitResult fit(const std::vector<SteadyObservation>& obs, const VehicleParams& params,
              const FitOptions& opt, const ModelOptions& mopt) {
  std::vector<LoadSample> data;
  data.reserve(obs.size());
  for (const auto& o : obs) data.push_back({o, invert_aero(o, params, mopt)});
  return fit_loads(data, params, params.A_ref, opt);
}

void write_diagnostics_csv(const std::filesystem::path& path, const FitResult& r) {
  CsvWriter w(path);
  w.header({"channel", "c0", "c_alpha", "c_beta", "K", "rms", "condition"});
  for (Channel c : kAllChannels) {
    const int ci = static_cast<int>(c);
    const ChannelCoeffs& k = r.model[c];
    w.cell(channel_name(c)).cell(k.c0).cell(k.calpha).cell(k.cbeta);
    w.cell(is_moment(c) ? r.model.K[ci - 3] : 0.0).cell(r.rms[ci]).cell(r.condition[ci]);
    w.end_row();
  }
}

}  // namespace blimp
