#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include <openssl/evp.h>

#include "acceptance.hpp"
#include "app.hpp"
#include "blimp/config.hpp"
#include "blimp/csv.hpp"
#include "blimp/simulate.hpp"
#include "blimp/sweep.hpp"
#include "blimp/sysid.hpp"

#ifndef BLIMP_DATA_DIR
#define BLIMP_DATA_DIR "data"
#endif

namespace blimp::app {

namespace fs = std::filesystem;

fs::path default_data_dir() { return fs::path(BLIMP_DATA_DIR); }

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 15];
  while (in) {
    in.read(buf, sizeof buf);
    EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  }
  return hex.str();
}

namespace {

fs::path data_dir(const RunConfig& cfg) {
  return cfg.data_dir.empty() ? default_data_dir() : cfg.data_dir;
}

fs::path params_path(const RunConfig& cfg) {
  if (!cfg.params.empty()) return cfg.params;
  return data_dir(cfg) / (cfg.wingless ? "wingless.ini" : "vehicle.ini");
}

void require_file(const fs::path& p, const std::string& what) {
  if (!fs::is_regular_file(p)) throw Error(ErrorCode::kIoError, what + " not found: " + p.string());
}

// Everything a run read, for the manifest.
struct Inputs {
  std::vector<std::pair<std::string, fs::path>> files;
  void add(std::string role, fs::path p) { files.emplace_back(std::move(role), std::move(p)); }
};

std::string opt_str(const std::optional<double>& v) {
  return v ? format_number(*v) : std::string("default");
}

void write_manifest(const RunConfig& cfg, const Inputs& in) {
  std::ofstream out(cfg.out / "run_manifest.txt", std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + (cfg.out / "run_manifest.txt").string());
  out << "tool_version = " << kToolVersion << '\n';
  out << "verb = " << cfg.verb << '\n';
  out << "params = " << params_path(cfg).string() << '\n';
  out << "aero = " << (cfg.aero.empty() ? std::string("[aero] of params") : cfg.aero.string()) << '\n';
  out << "schedule = " << cfg.schedule.string() << '\n';
  out << "manifest = " << cfg.manifest.string() << '\n';
  out << "out = " << cfg.out.string() << '\n';
  out << "dt = " << format_number(cfg.dt) << '\n';
  out << "T = " << opt_str(cfg.T) << '\n';
  out << "tol = " << opt_str(cfg.tol) << '\n';
  out << "legacy_model = " << cfg.legacy_model << '\n';
  out << "wingless = " << cfg.wingless << '\n';
  out << "symmetric = " << cfg.symmetric << '\n';
  out << "average_settings = " << cfg.average_settings << '\n';
  out << "no_mirror = " << cfg.no_mirror << '\n';
  out << "thrust_gf = " << format_number(cfg.thrust_gf) << '\n';
  out << "dr_cm = " << format_number(cfg.dr_cm) << '\n';
  out << "window = " << format_number(cfg.window) << '\n';
  out << "threads = " << parallel_threads() << '\n';
  for (const auto& [role, p] : in.files) {
    out << "sha256 " << role << ' ' << p.string() << " = " << sha256_file(p) << '\n';
  }
}

SolverOptions solver_options(const RunConfig& cfg) {
  SolverOptions o;
  if (cfg.tol) o.tol = *cfg.tol;
  return o;
}

const char* status_of(const SteadySolution& s) { return s.stalled ? "stall" : "ok"; }

void write_cells(const fs::path& path, const std::vector<CellResult>& cells) {
  CsvWriter w(path);
  w.header({"dr_x_cm", "Fl_gf", "Fr_gf", "theta_deg", "phi_deg", "psidot_dps", "V_mps",
            "alpha_deg", "beta_deg", "R_m", "residual", "status"});
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& c : cells) {
    w.cell(c.cell.dr_x * 100.0).cell(newton_to_gf(c.cell.Fl)).cell(newton_to_gf(c.cell.Fr));
    if (c.sol) {
      const SteadySolution& s = *c.sol;
      w.cell(rad_to_deg(s.theta)).cell(rad_to_deg(s.phi)).cell(rad_to_deg(s.psidot)).cell(s.V);
      w.cell(rad_to_deg(s.alpha)).cell(rad_to_deg(s.beta)).cell(turning_radius(s));
      w.cell(s.residual_norm).cell(status_of(s));
    } else {
      for (int i = 0; i < 8; ++i) w.cell(nan);
      w.cell("fail");
    }
    w.end_row();
  }
}

int report_cells(const std::vector<CellResult>& cells, std::ostream& log) {
  int failed = 0;
  for (const auto& c : cells) {
    if (c.sol) continue;
    ++failed;
    log << "cell dr_x=" << format_number(c.cell.dr_x * 100.0)
        << " cm Fl=" << format_number(newton_to_gf(c.cell.Fl))
        << " gf Fr=" << format_number(newton_to_gf(c.cell.Fr)) << " gf: " << c.error << '\n';
  }
  log << cells.size() - failed << "/" << cells.size() << " cells converged\n";
  return failed == 0 ? 0 : 1;
}

int verb_params_check(const RunConfig& cfg, const Vehicle& veh, std::ostream& log) {
  const VehicleParams& p = veh.params;
  const auto cg = composite_cg(p, p.rbar0);
  const auto sl = stability_slopes(veh.aero);
  log << "total mass        " << format_number(p.total_mass() * 1e3) << " g\n";
  log << "buoyancy          " << format_number(newton_to_gf(p.B)) << " gf\n";
  log << "net mass          " << format_number(p.net_mass() * 1e3) << " g\n";
  log << "net weight        " << format_number(newton_to_gf(p.net_weight())) << " gf\n";
  log << "A_ref             " << format_number(veh.aero.A_ref) << " m^2\n";
  log << "composite CG      " << format_number(cg.r_g.x() * 1e3) << ", "
      << format_number(cg.r_g.y() * 1e3) << ", " << format_number(cg.r_g.z() * 1e3) << " mm\n";
  log << "dCm2/dalpha       " << format_number(sl.cm2_alpha) << " 1/rad\n";
  log << "dCm3/dbeta        " << format_number(sl.cm3_beta) << " 1/rad\n";
  log << "reynolds          " << format_number(p.reynolds) << '\n';

  CsvWriter w(cfg.out / "params_check.csv");
  w.header({"quantity", "value", "unit"});
  w.cell("total_mass").cell(p.total_mass() * 1e3).cell("g").end_row();
  w.cell("buoyancy").cell(newton_to_gf(p.B)).cell("gf").end_row();
  w.cell("net_mass").cell(p.net_mass() * 1e3).cell("g").end_row();
  w.cell("net_weight").cell(newton_to_gf(p.net_weight())).cell("gf").end_row();
  w.cell("A_ref").cell(veh.aero.A_ref).cell("m2").end_row();
  w.cell("cm2_alpha").cell(sl.cm2_alpha).cell("1/rad").end_row();
  w.cell("cm3_beta").cell(sl.cm3_beta).cell("1/rad").end_row();
  return 0;
}

int verb_trim(const RunConfig& cfg, const Vehicle& veh, std::ostream& log) {
  const auto cells = sweep_parallel(straight_grid(gf_to_newton(cfg.thrust_gf)), veh,
                                    SolveMode::kStraight, solver_options(cfg));
  write_cells(cfg.out / "trim.csv", cells);
  return report_cells(cells, log);
}

int verb_spiral(const RunConfig& cfg, const Vehicle& veh, std::ostream& log) {
  const auto cells = sweep_parallel(spiral_grid(), veh, SolveMode::kSpiral, solver_options(cfg));
  write_cells(cfg.out / "spiral.csv", cells);
  return report_cells(cells, log);
}

// Equilibrium to start from; the full steady solve first, the planar trim
// if that fails.
SteadySolution start_solution(double dr, double Fl, double Fr, const Vehicle& veh,
                              const SolverOptions& opt) {
  try {
    return solve_steady(dr, Fl, Fr, veh, opt);
  } catch (const Error&) {
    return solve_straight(dr, 0.5 * (Fl + Fr), veh, opt);
  }
}

int verb_simulate(const RunConfig& cfg, const Vehicle& veh, Inputs& in, std::ostream& log) {
  if (cfg.schedule.empty()) throw Error(ErrorCode::kConfigError, "simulate requires --schedule");
  require_file(cfg.schedule, "schedule file");
  in.add("schedule", cfg.schedule);
  const InputSchedule sched = load_schedule(cfg.schedule);
  const ScheduleSegment& first = sched.segments.front();
  const double T = cfg.T.value_or(sched.segments.back().t_end);
  const double dr = first.cmd == MassCommand::kGoto ? first.target_dr : cfg.dr_cm * 1e-2;

  const SteadySolution s0 = start_solution(dr, first.Fl, first.Fr, veh, solver_options(cfg));
  const Trajectory traj = integrate(steady_state(s0, s0.rbar), sched, veh, cfg.dt, T);
  write_trajectory_csv(cfg.out / "trajectory.csv", traj, veh.params);
  log << "simulated " << traj.size() << " samples, status " << to_string(traj.status) << '\n';
  if (!traj.complete()) {
    log << "trajectory stopped early at t=" << format_number(traj.t.back()) << ": " << traj.message
        << '\n';
    return 1;
  }
  return 0;
}

void write_observations(const fs::path& path, const std::vector<SteadyObservation>& obs) {
  CsvWriter w(path);
  w.header({"id", "kind", "dr_x_cm", "Fl_gf", "Fr_gf", "theta_deg", "phi_deg", "psidot_dps",
            "V_mps", "alpha_deg", "beta_deg", "mirrored"});
  for (const auto& o : obs) {
    w.cell(o.id).cell(to_string(o.kind)).cell(o.dr_x * 100.0).cell(newton_to_gf(o.Fl));
    w.cell(newton_to_gf(o.Fr)).cell(rad_to_deg(o.theta)).cell(rad_to_deg(o.phi));
    w.cell(rad_to_deg(o.psidot)).cell(o.V).cell(rad_to_deg(o.alpha)).cell(rad_to_deg(o.beta));
    w.cell(o.mirrored ? "1" : "0").end_row();
  }
}

int verb_identify(const RunConfig& cfg, const Vehicle& veh, Inputs& in, std::ostream& log) {
  if (cfg.manifest.empty()) throw Error(ErrorCode::kConfigError, "identify requires --manifest");
  require_file(cfg.manifest, "trial manifest");
  const auto trials = load_trials(cfg.manifest);
  in.add("manifest", cfg.manifest);
  {
    const CsvTable t = read_csv(cfg.manifest);
    const std::size_t col = t.column("file", cfg.manifest);
    for (const auto& row : t.rows) in.add("trial", cfg.manifest.parent_path() / row[col]);
  }

  ExtractOptions eopt;
  eopt.window = cfg.window;
  const auto extracted = extract_parallel(trials, veh.params, eopt);
  std::vector<SteadyObservation> obs;
  for (std::size_t i = 0; i < extracted.size(); ++i) {
    if (extracted[i].obs) {
      obs.push_back(*extracted[i].obs);
    } else {
      log << "trial " << trials[i].id << " skipped: " << extracted[i].error << '\n';
    }
  }
  if (cfg.average_settings) obs = average_settings(obs);
  if (!cfg.no_mirror) obs = mirror_augment(obs);
  write_observations(cfg.out / "observations.csv", obs);

  const FitResult r = fit(obs, veh.params, {}, veh.options);
  write_aero_file(cfg.out / "aero_fit.ini", r.model,
                  "Identified from " + std::to_string(obs.size()) + " steady observations\n" +
                      "Coefficients per channel: c0, c_alpha, c_beta. K in N m s/rad.");
  write_diagnostics_csv(cfg.out / "diagnostics.csv", r);
  log << obs.size() << " observations, " << r.excluded.size() << " excluded as outliers\n";
  for (const auto& id : r.excluded) log << "  excluded " << id << '\n';
  log << "steady-residual RMS " << format_number(r.final_rms)
      << (r.refinement_accepted ? " (refined)" : " (linear fit)") << '\n';
  return 0;
}

int verb_linearize(const RunConfig& cfg, const Vehicle& veh, std::ostream& log) {
  const double F = gf_to_newton(cfg.thrust_gf);
  const SteadySolution s = start_solution(cfg.dr_cm * 1e-2, F, F, veh, solver_options(cfg));
  const Mat8 A = linearize(s, {s.Fl, s.Fr, Vec3::Zero()}, s.rbar, veh);
  const StabilityReport rep = eigen_report(A);

  static const char* names[8] = {"phi", "theta", "u", "v", "w", "p", "q", "r"};
  CsvWriter w(cfg.out / "linearization.csv");
  w.header({"row", "phi", "theta", "u", "v", "w", "p", "q", "r"});
  for (int i = 0; i < 8; ++i) {
    w.cell(names[i]);
    for (int j = 0; j < 8; ++j) w.cell(A(i, j));
    w.end_row();
  }
  CsvWriter e(cfg.out / "eigenvalues.csv");
  e.header({"index", "real", "imag"});
  for (std::size_t i = 0; i < rep.eigenvalues.size(); ++i) {
    e.cell(static_cast<double>(i)).cell(rep.eigenvalues[i].real()).cell(rep.eigenvalues[i].imag());
    e.end_row();
  }
  log << "trim theta=" << format_number(rad_to_deg(s.theta)) << " deg V=" << format_number(s.V)
      << " m/s alpha=" << format_number(rad_to_deg(s.alpha)) << " deg\n";
  log << "slowest mode " << format_number(rep.slowest_mode.real()) << " "
      << format_number(rep.slowest_mode.imag()) << "i, "
      << (rep.hurwitz ? "Hurwitz" : "not Hurwitz") << '\n';
  return 0;
}

int verb_polar(const RunConfig& cfg, const Vehicle& veh, std::ostream& log) {
  std::vector<double> alphas = alpha_grid(0.0, deg_to_rad(20.0), deg_to_rad(0.1));
  const LiftDragTable tab = lift_drag_analysis(veh.aero, alphas, 0.0);
  CsvWriter w(cfg.out / "polar.csv");
  w.header({"alpha_deg", "C_L", "C_D", "LD"});
  for (const auto& r : tab.rows) {
    w.cell(rad_to_deg(r.alpha)).cell(r.CL).cell(r.CD).cell(r.LD).end_row();
  }
  w.comment("max_LD=" + format_number(tab.max_LD) +
            " at alpha_deg=" + format_number(rad_to_deg(tab.alpha_star)));
  log << "max L/D " << format_number(tab.max_LD) << " at alpha "
      << format_number(rad_to_deg(tab.alpha_star)) << " deg\n";
  return 0;
}

int verb_synth(const RunConfig& cfg, const Vehicle& veh, std::ostream& log) {
  std::vector<TrimCell> cells = straight_grid(gf_to_newton(cfg.thrust_gf));
  const auto spiral = spiral_grid();
  cells.insert(cells.end(), spiral.begin(), spiral.end());
  const auto solved = sweep_parallel(cells, veh, SolveMode::kSteady, solver_options(cfg));
  report_cells(solved, log);
  const auto trials = synth_trials_parallel(solved, veh, cfg.T.value_or(20.0));
  write_trials(cfg.out / "trials.csv", trials);
  log << "wrote " << trials.size() << " trials\n";
  return trials.size() == cells.size() ? 0 : 1;
}

int verb_validate(const RunConfig& cfg, std::ostream& log) {
  const auto results = run_acceptance(data_dir(cfg), cfg.out / "validate_work");
  print_results(log, results);
  const bool ok = std::all_of(results.begin(), results.end(),
                              [](const CriterionResult& r) { return r.pass; });
  return ok ? 0 : 1;
}

}  // namespace

Vehicle load_vehicle(const RunConfig& cfg) {
  const fs::path pp = params_path(cfg);
  require_file(pp, "params file");
  VehicleConfig vc = load_vehicle_file(pp);
  if (!cfg.aero.empty()) {
    require_file(cfg.aero, "aero file");
    vc.aero = load_aero_file(cfg.aero, vc.params.A_ref);
  }
  Vehicle v{vc.params, vc.aero, {}};
  if (cfg.symmetric) {
    v.params = symmetrized(v.params);
    v.aero = symmetrized(v.aero);
  }
  v.options.legacy = cfg.legacy_model;
  return v;
}

int run(const RunConfig& cfg, std::ostream& log) {
  try {
    if (std::find(kVerbs.begin(), kVerbs.end(), cfg.verb) == kVerbs.end()) {
      throw Error(ErrorCode::kConfigError, "unknown verb '" + cfg.verb + "'");
    }
    if (!(cfg.dt > 0.0 && cfg.dt <= 0.05)) {
      throw Error(ErrorCode::kConfigError, "--dt must be in (0, 0.05] s");
    }
    if (cfg.T && !(*cfg.T > 0.0)) throw Error(ErrorCode::kConfigError, "--T must be positive");
    if (cfg.tol && !(*cfg.tol > 0.0)) throw Error(ErrorCode::kConfigError, "--tol must be positive");
    std::error_code ec;
    fs::create_directories(cfg.out, ec);
    if (ec || !fs::is_directory(cfg.out)) {
      throw Error(ErrorCode::kIoError, "cannot create output directory " + cfg.out.string());
    }

    Inputs in;
    int status = 0;
    if (cfg.verb == "validate") {
      status = verb_validate(cfg, log);
    } else {
      const Vehicle veh = load_vehicle(cfg);
      in.add("params", params_path(cfg));
      if (!cfg.aero.empty()) in.add("aero", cfg.aero);
      if (cfg.verb == "params-check") status = verb_params_check(cfg, veh, log);
      else if (cfg.verb == "trim") status = verb_trim(cfg, veh, log);
      else if (cfg.verb == "spiral") status = verb_spiral(cfg, veh, log);
      else if (cfg.verb == "simulate") status = verb_simulate(cfg, veh, in, log);
      else if (cfg.verb == "identify") status = verb_identify(cfg, veh, in, log);
      else if (cfg.verb == "linearize") status = verb_linearize(cfg, veh, log);
      else if (cfg.verb == "polar") status = verb_polar(cfg, veh, log);
      else status = verb_synth(cfg, veh, log);
    }
    write_manifest(cfg, in);
    return status;
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return is_usage_error(e.code()) ? 2 : 1;
  } catch (const fs::filesystem_error& e) {
    log << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace blimp::app
