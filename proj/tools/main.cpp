#include <iostream>

#include "CLI11.hpp"
#include "app.hpp"

int main(int argc, char** argv) {
  using blimp::app::RunConfig;
  RunConfig cfg;
  double T = 0.0, tol = 0.0;

  CLI::App cli{"Flight dynamics workbench for a winged blimp with moving-mass control"};
  cli.add_option("verb", cfg.verb, "params-check | trim | spiral | simulate | identify | linearize | "
                                   "polar | validate | synth-trials")
      ->required()
      ->check(CLI::IsMember(blimp::app::kVerbs));
  cli.add_option("--params", cfg.params, "Vehicle parameter file (default: bundled)");
  cli.add_option("--aero", cfg.aero, "Aerodynamic model file ([aero] section)");
  cli.add_option("--out", cfg.out, "Output directory")->capture_default_str();
  cli.add_option("--dt", cfg.dt, "Integration step [s]")->capture_default_str();
  auto* T_opt = cli.add_option("--T", T, "Duration [s] (simulate, synth-trials)");
  cli.add_option("--schedule", cfg.schedule, "Input schedule CSV (simulate)");
  cli.add_option("--manifest", cfg.manifest, "Trial manifest CSV (identify)");
  cli.add_flag("--legacy-model", cfg.legacy_model, "Drop the CG-offset coupling terms");
  cli.add_flag("--wingless", cfg.wingless, "Use the bundled wingless vehicle");
  auto* tol_opt = cli.add_option("--tol", tol, "Steady-solver residual tolerance");
  cli.add_flag("--symmetric", cfg.symmetric, "Zero every y-offset and beta-even odd-channel term");
  cli.add_flag("--average-settings", cfg.average_settings,
               "Average observations sharing a setting before fitting");
  cli.add_flag("--no-mirror", cfg.no_mirror, "Skip mirror augmentation of spiral observations");
  cli.add_option("--thrust-gf", cfg.thrust_gf, "Thrust per propeller for trim/linearize [gf]")
      ->capture_default_str();
  cli.add_option("--dr-cm", cfg.dr_cm, "Moving-mass displacement for linearize/simulate [cm]")
      ->capture_default_str();
  cli.add_option("--window", cfg.window, "Steady-extraction window [s]")->capture_default_str();
  cli.add_option("--data-dir", cfg.data_dir, "Directory of the bundled data files");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? 0 : 2;
  }
  if (*T_opt) cfg.T = T;
  if (*tol_opt) cfg.tol = tol;
  return blimp::app::run(cfg, std::cout);
}
