#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "blimp/dynamics.hpp"
#include "blimp/equilibria.hpp"

namespace blimp::app {

inline constexpr const char* kToolVersion = "blimp 1.0.0";

inline const std::vector<std::string> kVerbs = {
    "params-check", "trim", "spiral", "simulate", "identify",
    "linearize",    "polar", "validate", "synth-trials"};

struct RunConfig {
  std::string verb;
  std::filesystem::path params;    // empty: bundled file
  std::filesystem::path aero;      // empty: [aero] section of the params file
  std::filesystem::path out = ".";
  std::filesystem::path schedule;
  std::filesystem::path manifest;
  std::filesystem::path data_dir;  // empty: compiled-in default
  double dt = 0.005;
  std::optional<double> T;
  std::optional<double> tol;
  bool legacy_model = false;
  bool wingless = false;
  bool symmetric = false;
  bool average_settings = false;
  bool no_mirror = false;
  double thrust_gf = 2.0;  // per propeller, trim and linearize
  double dr_cm = 0.0;      // linearize, simulate start
  double window = 4.0;     // steady-extraction window [s]
};

// Executes one verb. Returns the process exit status: 0 ok, 1 domain error,
// 2 usage or I/O error. Messages go to `log`.
int run(const RunConfig& cfg, std::ostream& log);

// Vehicle selected by the config (bundled or --params, --aero, --wingless,
// --symmetric, --legacy-model).
Vehicle load_vehicle(const RunConfig& cfg);

std::filesystem::path default_data_dir();

// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace blimp::app
