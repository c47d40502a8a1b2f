#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <unistd.h>

#include "acceptance.hpp"
#include "app.hpp"
#include "blimp/csv.hpp"

namespace blimp::app {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("blimp_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  RunConfig config(const std::string& verb, const std::string& sub) {
    RunConfig c;
    c.verb = verb;
    c.out = dir_ / sub;
    return c;
  }
  int run_quiet(const RunConfig& c) {
    log_.str("");
    return run(c, log_);
  }

  fs::path dir_;
  std::ostringstream log_;
};

TEST_F(Cli, PolarFooter) {
  const RunConfig c = config("polar", "polar");
  ASSERT_EQ(run_quiet(c), 0) << log_.str();
  const CsvTable t = read_csv(c.out / "polar.csv");
  EXPECT_EQ(t.rows.size(), 201u);
  const std::string text = slurp(c.out / "polar.csv");
  const auto pos = text.find("# max_LD=");
  ASSERT_NE(pos, std::string::npos);
  double ld = 0.0, alpha = 0.0;
  ASSERT_EQ(std::sscanf(text.c_str() + pos, "# max_LD=%lf at alpha_deg=%lf", &ld, &alpha), 2);
  EXPECT_NEAR(ld, 1.78, 0.05);
  EXPECT_NEAR(alpha, 10.7, 0.3);
}

TEST_F(Cli, TrimGrid) {
  const RunConfig c = config("trim", "trim");
  ASSERT_EQ(run_quiet(c), 0) << log_.str();
  const CsvTable t = read_csv(c.out / "trim.csv");
  ASSERT_EQ(t.rows.size(), 11u);
  const std::size_t st = t.column("status", "");
  for (const auto& row : t.rows) EXPECT_EQ(row[st], "ok");
  const std::string manifest = slurp(c.out / "run_manifest.txt");
  EXPECT_NE(manifest.find("sha256 params"), std::string::npos) << manifest;
  EXPECT_NE(manifest.find(kToolVersion), std::string::npos);
}

TEST_F(Cli, ExitCodes) {
  RunConfig c = config("trim", "codes");
  c.thrust_gf = 0.0;  // no forward thrust: some cells cannot trim
  EXPECT_EQ(run_quiet(c), 1) << log_.str();

  c = config("params-check", "codes");
  c.params = dir_ / "absent.ini";
  EXPECT_EQ(run_quiet(c), 2);
  EXPECT_NE(log_.str().find("absent.ini"), std::string::npos) << log_.str();

  c = config("simulate", "codes");
  EXPECT_EQ(run_quiet(c), 2);  // --schedule required

  c = config("trim", "codes");
  c.dt = 0.5;
  EXPECT_EQ(run_quiet(c), 2);

  c = config("linearize", "codes");
  c.dr_cm = 50.0;
  EXPECT_EQ(run_quiet(c), 2);

  std::ofstream(dir_ / "bad.ini") << "[mass]\nm_kg = -3\n";
  c = config("params-check", "codes");
  c.params = dir_ / "bad.ini";
  EXPECT_EQ(run_quiet(c), 2);

  EXPECT_EQ(run_quiet(config("params-check", "codes")), 0) << log_.str();
}

TEST_F(Cli, InputsNotMutated) {
  const fs::path params = default_data_dir() / "vehicle.ini";
  const fs::path sched = default_data_dir() / "staircase_schedule.csv";
  const std::string before_p = sha256_file(params);
  const std::string before_s = sha256_file(sched);
  RunConfig c = config("simulate", "sim");
  c.params = params;
  c.schedule = sched;
  c.T = 2.0;
  ASSERT_EQ(run_quiet(c), 0) << log_.str();
  EXPECT_EQ(sha256_file(params), before_p);
  EXPECT_EQ(sha256_file(sched), before_s);
  const CsvTable t = read_csv(c.out / "trajectory.csv");
  EXPECT_EQ(t.rows.size(), 401u);
  const std::string manifest = slurp(c.out / "run_manifest.txt");
  EXPECT_NE(manifest.find(before_s), std::string::npos);
}

TEST_F(Cli, Sha256KnownVector) {
  std::ofstream(dir_ / "abc.txt", std::ios::binary) << "abc";
  EXPECT_EQ(sha256_file(dir_ / "abc.txt"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_F(Cli, WinglessIsSlower) {
  RunConfig a = config("linearize", "lin");
  ASSERT_EQ(run_quiet(a), 0) << log_.str();
  RunConfig b = config("linearize", "lin_wingless");
  b.wingless = true;
  ASSERT_EQ(run_quiet(b), 0) << log_.str();
  auto slowest = [](const fs::path& p) {
    const CsvTable t = read_csv(p);
    const std::size_t re = t.column("real", "");
    double s = -1e300;
    for (const auto& row : t.rows) s = std::max(s, std::stod(row[re]));
    return s;
  };
  const double wing = slowest(a.out / "eigenvalues.csv");
  const double none = slowest(b.out / "eigenvalues.csv");
  EXPECT_NEAR(wing, -0.37, 0.10);
  EXPECT_GT(none, wing);
}

TEST_F(Cli, IdentifyRecoversModel) {
  RunConfig s = config("synth-trials", "synth");
  s.T = 12.0;
  ASSERT_EQ(run_quiet(s), 0) << log_.str();
  RunConfig id = config("identify", "id");
  id.manifest = s.out / "trials.csv";
  ASSERT_EQ(run_quiet(id), 0) << log_.str();
  const CsvTable t = read_csv(id.out / "diagnostics.csv");
  ASSERT_EQ(t.rows.size(), 6u);
  const CsvTable obs = read_csv(id.out / "observations.csv");
  EXPECT_GT(obs.rows.size(), 47u);  // spirals appear twice with mirroring
  const std::string manifest = slurp(id.out / "run_manifest.txt");
  EXPECT_NE(manifest.find("sha256 trial"), std::string::npos);
}

TEST(Acceptance, PrintFormat) {
  std::ostringstream out;
  print_results(out, {{3, "net mass", true, "6.85 g", 0.01}, {4, "slowest mode", false, "x", 0.2}});
  const std::string s = out.str();
  EXPECT_EQ(s.rfind("PASS 3 net mass: 6.85 g", 0), 0u) << s;
  EXPECT_NE(s.find("\nFAIL 4 slowest mode: x"), std::string::npos) << s;
}

}  // namespace
}  // namespace blimp::app
