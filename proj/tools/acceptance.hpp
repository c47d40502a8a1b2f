#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace blimp::app {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

// Runs acceptance criteria 1-9. Scratch files go under work_dir.
std::vector<CriterionResult> run_acceptance(const std::filesystem::path& data_dir,
                                            const std::filesystem::path& work_dir);

// One "PASS|FAIL <id> <title>: <detail>" line per criterion.
void print_results(std::ostream& out, const std::vector<CriterionResult>& results);

}  // namespace blimp::app
