#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace blimp {

// Fixed float format for every CSV/parameter file we emit (%.9g).
std::string format_number(double v);

// Writes LF-terminated rows. Numbers go through format_number.
class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& path);

  void header(std::initializer_list<std::string_view> cols);
  void header(const std::vector<std::string>& cols);

  CsvWriter& cell(double v);
  CsvWriter& cell(std::string_view s);
  void end_row();

  void comment(std::string_view text);

 private:
  std::ofstream out_;
  std::filesystem::path path_;
  bool row_open_ = false;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line of each row

  // Index of a column; throws Error(kSchemaError) naming the file if missing.
  std::size_t column(std::string_view name, const std::filesystem::path& source) const;
};

// Reads a comma-separated file. Blank lines and lines starting with '#' are
// skipped. Throws Error(kIoError) if the file cannot be opened and
// Error(kSchemaError) on ragged rows.
CsvTable read_csv(const std::filesystem::path& path);

// Throws Error(kSchemaError) unless the header matches exactly.
void require_header(const CsvTable& t, std::initializer_list<std::string_view> expected,
                    const std::filesystem::path& source);

double parse_double(const std::string& text, const std::filesystem::path& source,
                    std::size_t line, std::string_view column);

}  // namespace blimp
