#include "blimp/csv.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "blimp/types.hpp"

namespace blimp {

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path) : out_(path, std::ios::binary), path_(path) {
  if (!out_) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
}

void CsvWriter::header(std::initializer_list<std::string_view> cols) {
  for (auto c : cols) cell(c);
  end_row();
}

void CsvWriter::header(const std::vector<std::string>& cols) {
  for (const auto& c : cols) cell(std::string_view(c));
  end_row();
}

CsvWriter& CsvWriter::cell(double v) { return cell(std::string_view(format_number(v))); }

CsvWriter& CsvWriter::cell(std::string_view s) {
  if (row_open_) out_ << ',';
  out_ << s;
  row_open_ = true;
  return *this;
}

void CsvWriter::end_row() {
  out_ << '\n';
  row_open_ = false;
  if (!out_) throw Error(ErrorCode::kIoError, "write failed on " + path_.string());
}

void CsvWriter::comment(std::string_view text) { out_ << "# " << text << '\n'; }

std::size_t CsvTable::column(std::string_view name, const std::filesystem::path& source) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw Error(ErrorCode::kSchemaError,
              source.string() + ": missing column '" + std::string(name) + "'");
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) field.pop_back();
    std::size_t b = field.find_first_not_of(" \t");
    out.push_back(b == std::string::npos ? std::string() : field.substr(b));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  CsvTable t;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto fields = split(line);
    if (!have_header) {
      t.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != t.header.size()) {
      throw Error(ErrorCode::kSchemaError, path.string() + ":" + std::to_string(lineno) +
                                               ": expected " + std::to_string(t.header.size()) +
                                               " fields, got " + std::to_string(fields.size()));
    }
    t.rows.push_back(std::move(fields));
    t.line_numbers.push_back(lineno);
  }
  if (!have_header) throw Error(ErrorCode::kSchemaError, path.string() + ": empty file");
  return t;
}

void require_header(const CsvTable& t, std::initializer_list<std::string_view> expected,
                    const std::filesystem::path& source) {
  bool ok = t.header.size() == expected.size();
  std::size_t i = 0;
  for (auto e : expected) {
    if (!ok) break;
    ok = t.header[i++] == e;
  }
  if (!ok) {
    std::string want;
    for (auto e : expected) want += (want.empty() ? "" : ",") + std::string(e);
    throw Error(ErrorCode::kSchemaError,
                source.string() + ": header mismatch, expected '" + want + "'");
  }
}

double parse_double(const std::string& text, const std::filesystem::path& source,
                    std::size_t line, std::string_view column) {
  try {
    std::size_t used = 0;
    double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kSchemaError, source.string() + ":" + std::to_string(line) +
                                             ": column '" + std::string(column) +
                                             "' is not a number: '" + text + "'");
  }
}

}  // namespace blimp
