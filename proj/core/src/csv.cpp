#include "ridepool/csv.hpp"

#include <charconv>
#include <fstream>

#include <fmt/format.h>

#include "ridepool/error.hpp"

namespace ridepool {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split(std::string_view line, char delim) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delim, start);
    const std::string_view cell = line.substr(start, pos == std::string_view::npos ? line.size() - start : pos - start);
    out.emplace_back(trim(cell));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

bool skippable(std::string_view line) {
  const auto t = trim(line);
  return t.empty() || t.front() == '#';
}

}  // namespace

CsvTable CsvTable::parse(std::istream& in, std::string_view source_name) {
  CsvTable table;
  table.source_ = std::string(source_name);
  std::string line;
  std::size_t line_no = 0;
  char delim = ',';
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    if (!have_header) {
      if (line.find('\t') != std::string::npos) {
        delim = '\t';
      } else if (line.find(';') != std::string::npos && line.find(',') == std::string::npos) {
        delim = ';';
      }
      table.header_ = split(line, delim);
      have_header = true;
      continue;
    }
    table.rows_.push_back(Row{line_no, split(line, delim)});
  }
  if (!have_header) throw LoadError(fmt::format("{}: missing header line", table.source_));
  return table;
}

CsvTable CsvTable::read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError(fmt::format("{}: cannot open file", path));
  return parse(in, path);
}

std::optional<std::size_t> CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (header_[i] == name) return i;
  }
  return std::nullopt;
}

std::size_t CsvTable::require_column(std::string_view name) const {
  if (auto c = column(name)) return *c;
  throw LoadError(fmt::format("{}: missing column '{}'", source_, name));
}

double CsvTable::number(const Row& row, std::size_t col) const {
  if (col >= row.cells.size() || row.cells[col].empty()) {
    throw LoadError(fmt::format("{}: row {}: missing value for column '{}'", source_, row.line, header_[col]));
  }
  const std::string& cell = row.cells[col];
  double value = 0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw LoadError(fmt::format("{}: row {}: malformed number '{}' in column '{}'", source_, row.line, cell, header_[col]));
  }
  return value;
}

long long CsvTable::integer(const Row& row, std::size_t col) const {
  if (col >= row.cells.size() || row.cells[col].empty()) {
    throw LoadError(fmt::format("{}: row {}: missing value for column '{}'", source_, row.line, header_[col]));
  }
  const std::string& cell = row.cells[col];
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw LoadError(fmt::format("{}: row {}: malformed integer '{}' in column '{}'", source_, row.line, cell, header_[col]));
  }
  return value;
}

std::optional<double> CsvTable::optional_number(const Row& row, std::size_t col) const {
  if (col >= row.cells.size() || row.cells[col].empty()) return std::nullopt;
  return number(row, col);
}

}  // namespace ridepool
