#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ridepool {

/// Minimal reader for header-first delimiter-separated tables.
///
/// The delimiter is detected from the header line (',', ';' or tab). Blank
/// lines and lines starting with '#' are skipped. Row numbers reported in
/// errors are 1-based physical line numbers.
class CsvTable {
 public:
  struct Row {
    std::size_t line = 0;
    std::vector<std::string> cells;
  };

  static CsvTable parse(std::istream& in, std::string_view source_name);
  static CsvTable read_file(const std::string& path);

  const std::string& source() const { return source_; }
  const std::vector<Row>& rows() const { return rows_; }
  std::optional<std::size_t> column(std::string_view name) const;
  std::size_t require_column(std::string_view name) const;

  double number(const Row& row, std::size_t col) const;
  long long integer(const Row& row, std::size_t col) const;
  /// Empty cell or missing trailing column yields nullopt.
  std::optional<double> optional_number(const Row& row, std::size_t col) const;

 private:
  std::string source_;
  std::vector<std::string> header_;
  std::vector<Row> rows_;
};

}  // namespace ridepool
