#pragma once

#include <string>
#include <vector>

namespace cardioinfer {

/// Minimal numeric CSV: a header row of names and double-valued cells.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  int n_cols() const { return static_cast<int>(header.size()); }
  int n_rows() const { return static_cast<int>(rows.size()); }

  /// Column index by name; throws ParseError if absent.
  int column(const std::string& name) const;
};

/// Parses a comma-separated table with one header row. Throws ParseError
/// (with line number) on ragged rows or non-numeric cells.
CsvTable parse_csv(const std::string& text);

/// Fixed-precision serialization so identical tables give identical bytes.
std::string format_csv(const CsvTable& table, int precision = 9);

}  // namespace cardioinfer
