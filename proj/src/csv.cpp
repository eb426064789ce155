#include "cardioinfer/csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "cardioinfer/common.hpp"

namespace cardioinfer {

int CsvTable::column(const std::string& name) const {
  for (int c = 0; c < n_cols(); ++c) {
    if (header[c] == name) return c;
  }
  throw ParseError("CSV column '" + name + "' not found");
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace

CsvTable parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  CsvTable table;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> fields = split_fields(line);
    if (line_no == 1) {
      table.header = fields;
      continue;
    }
    if (static_cast<int>(fields.size()) != table.n_cols()) {
      throw ParseError("CSV line " + std::to_string(line_no) + ": expected " +
                       std::to_string(table.n_cols()) + " fields, got " +
                       std::to_string(fields.size()));
    }
    std::vector<double> row(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const char* s = fields[c].c_str();
      char* end = nullptr;
      row[c] = std::strtod(s, &end);
      if (end == s || *end != '\0') {
        throw ParseError("CSV line " + std::to_string(line_no) +
                         ": non-numeric cell '" + fields[c] + "'");
      }
    }
    table.rows.push_back(std::move(row));
  }
  if (table.header.empty()) throw ParseError("CSV has no header row");
  return table;
}

std::string format_csv(const CsvTable& table, int precision) {
  std::string out;
  for (int c = 0; c < table.n_cols(); ++c) {
    if (c > 0) out += ",";
    out += table.header[c];
  }
  out += "\n";
  char buf[48];
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      std::snprintf(buf, sizeof(buf), c > 0 ? ",%.*g" : "%.*g", precision,
                    row[c]);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

}  // namespace cardioinfer
