#pragma once

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

namespace dsotto::cli {

// A missing value (failed point, undefined efficiency) is monostate and prints as an empty field.
using Cell = std::variant<std::monostate, double, long long, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

inline std::string format_number(double x, int precision) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", precision, x);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += (c == '\n' || c == '\r') ? ' ' : c;
  }
  return q + "\"";
}

inline std::string format_cell(const Cell& c, int precision) {
  struct V {
    int p;
    std::string operator()(std::monostate) const { return ""; }
    std::string operator()(double x) const { return format_number(x, p); }
    std::string operator()(long long x) const { return std::to_string(x); }
    std::string operator()(const std::string& s) const { return csv_field(s); }
  };
  return std::visit(V{precision}, c);
}

// Metadata lines are written first, each prefixed by "# ", then the header and rows.
inline void write_csv(std::ostream& os, const std::vector<std::string>& metadata, const Table& t,
                      int precision) {
  for (const auto& m : metadata) os << "# " << m << '\n';
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << '\n';
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << format_cell(r[i], precision);
    os << '\n';
  }
}

// Numbers are rounded through the same formatter as the CSV so both outputs agree digit for digit.
inline nlohmann::ordered_json table_to_json(const Table& t, int precision) {
  auto rows = nlohmann::ordered_json::array();
  for (const auto& r : t.rows) {
    nlohmann::ordered_json o;
    for (std::size_t i = 0; i < r.size(); ++i) {
      const Cell& c = r[i];
      if (std::holds_alternative<std::monostate>(c)) o[t.columns[i]] = nullptr;
      else if (auto* d = std::get_if<double>(&c))
        o[t.columns[i]] = std::isfinite(*d) ? nlohmann::ordered_json(std::stod(format_number(*d, precision)))
                                            : nlohmann::ordered_json(nullptr);
      else if (auto* n = std::get_if<long long>(&c)) o[t.columns[i]] = *n;
      else o[t.columns[i]] = std::get<std::string>(c);
    }
    rows.push_back(std::move(o));
  }
  return rows;
}

struct CsvDocument {
  std::vector<std::string> metadata;  // without the "# " prefix
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return int(i);
    return -1;
  }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline CsvDocument read_csv(std::istream& is) {
  CsvDocument d;
  std::string line;
  bool header = false;
  while (std::getline(is, line)) {
    if (!header && line.rfind("#", 0) == 0) {
      d.metadata.push_back(line.size() > 2 ? line.substr(2) : "");
      continue;
    }
    if (!header) {
      d.columns = split_csv_line(line);
      header = true;
      continue;
    }
    if (!line.empty()) d.rows.push_back(split_csv_line(line));
  }
  return d;
}

}  // namespace dsotto::cli
