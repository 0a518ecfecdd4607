#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "wdro/errors.hpp"
#include "wdro/linalg.hpp"
#include "wdro/lp.hpp"

namespace wdro {

/// Header plus rows of already formatted fields.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
};

/// Shortest decimal form that parses back to the same double.
inline std::string fmt_exact(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

/// Splits one RFC 4180 record starting at `pos`; advances `pos` past the line break.
inline std::vector<std::string> csv_record(const std::string& text, std::size_t& pos) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  while (pos < text.size()) {
    const char c = text[pos++];
    if (quoted) {
      if (c == '"') {
        if (pos < text.size() && text[pos] == '"') {
          fields.back() += '"';
          ++pos;
        } else {
          quoted = false;
        }
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else if (c == '\n') {
      break;
    } else if (c != '\r') {
      fields.back() += c;
    }
  }
  if (quoted) fail(ErrorKind::ParseError, "unterminated quoted CSV field");
  return fields;
}

}  // namespace detail

inline void write_csv(std::ostream& os, const CsvTable& t) {
  auto line = [&](const std::vector<std::string>& r) {
    for (std::size_t j = 0; j < r.size(); ++j) os << (j ? "," : "") << detail::csv_field(r[j]);
    os << "\r\n";
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
}

inline void write_csv_file(const std::string& path, const CsvTable& t) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::InvalidConfig, "cannot open " + path + " for writing");
  write_csv(f, t);
}

inline CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::size_t pos = 0;
  if (text.empty()) fail(ErrorKind::ParseError, "CSV input is empty");
  t.header = detail::csv_record(text, pos);
  while (pos < text.size()) {
    auto r = detail::csv_record(text, pos);
    if (r.size() == 1 && r[0].empty()) continue;
    if (r.size() != t.header.size())
      fail(ErrorKind::ParseError, "CSV record " + std::to_string(t.rows.size() + 1) + " has " + std::to_string(r.size()) +
                                      " fields, header has " + std::to_string(t.header.size()));
    t.rows.push_back(std::move(r));
  }
  return t;
}

inline double parse_number(const std::string& s, const std::string& where) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  while (b < e && *b == ' ') ++b;
  while (e > b && e[-1] == ' ') --e;
  if (b < e && *b == '+') ++b;
  const auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc() || res.ptr != e) fail(ErrorKind::ParseError, where + ": '" + s + "' is not a number");
  return v;
}

/// Numeric dataset with a header row; one sample per record.
inline std::vector<Vector> read_csv_dataset(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::InvalidConfig, "cannot open dataset " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  const auto t = parse_csv(ss.str());
  std::vector<Vector> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    Vector x;
    for (std::size_t j = 0; j < t.rows[i].size(); ++j)
      x.push_back(parse_number(t.rows[i][j], path + " row " + std::to_string(i + 1) + " column " + t.header[j]));
    out.push_back(std::move(x));
  }
  if (out.empty()) fail(ErrorKind::DatasetTooSmall, "dataset " + path + " has no rows");
  return out;
}

inline void write_csv_dataset(const std::string& path, const std::vector<Vector>& data) {
  CsvTable t;
  for (std::size_t j = 0; j < (data.empty() ? 0 : data.front().size()); ++j) t.header.push_back("xi" + std::to_string(j + 1));
  for (const auto& x : data) {
    std::vector<std::string> r;
    for (double v : x) r.push_back(fmt_exact(v));
    t.add(std::move(r));
  }
  write_csv_file(path, t);
}

}  // namespace wdro
