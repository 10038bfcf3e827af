#pragma once
// Small CSV/number helpers shared by the serialization code.  All numeric
// output uses "%.17g" so that doubles survive a write/read round trip
// bit-exactly, independent of locale.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace subdisc {

inline std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return std::string(buf);
}

inline double parse_double(const std::string& s) {
  const char* p = s.c_str();
  char* end = nullptr;
  double x = std::strtod(p, &end);
  if (end == p) throw std::invalid_argument("parse_double: not a number: '" + s + "'");
  while (*end == ' ' || *end == '\t' || *end == '\r') ++end;
  if (*end != '\0') throw std::invalid_argument("parse_double: trailing junk: '" + s + "'");
  return x;
}

inline long parse_long(const std::string& s) {
  const char* p = s.c_str();
  char* end = nullptr;
  long x = std::strtol(p, &end, 10);
  if (end == p) throw std::invalid_argument("parse_long: not an integer: '" + s + "'");
  while (*end == ' ' || *end == '\t' || *end == '\r') ++end;
  if (*end != '\0') throw std::invalid_argument("parse_long: trailing junk: '" + s + "'");
  return x;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace subdisc
