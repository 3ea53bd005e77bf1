#pragma once

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "odflow/error.hpp"

namespace odflow {

// Header + rows, all fields kept as strings.  Values are converted on access.
struct CsvTable {
  std::string path;  // for error messages; may be "<memory>"
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  }

  int require_column(const std::string& name) const {
    const int c = column(name);
    if (c < 0)
      throw Error(ErrorCode::SchemaError,
                  path + ": missing required column '" + name + "'");
    return c;
  }
};

namespace detail {

inline std::string strip(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return s.substr(b, e - b);
}

// One line -> fields.  Double quotes delimit fields that contain commas;
// "" inside a quoted field is a literal quote.
inline std::vector<std::string> split_csv_line(const std::string& line,
                                               const std::string& where) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      if (!cur.empty())
        throw Error(ErrorCode::ParseError, where + ": stray quote");
      quoted = true;
    } else if (c == ',') {
      out.push_back(strip(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw Error(ErrorCode::ParseError, where + ": unterminated quote");
  out.push_back(strip(cur));
  return out;
}

}  // namespace detail

inline CsvTable read_csv_stream(std::istream& in, const std::string& path) {
  CsvTable t;
  t.path = path;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = detail::strip(line);
    if (stripped.empty()) continue;
    auto fields =
        detail::split_csv_line(line, path + ":" + std::to_string(lineno));
    if (t.header.empty()) {
      t.header = std::move(fields);
    } else {
      if (fields.size() != t.header.size())
        throw Error(ErrorCode::ParseError,
                    path + ":" + std::to_string(lineno) + ": expected " +
                        std::to_string(t.header.size()) + " fields, got " +
                        std::to_string(fields.size()));
      t.rows.push_back(std::move(fields));
    }
  }
  if (t.header.empty())
    throw Error(ErrorCode::ParseError, path + ": empty file");
  return t;
}

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  return read_csv_stream(in, path);
}

inline CsvTable read_csv_string(const std::string& text,
                                const std::string& label = "<memory>") {
  std::istringstream in(text);
  return read_csv_stream(in, label);
}

namespace detail {
inline bool only_spaces_remain(const char* p) {
  while (*p != '\0') {
    if (!std::isspace(static_cast<unsigned char>(*p))) return false;
    ++p;
  }
  return true;
}
}  // namespace detail

inline double parse_double(const std::string& s, const std::string& where) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || !detail::only_spaces_remain(end))
    throw Error(ErrorCode::ParseError, where + ": not a number: '" + s + "'");
  return v;
}

inline long parse_long(const std::string& s, const std::string& where) {
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (end == s.c_str() || !detail::only_spaces_remain(end))
    throw Error(ErrorCode::ParseError, where + ": not an integer: '" + s + "'");
  return v;
}

}  // namespace odflow
