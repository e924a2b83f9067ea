#include "migbatchsim/csv.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

namespace migbatchsim {
namespace csv {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

[[noreturn]] void fail(const std::string& path, int line, const std::string& what) {
  throw std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(trim(cur));
  return fields;
}

std::vector<Row> load(const std::string& path, const std::string& expected_header) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<Row> rows;
  std::string line;
  int lineno = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty()) continue;
    if (!saw_header) {
      if (t != expected_header) fail(path, lineno, "expected header '" + expected_header + "', got '" + t + "'");
      saw_header = true;
      continue;
    }
    Row row;
    row.line = lineno;
    row.fields = split_line(t);
    rows.push_back(std::move(row));
  }
  if (!saw_header) throw std::runtime_error(path + ": empty file, expected header '" + expected_header + "'");
  return rows;
}

double parse_double(const std::string& path, const Row& row, std::size_t field) {
  if (field >= row.fields.size()) fail(path, row.line, "missing field " + std::to_string(field + 1));
  const std::string& s = row.fields[field];
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') fail(path, row.line, "not a number: '" + s + "'");
  return v;
}

long long parse_int(const std::string& path, const Row& row, std::size_t field) {
  if (field >= row.fields.size()) fail(path, row.line, "missing field " + std::to_string(field + 1));
  const std::string& s = row.fields[field];
  char* end = nullptr;
  long long v = std::strtoll(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0') fail(path, row.line, "not an integer: '" + s + "'");
  return v;
}

}  // namespace csv
}  // namespace migbatchsim
