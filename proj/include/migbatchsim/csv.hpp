#pragma once

#include <string>
#include <vector>

namespace migbatchsim {
namespace csv {

struct Row {
  int line = 0;  // 1-based line number in the source file
  std::vector<std::string> fields;
};

// Loads a CSV file: first non-empty line must equal `expected_header` (after
// whitespace trimming), remaining non-empty lines become rows. Throws
// std::runtime_error naming the file and line on any problem.
std::vector<Row> load(const std::string& path, const std::string& expected_header);

std::vector<std::string> split_line(const std::string& line);

double parse_double(const std::string& path, const Row& row, std::size_t field);
long long parse_int(const std::string& path, const Row& row, std::size_t field);

}  // namespace csv
}  // namespace migbatchsim
