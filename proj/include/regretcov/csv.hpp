#pragma once

#include <string>
#include <vector>

namespace regretcov::csv {

/// Shortest decimal form that round-trips a double exactly.
std::string format_double(double v);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 when absent
};

Table read_file(const std::string& path);
Table read_string(const std::string& text);

std::vector<std::string> split_line(const std::string& line);

}  // namespace regretcov::csv
