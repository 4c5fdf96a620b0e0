#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace pchaz::csv {

/// Header plus data rows of a comma-separated file. Blank lines are skipped.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of `name` in the header, or -1.
  int column(std::string_view name) const;
};

Table read(std::istream& in);
std::vector<std::string> split_line(std::string_view line);

/// Strict decimal parse of a whole field; throws ParseError naming the
/// 1-based data row.
double parse_double(std::string_view field, long row);
int parse_int(std::string_view field, long row);

/// Shortest representation that parses back to the same double.
std::string format(double value);

}  // namespace pchaz::csv
