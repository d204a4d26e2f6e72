#pragma once

#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace trendlab::detail {

std::vector<std::string> split_csv_line(std::string_view line);

/// Reads lines, stripping a trailing '\r'. Returns false at EOF.
bool read_line(std::istream& in, std::string& line);

/// Throws DataError unless the first line equals `expected`.
void expect_header(std::istream& in, std::string_view expected, std::string_view what);

}  // namespace trendlab::detail
