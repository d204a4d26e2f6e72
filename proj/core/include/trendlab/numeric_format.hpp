#pragma once

#include <string>

namespace trendlab {

/// Shortest round-trip decimal representation; byte-stable across runs.
std::string format_number(double value);

/// Parses a full-field decimal number; throws DataError naming `what` on failure.
double parse_number(const std::string& text, const char* what);

}  // namespace trendlab
