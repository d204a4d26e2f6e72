#include "trendlab/numeric_format.hpp"

#include "trendlab/errors.hpp"

#include <array>
#include <charconv>
#include <cmath>

#include <fmt/format.h>

namespace trendlab {

std::string format_number(double value) {
    if (value == 0.0) {
        return "0";  // folds -0
    }
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc{}) {
        throw InvariantError("to_chars failed");
    }
    return std::string(buf.data(), ptr);
}

double parse_number(const std::string& text, const char* what) {
    double value = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end || !std::isfinite(value)) {
        throw DataError(fmt::format("{}: cannot parse '{}' as a number", what, text));
    }
    return value;
}

}  // namespace trendlab
