#include "trendlab/trend.hpp"

#include "trendlab/errors.hpp"

#include <algorithm>
#include <cctype>
#include <string>

#include <fmt/format.h>

namespace trendlab {

std::string_view to_string(TrendLabel label) {
    switch (label) {
        case TrendLabel::bearish:
            return "bearish";
        case TrendLabel::neutral:
            return "neutral";
        case TrendLabel::bullish:
            return "bullish";
    }
    throw InvariantError("unknown TrendLabel");
}

TrendLabel parse_trend_label(std::string_view text) {
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "bearish" || lower == "0") return TrendLabel::bearish;
    if (lower == "neutral" || lower == "1") return TrendLabel::neutral;
    if (lower == "bullish" || lower == "2") return TrendLabel::bullish;
    throw DataError(fmt::format("unknown trend label '{}'", text));
}

TrendLabel label_from_encoding(int code) {
    if (code < 0 || code > 2) {
        throw DataError(fmt::format("trend encoding out of range: {}", code));
    }
    return static_cast<TrendLabel>(code);
}

}  // namespace trendlab
