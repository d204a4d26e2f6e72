#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace trendlab {

/// Market-derived trend class. The underlying value is the canonical encoding
/// used by mean aggregation (bearish 0, neutral 1, bullish 2).
enum class TrendLabel : std::uint8_t { bearish = 0, neutral = 1, bullish = 2 };

/// Descriptive indicator terms share the label vocabulary.
using TrendTerm = TrendLabel;

inline constexpr std::array<TrendLabel, 3> kAllLabels{TrendLabel::bearish, TrendLabel::neutral,
                                                      TrendLabel::bullish};

constexpr int encoding(TrendLabel label) { return static_cast<int>(label); }
constexpr std::size_t index_of(TrendLabel label) { return static_cast<std::size_t>(label); }

/// Lowercase name: "bearish", "neutral", "bullish".
std::string_view to_string(TrendLabel label);

/// Accepts the lowercase names (any case) or the digits 0/1/2. Throws DataError.
TrendLabel parse_trend_label(std::string_view text);

TrendLabel label_from_encoding(int code);

}  // namespace trendlab
