#pragma once

#include "trendlab/calendar.hpp"
#include "trendlab/trend.hpp"

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace trendlab {

struct Candle {
    Day day;
    double open = 0.0;
    double high = 0.0;
    double low = 0.0;
    double close = 0.0;
    double volume = 0.0;
};

/// Throws DataError when low > min(open, close), high < max(open, close) or volume < 0.
void validate_candle(const Candle& candle);

/// Dense daily OHLCV history: exactly one candle per calendar day, no gaps.
class PriceSeries {
public:
    PriceSeries() = default;
    explicit PriceSeries(std::vector<Candle> candles);

    std::size_t size() const { return candles_.size(); }
    bool empty() const { return candles_.empty(); }
    const Candle& operator[](std::size_t i) const { return candles_[i]; }
    std::span<const Candle> candles() const { return candles_; }

    Day first_day() const { return candles_.front().day; }
    Day last_day() const { return candles_.back().day; }
    DayRange range() const { return {first_day(), last_day()}; }
    bool contains(Day d) const { return !empty() && range().contains(d); }
    std::optional<std::size_t> index_of(Day d) const;
    const Candle& at(Day d) const;

    std::vector<double> closes() const;

    /// Candles within [first, last] clipped to the series range.
    PriceSeries slice(Day first, Day last) const;

private:
    std::vector<Candle> candles_;
};

enum class GapPolicy { reject, forward_fill };

/// Parses the `timestamp,open,high,low,close,volume` CSV contract. Errors name the line.
PriceSeries parse_ohlcv(std::istream& in, GapPolicy gaps = GapPolicy::reject);
PriceSeries load_ohlcv(const std::filesystem::path& path, GapPolicy gaps = GapPolicy::reject);
void write_ohlcv(std::ostream& out, const PriceSeries& prices);

/// Log returns aligned to the later day of each close pair.
struct ReturnSeries {
    std::vector<Day> days;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    bool empty() const { return values.empty(); }
    /// Returns dated on or before `last`.
    ReturnSeries up_to(Day last) const;
};

ReturnSeries log_returns(const PriceSeries& prices);

struct EwmaParams {
    int tau = 30;
    /// Number of most recent squared returns in the weighted sum. 0 sums all history.
    int terms = 30;

    double alpha() const { return 2.0 / (static_cast<double>(tau) + 1.0); }
    void validate() const;
};

/// EWMA volatility on the price calendar: entry t covers the close of day t and uses
/// the returns observed up to that close. The first `warmup` days are undefined.
class VolatilitySeries {
public:
    VolatilitySeries() = default;
    VolatilitySeries(Day first_day, std::vector<std::optional<double>> values, std::size_t warmup);

    std::optional<double> at(Day d) const;
    Day first_day() const { return first_day_; }
    std::size_t size() const { return values_.size(); }
    std::size_t warmup() const { return warmup_; }
    std::optional<Day> first_defined_day() const;
    std::span<const std::optional<double>> values() const { return values_; }

private:
    Day first_day_;
    std::vector<std::optional<double>> values_;
    std::size_t warmup_ = 0;
};

VolatilitySeries ewma_volatility(const ReturnSeries& returns, const EwmaParams& params);

enum class IndicatorKind { rsi, roc };

struct IndicatorSeries {
    IndicatorKind kind = IndicatorKind::rsi;
    int period = 0;
    std::vector<Day> days;
    std::vector<double> values;

    std::optional<double> at(Day d) const;
};

/// Wilder-smoothed RSI, values in [0, 100].
IndicatorSeries rsi(const PriceSeries& prices, int period = 14);

/// Rate of change (P_t - P_{t-period}) / P_{t-period}.
IndicatorSeries roc(const PriceSeries& prices, int period = 8);

struct IndicatorThresholds {
    double lower = 0.0;
    double upper = 0.0;
};

inline constexpr IndicatorThresholds kRsiThresholds{30.0, 70.0};

/// (-k*s, +k*s) with s the sample standard deviation of the rolling `period`-day
/// compounded returns inside the last `window` log returns.
IndicatorThresholds roc_thresholds(const ReturnSeries& returns, int window, double k = 1.0,
                                   int period = 8);

/// RSI reads as a reversal signal (overbought is bearish); ROC reads as momentum.
TrendTerm discretize_indicator(double value, IndicatorKind kind,
                               const IndicatorThresholds& thresholds);

}  // namespace trendlab
