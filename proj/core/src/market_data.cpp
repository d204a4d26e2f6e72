#include "trendlab/market_data.hpp"

#include "csv.hpp"
#include "trendlab/errors.hpp"
#include "trendlab/numeric_format.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include <fmt/format.h>

namespace trendlab {

namespace {

constexpr std::string_view kOhlcvHeader = "timestamp,open,high,low,close,volume";

std::string describe(const Candle& c) {
    return fmt::format("{} (open {}, high {}, low {}, close {})", c.day.iso(), c.open, c.high,
                       c.low, c.close);
}

}  // namespace

void validate_candle(const Candle& c) {
    if (!(c.low <= std::min(c.open, c.close)) || !(c.high >= std::max(c.open, c.close)) ||
        !(c.low <= c.high)) {
        throw DataError("OHLC inconsistency on " + describe(c));
    }
    if (!(c.volume >= 0.0)) {
        throw DataError(fmt::format("negative volume on {}", c.day.iso()));
    }
}

PriceSeries::PriceSeries(std::vector<Candle> candles) : candles_(std::move(candles)) {
    for (std::size_t i = 0; i < candles_.size(); ++i) {
        validate_candle(candles_[i]);
        if (i > 0 && candles_[i].day - candles_[i - 1].day != 1) {
            throw DataError(fmt::format("price series not dense: {} follows {}",
                                        candles_[i].day.iso(), candles_[i - 1].day.iso()));
        }
    }
}

std::optional<std::size_t> PriceSeries::index_of(Day d) const {
    if (!contains(d)) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(d - first_day());
}

const Candle& PriceSeries::at(Day d) const {
    const auto i = index_of(d);
    if (!i) {
        throw DataError(fmt::format("no candle for {}", d.iso()));
    }
    return candles_[*i];
}

std::vector<double> PriceSeries::closes() const {
    std::vector<double> out;
    out.reserve(candles_.size());
    for (const auto& c : candles_) {
        out.push_back(c.close);
    }
    return out;
}

PriceSeries PriceSeries::slice(Day first, Day last) const {
    std::vector<Candle> out;
    for (const auto& c : candles_) {
        if (c.day >= first && c.day <= last) {
            out.push_back(c);
        }
    }
    return PriceSeries(std::move(out));
}

PriceSeries parse_ohlcv(std::istream& in, GapPolicy gaps) {
    detail::expect_header(in, kOhlcvHeader, "ohlcv");
    std::vector<Candle> candles;
    std::string line;
    std::size_t line_no = 1;
    while (detail::read_line(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != 6) {
            throw DataError(fmt::format("ohlcv: line {}: expected 6 fields, got {}", line_no,
                                        fields.size()));
        }
        Candle c;
        try {
            c.day = Day::parse(fields[0]);
            c.open = parse_number(fields[1], "open");
            c.high = parse_number(fields[2], "high");
            c.low = parse_number(fields[3], "low");
            c.close = parse_number(fields[4], "close");
            c.volume = parse_number(fields[5], "volume");
            validate_candle(c);
        } catch (const DataError& e) {
            throw DataError(fmt::format("ohlcv: line {}: {}", line_no, e.what()));
        }
        if (!candles.empty()) {
            const Candle& prev = candles.back();
            if (c.day == prev.day) {
                throw DataError(
                    fmt::format("ohlcv: line {}: duplicate day {}", line_no, c.day.iso()));
            }
            if (c.day < prev.day) {
                throw DataError(fmt::format("ohlcv: line {}: non-monotonic timestamp {} after {}",
                                            line_no, c.day.iso(), prev.day.iso()));
            }
            if (c.day - prev.day > 1) {
                if (gaps == GapPolicy::reject) {
                    throw DataError(fmt::format("ohlcv: line {}: missing days between {} and {}",
                                                line_no, prev.day.iso(), c.day.iso()));
                }
                const double fill = prev.close;
                for (Day d = prev.day + 1; d < c.day; d = d + 1) {
                    candles.push_back(Candle{d, fill, fill, fill, fill, 0.0});
                }
            }
        }
        candles.push_back(c);
    }
    if (candles.empty()) {
        throw DataError("ohlcv: no rows");
    }
    return PriceSeries(std::move(candles));
}

PriceSeries load_ohlcv(const std::filesystem::path& path, GapPolicy gaps) {
    std::ifstream in(path);
    if (!in) {
        throw DataError(fmt::format("cannot open '{}'", path.string()));
    }
    try {
        return parse_ohlcv(in, gaps);
    } catch (const DataError& e) {
        throw DataError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

void write_ohlcv(std::ostream& out, const PriceSeries& prices) {
    out << kOhlcvHeader << '\n';
    for (const auto& c : prices.candles()) {
        out << c.day.iso() << ',' << format_number(c.open) << ',' << format_number(c.high) << ','
            << format_number(c.low) << ',' << format_number(c.close) << ','
            << format_number(c.volume) << '\n';
    }
}

ReturnSeries ReturnSeries::up_to(Day last) const {
    ReturnSeries out;
    for (std::size_t i = 0; i < days.size() && days[i] <= last; ++i) {
        out.days.push_back(days[i]);
        out.values.push_back(values[i]);
    }
    return out;
}

ReturnSeries log_returns(const PriceSeries& prices) {
    if (prices.size() < 2) {
        throw DataError("log returns need at least 2 closes");
    }
    ReturnSeries out;
    out.days.reserve(prices.size() - 1);
    out.values.reserve(prices.size() - 1);
    for (std::size_t i = 0; i < prices.size(); ++i) {
        if (!(prices[i].close > 0.0)) {
            throw DataError(fmt::format("non-positive close on {}", prices[i].day.iso()));
        }
        if (i > 0) {
            out.days.push_back(prices[i].day);
            out.values.push_back(std::log(prices[i].close / prices[i - 1].close));
        }
    }
    return out;
}

void EwmaParams::validate() const {
    if (tau < 1) {
        throw ConfigError(fmt::format("ewma tau must be positive, got {}", tau));
    }
    if (terms < 0) {
        throw ConfigError(fmt::format("ewma terms must be >= 0, got {}", terms));
    }
}

VolatilitySeries::VolatilitySeries(Day first_day, std::vector<std::optional<double>> values,
                                   std::size_t warmup)
    : first_day_(first_day), values_(std::move(values)), warmup_(warmup) {}

std::optional<double> VolatilitySeries::at(Day d) const {
    const auto offset = d - first_day_;
    if (offset < 0 || static_cast<std::size_t>(offset) >= values_.size()) {
        return std::nullopt;
    }
    return values_[static_cast<std::size_t>(offset)];
}

std::optional<Day> VolatilitySeries::first_defined_day() const {
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (values_[i]) {
            return first_day_ + static_cast<std::int32_t>(i);
        }
    }
    return std::nullopt;
}

VolatilitySeries ewma_volatility(const ReturnSeries& returns, const EwmaParams& params) {
    params.validate();
    const auto tau = static_cast<std::size_t>(params.tau);
    if (returns.size() < tau) {
        throw DataError(fmt::format("ewma volatility needs at least tau={} returns, got {}", tau,
                                    returns.size()));
    }
    for (std::size_t i = 1; i < returns.days.size(); ++i) {
        if (returns.days[i] - returns.days[i - 1] != 1) {
            throw DataError("return series is not on a dense calendar");
        }
    }

    const double alpha = params.alpha();
    const double decay = 1.0 - alpha;
    const double norm = alpha / (1.0 - std::pow(decay, params.tau));

    // Entry t sits on the close of price day t; returns[0..t) are known by then.
    std::vector<std::optional<double>> values(returns.size() + 1);
    for (std::size_t t = tau; t < values.size(); ++t) {
        const std::size_t terms =
            params.terms == 0 ? t : std::min(t, static_cast<std::size_t>(params.terms));
        double weighted = 0.0;
        double weight = 1.0;
        for (std::size_t i = 0; i < terms; ++i) {
            const double r = returns.values[t - 1 - i];
            weighted += weight * r * r;
            weight *= decay;
        }
        values[t] = std::sqrt(norm * weighted);
    }
    return VolatilitySeries(returns.days.front() - 1, std::move(values), tau);
}

std::optional<double> IndicatorSeries::at(Day d) const {
    if (days.empty()) {
        return std::nullopt;
    }
    const auto offset = d - days.front();
    if (offset < 0 || static_cast<std::size_t>(offset) >= values.size()) {
        return std::nullopt;
    }
    return values[static_cast<std::size_t>(offset)];
}

IndicatorSeries rsi(const PriceSeries& prices, int period) {
    if (period < 1) {
        throw ConfigError(fmt::format("RSI period must be positive, got {}", period));
    }
    const auto p = static_cast<std::size_t>(period);
    if (prices.size() < p + 1) {
        throw DataError(fmt::format("RSI({}) needs {} closes, got {}", period, p + 1,
                                    prices.size()));
    }
    auto value_of = [](double gain, double loss) {
        if (loss == 0.0) {
            return gain == 0.0 ? 50.0 : 100.0;
        }
        return std::clamp(100.0 - 100.0 / (1.0 + gain / loss), 0.0, 100.0);
    };

    IndicatorSeries out{IndicatorKind::rsi, period, {}, {}};
    double gain = 0.0;
    double loss = 0.0;
    for (std::size_t i = 1; i <= p; ++i) {
        const double change = prices[i].close - prices[i - 1].close;
        gain += std::max(change, 0.0);
        loss += std::max(-change, 0.0);
    }
    gain /= period;
    loss /= period;
    out.days.push_back(prices[p].day);
    out.values.push_back(value_of(gain, loss));
    for (std::size_t i = p + 1; i < prices.size(); ++i) {
        const double change = prices[i].close - prices[i - 1].close;
        gain = (gain * (period - 1) + std::max(change, 0.0)) / period;
        loss = (loss * (period - 1) + std::max(-change, 0.0)) / period;
        out.days.push_back(prices[i].day);
        out.values.push_back(value_of(gain, loss));
    }
    return out;
}

IndicatorSeries roc(const PriceSeries& prices, int period) {
    if (period < 1) {
        throw ConfigError(fmt::format("ROC period must be positive, got {}", period));
    }
    const auto p = static_cast<std::size_t>(period);
    if (prices.size() < p + 1) {
        throw DataError(fmt::format("ROC({}) needs {} closes, got {}", period, p + 1,
                                    prices.size()));
    }
    IndicatorSeries out{IndicatorKind::roc, period, {}, {}};
    for (std::size_t i = p; i < prices.size(); ++i) {
        const double base = prices[i - p].close;
        out.days.push_back(prices[i].day);
        out.values.push_back((prices[i].close - base) / base);
    }
    return out;
}

IndicatorThresholds roc_thresholds(const ReturnSeries& returns, int window, double k, int period) {
    if (period < 1 || !(k > 0.0)) {
        throw ConfigError(fmt::format("ROC thresholds need period >= 1 and k > 0 (got {}, {})",
                                      period, k));
    }
    if (window < period + 1) {
        throw ConfigError(
            fmt::format("ROC threshold window {} must exceed the period {}", window, period));
    }
    const auto w = static_cast<std::size_t>(window);
    const auto p = static_cast<std::size_t>(period);
    if (returns.size() < w) {
        throw DataError(fmt::format("ROC thresholds need {} returns, got {}", w, returns.size()));
    }

    const std::size_t begin = returns.size() - w;
    // Welford over the rolling compounded returns.
    double mean = 0.0;
    double m2 = 0.0;
    std::size_t n = 0;
    for (std::size_t j = begin + p - 1; j < returns.size(); ++j) {
        double log_sum = 0.0;
        for (std::size_t i = j + 1 - p; i <= j; ++i) {
            log_sum += returns.values[i];
        }
        const double compounded = std::expm1(log_sum);
        ++n;
        const double delta = compounded - mean;
        mean += delta / static_cast<double>(n);
        m2 += delta * (compounded - mean);
    }
    const double s = std::sqrt(m2 / static_cast<double>(n - 1));
    if (!(s > 0.0)) {
        throw DataError("ROC thresholds degenerate: zero dispersion of rolling returns");
    }
    return {-k * s, k * s};
}

TrendTerm discretize_indicator(double value, IndicatorKind kind,
                               const IndicatorThresholds& thresholds) {
    if (!(thresholds.lower < thresholds.upper)) {
        throw ConfigError(fmt::format("indicator thresholds need lower < upper (got {}, {})",
                                      thresholds.lower, thresholds.upper));
    }
    if (kind == IndicatorKind::rsi) {
        if (!(value >= 0.0 && value <= 100.0)) {
            throw DataError(fmt::format("RSI value {} outside [0, 100]", value));
        }
        if (value > thresholds.upper) return TrendLabel::bearish;
        if (value < thresholds.lower) return TrendLabel::bullish;
        return TrendLabel::neutral;
    }
    if (value > thresholds.upper) return TrendLabel::bullish;
    if (value < thresholds.lower) return TrendLabel::bearish;
    return TrendLabel::neutral;
}

}  // namespace trendlab
