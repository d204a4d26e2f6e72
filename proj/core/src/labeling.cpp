#include "trendlab/labeling.hpp"

#include "csv.hpp"
#include "trendlab/errors.hpp"
#include "trendlab/numeric_format.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include <fmt/format.h>

namespace trendlab {

namespace {

constexpr std::string_view kWindowsHeader = "start,end,deadline,upper,lower,label,touch_day,truncated";
constexpr std::string_view kDailyHeader = "day,label";

}  // namespace

void BarrierConfig::validate() const {
    if (!(f_upper > 0.0) || !(f_lower > 0.0)) {
        throw ConfigError(
            fmt::format("barrier factors must be positive (f_upper={}, f_lower={})", f_upper, f_lower));
    }
    if (v_max < 8 || v_max > 15) {
        throw ConfigError(fmt::format("v_max must lie in [8, 15], got {}", v_max));
    }
    if (min_trend_days < 1 || min_trend_days > v_max) {
        throw ConfigError(
            fmt::format("min_trend_days must lie in [1, v_max], got {}", min_trend_days));
    }
}

Barriers compute_barriers(double entry_close, double sigma, const BarrierConfig& config) {
    if (!(entry_close > 0.0) || !(sigma >= 0.0)) {
        throw DataError(fmt::format("barriers need a positive close and sigma >= 0 (close={}, sigma={})",
                                    entry_close, sigma));
    }
    const Barriers b{entry_close * (1.0 + sigma * config.f_upper),
                     entry_close * (1.0 - sigma * config.f_lower)};
    if (!(b.lower < entry_close && entry_close < b.upper)) {
        throw DegenerateBarrierError(
            fmt::format("zero-width barrier corridor at close {} (sigma={})", entry_close, sigma));
    }
    if (!(b.lower > 0.0)) {
        throw DegenerateBarrierError(fmt::format(
            "lower barrier {} is not positive (sigma={}, f_lower={})", b.lower, sigma, config.f_lower));
    }
    return b;
}

BarrierTouch detect_touch(const Candle& candle, const Barriers& barriers) {
    const bool upper = candle.high >= barriers.upper;
    const bool lower = candle.low <= barriers.lower;
    if (upper && lower) {
        const double to_upper = std::abs(candle.open - barriers.upper);
        const double to_lower = std::abs(candle.open - barriers.lower);
        // symmetric factors with open == entry close tie exactly in real arithmetic; keep rounding out of it
        const double slack = 1e-9 * std::max(to_upper, to_lower);
        return to_upper < to_lower - slack ? BarrierTouch::upper : BarrierTouch::lower;
    }
    if (upper) return BarrierTouch::upper;
    if (lower) return BarrierTouch::lower;
    return BarrierTouch::none;
}

LabelSeries::LabelSeries(std::vector<BarrierWindow> windows) : windows_(std::move(windows)) {
    for (std::size_t i = 0; i < windows_.size(); ++i) {
        const auto& w = windows_[i];
        if (!(w.start_day < w.end_day && w.end_day <= w.deadline)) {
            throw DataError(fmt::format("window starting {} has inconsistent end/deadline",
                                        w.start_day.iso()));
        }
        if ((w.label == TrendLabel::neutral) != !w.touch_day.has_value()) {
            throw DataError(fmt::format("window starting {}: label/touch mismatch", w.start_day.iso()));
        }
        if (i > 0 && w.start_day != windows_[i - 1].end_day) {
            throw DataError(fmt::format("windows not contiguous at {}", w.start_day.iso()));
        }
    }
}

const BarrierWindow* LabelSeries::window_containing(Day d) const {
    auto it = std::upper_bound(windows_.begin(), windows_.end(), d,
                               [](Day day, const BarrierWindow& w) { return day < w.start_day; });
    if (it == windows_.begin()) {
        return nullptr;
    }
    --it;
    return it->covers(d) ? &*it : nullptr;
}

const BarrierWindow* LabelSeries::latest_closed_before(Day d) const {
    auto it = std::lower_bound(windows_.begin(), windows_.end(), d,
                               [](const BarrierWindow& w, Day day) { return w.end_day < day; });
    if (it == windows_.begin()) {
        return nullptr;
    }
    return &*(it - 1);
}

LabelSeries label_series(const PriceSeries& prices, const VolatilitySeries& vols,
                         const BarrierConfig& config) {
    config.validate();
    return label_series(prices, vols, BarrierProvider{[config](Day) { return std::optional{config}; }});
}

LabelSeries label_series(const PriceSeries& prices, const VolatilitySeries& vols,
                         const BarrierProvider& provider) {
    const std::size_t n = prices.size();
    std::size_t start = 0;
    while (start < n && (!vols.at(prices[start].day) || !provider(prices[start].day))) {
        ++start;
    }

    std::vector<BarrierWindow> windows;
    while (start + 1 < n) {
        const Candle& entry = prices[start];
        const auto config = provider(entry.day);
        const auto sigma = vols.at(entry.day);
        if (!config || !sigma) {
            throw DataError(fmt::format("no barrier config or volatility at window start {}",
                                        entry.day.iso()));
        }
        config->validate();
        const Barriers barriers = compute_barriers(entry.close, *sigma, *config);

        BarrierWindow w;
        w.start_day = entry.day;
        w.deadline = entry.day + config->v_max;
        w.upper = barriers.upper;
        w.lower = barriers.lower;

        const std::size_t deadline = start + static_cast<std::size_t>(config->v_max);
        const std::size_t earliest = start + static_cast<std::size_t>(config->min_trend_days);
        const std::size_t last = std::min(deadline, n - 1);
        std::size_t end = last;
        for (std::size_t j = earliest; j <= last; ++j) {
            const auto touch = detect_touch(prices[j], barriers);
            if (touch != BarrierTouch::none) {
                w.label = touch == BarrierTouch::upper ? TrendLabel::bullish : TrendLabel::bearish;
                w.touch_day = prices[j].day;
                end = j;
                break;
            }
        }
        w.end_day = prices[end].day;
        w.truncated = !w.touch_day && deadline > n - 1;
        windows.push_back(w);
        if (w.truncated) {
            break;
        }
        start = end;
    }
    return LabelSeries(std::move(windows));
}

DailyLabels::DailyLabels(Day first_day, std::vector<TrendLabel> labels)
    : first_day_(first_day), labels_(std::move(labels)) {}

std::optional<TrendLabel> DailyLabels::at(Day d) const {
    const auto offset = d - first_day_;
    if (offset < 0 || static_cast<std::size_t>(offset) >= labels_.size()) {
        return std::nullopt;
    }
    return labels_[static_cast<std::size_t>(offset)];
}

DailyLabels daily_labels(const LabelSeries& series) {
    if (series.empty()) {
        throw DataError("daily labels need at least one window");
    }
    const Day first = series.windows().front().start_day;
    std::vector<TrendLabel> labels;
    labels.reserve(static_cast<std::size_t>(series.windows().back().end_day - first));
    for (const auto& w : series.windows()) {
        labels.insert(labels.end(), static_cast<std::size_t>(w.end_day - w.start_day), w.label);
    }
    return DailyLabels(first, std::move(labels));
}

void write_windows_csv(std::ostream& out, const LabelSeries& series) {
    out << kWindowsHeader << '\n';
    for (const auto& w : series.windows()) {
        out << w.start_day.iso() << ',' << w.end_day.iso() << ',' << w.deadline.iso() << ','
            << format_number(w.upper) << ',' << format_number(w.lower) << ',' << to_string(w.label)
            << ',' << (w.touch_day ? w.touch_day->iso() : std::string{}) << ','
            << (w.truncated ? "true" : "false") << '\n';
    }
}

LabelSeries read_windows_csv(std::istream& in) {
    detail::expect_header(in, kWindowsHeader, "windows");
    std::vector<BarrierWindow> windows;
    std::string line;
    std::size_t line_no = 1;
    while (detail::read_line(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = detail::split_csv_line(line);
        try {
            if (f.size() != 8) {
                throw DataError(fmt::format("expected 8 fields, got {}", f.size()));
            }
            BarrierWindow w;
            w.start_day = Day::parse(f[0]);
            w.end_day = Day::parse(f[1]);
            w.deadline = Day::parse(f[2]);
            w.upper = parse_number(f[3], "upper");
            w.lower = parse_number(f[4], "lower");
            w.label = parse_trend_label(f[5]);
            if (!f[6].empty()) w.touch_day = Day::parse(f[6]);
            if (f[7] != "true" && f[7] != "false") {
                throw DataError(fmt::format("truncated must be true/false, got '{}'", f[7]));
            }
            w.truncated = f[7] == "true";
            windows.push_back(w);
        } catch (const DataError& e) {
            throw DataError(fmt::format("windows: line {}: {}", line_no, e.what()));
        }
    }
    return LabelSeries(std::move(windows));
}

void write_daily_labels_csv(std::ostream& out, const DailyLabels& labels) {
    out << kDailyHeader << '\n';
    for (std::size_t i = 0; i < labels.size(); ++i) {
        out << (labels.first_day() + static_cast<std::int32_t>(i)).iso() << ','
            << to_string(labels.labels()[i]) << '\n';
    }
}

DailyLabels read_daily_labels_csv(std::istream& in) {
    detail::expect_header(in, kDailyHeader, "daily labels");
    std::optional<Day> first;
    std::vector<TrendLabel> labels;
    std::string line;
    std::size_t line_no = 1;
    while (detail::read_line(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = detail::split_csv_line(line);
        try {
            if (f.size() != 2) {
                throw DataError(fmt::format("expected 2 fields, got {}", f.size()));
            }
            const Day d = Day::parse(f[0]);
            if (!first) first = d;
            if (d - *first != static_cast<std::int32_t>(labels.size())) {
                throw DataError(fmt::format("day {} breaks the dense calendar", d.iso()));
            }
            labels.push_back(parse_trend_label(f[1]));
        } catch (const DataError& e) {
            throw DataError(fmt::format("daily labels: line {}: {}", line_no, e.what()));
        }
    }
    if (!first) {
        throw DataError("daily labels: no rows");
    }
    return DailyLabels(*first, std::move(labels));
}

}  // namespace trendlab
