#pragma once

#include "trendlab/calendar.hpp"
#include "trendlab/market_data.hpp"
#include "trendlab/trend.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace trendlab {

struct BarrierConfig {
    double f_upper = 1.0;
    double f_lower = 1.0;
    int v_max = 8;
    int min_trend_days = 2;

    void validate() const;
    friend bool operator==(const BarrierConfig&, const BarrierConfig&) = default;
};

struct Barriers {
    double upper = 0.0;
    double lower = 0.0;
};

/// upper = P(1 + sigma*F_u), lower = P(1 - sigma*F_l). Throws DegenerateBarrierError when the
/// corridor has zero width or the lower barrier is not positive.
Barriers compute_barriers(double entry_close, double sigma, const BarrierConfig& config);

enum class BarrierTouch { none, upper, lower };

/// Touch test for one candle. When both barriers are hit, the one nearer the open wins;
/// a tie (within 1e-9 relative) goes to the lower barrier.
BarrierTouch detect_touch(const Candle& candle, const Barriers& barriers);

struct BarrierWindow {
    Day start_day;
    Day end_day;
    double upper = 0.0;
    double lower = 0.0;
    Day deadline;
    TrendLabel label = TrendLabel::neutral;
    std::optional<Day> touch_day;
    bool truncated = false;

    /// Half-open: [start_day, end_day).
    bool covers(Day d) const { return start_day <= d && d < end_day; }
    friend bool operator==(const BarrierWindow&, const BarrierWindow&) = default;
};

/// Contiguous windows; each starts on the previous window's end day.
class LabelSeries {
public:
    LabelSeries() = default;
    explicit LabelSeries(std::vector<BarrierWindow> windows);

    std::span<const BarrierWindow> windows() const { return windows_; }
    std::size_t size() const { return windows_.size(); }
    bool empty() const { return windows_.empty(); }
    const BarrierWindow& operator[](std::size_t i) const { return windows_[i]; }

    const BarrierWindow* window_containing(Day d) const;
    /// Most recent window whose end day is strictly before `d`.
    const BarrierWindow* latest_closed_before(Day d) const;

private:
    std::vector<BarrierWindow> windows_;
};

/// Per-day barrier configuration; nullopt means no labeling may start that day.
using BarrierProvider = std::function<std::optional<BarrierConfig>(Day)>;

LabelSeries label_series(const PriceSeries& prices, const VolatilitySeries& vols,
                         const BarrierConfig& config);
LabelSeries label_series(const PriceSeries& prices, const VolatilitySeries& vols,
                         const BarrierProvider& provider);

/// Dense day -> label mapping over [first window start, last window end).
class DailyLabels {
public:
    DailyLabels() = default;
    DailyLabels(Day first_day, std::vector<TrendLabel> labels);

    std::optional<TrendLabel> at(Day d) const;
    Day first_day() const { return first_day_; }
    Day last_day() const { return first_day_ + static_cast<std::int32_t>(labels_.size()) - 1; }
    std::size_t size() const { return labels_.size(); }
    bool empty() const { return labels_.empty(); }
    std::span<const TrendLabel> labels() const { return labels_; }

private:
    Day first_day_;
    std::vector<TrendLabel> labels_;
};

DailyLabels daily_labels(const LabelSeries& series);

void write_windows_csv(std::ostream& out, const LabelSeries& series);
LabelSeries read_windows_csv(std::istream& in);
void write_daily_labels_csv(std::ostream& out, const DailyLabels& labels);
DailyLabels read_daily_labels_csv(std::istream& in);

}  // namespace trendlab
