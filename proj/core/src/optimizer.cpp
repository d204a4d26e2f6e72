#include "trendlab/optimizer.hpp"

#include "csv.hpp"
#include "trendlab/errors.hpp"
#include "trendlab/numeric_format.hpp"
#include "trendlab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include <fmt/format.h>

namespace trendlab {

namespace {

constexpr std::string_view kParamsHeader = "interval_start,interval_end,f_upper,f_lower,v_max,sharpe";

template <typename T>
std::vector<T> sorted_unique(std::vector<T> values) {
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    return values;
}

}  // namespace

void SharpeParams::validate() const {
    if (days_per_year <= 0) {
        throw ConfigError(fmt::format("days_per_year must be positive, got {}", days_per_year));
    }
}

double sharpe_ratio(std::span<const double> daily_returns, const SharpeParams& params) {
    params.validate();
    if (daily_returns.size() < 2) {
        throw DataError("Sharpe ratio needs at least 2 returns");
    }
    const double rf = params.daily_risk_free();
    const double first_excess = daily_returns.front() - rf;
    const bool constant = std::all_of(daily_returns.begin(), daily_returns.end(),
                                      [&](double r) { return r - rf == first_excess; });
    if (constant) {
        if (first_excess == 0.0) {
            return 0.0;
        }
        throw UndefinedSharpeError("Sharpe ratio undefined: returns have zero dispersion");
    }

    const auto n = static_cast<double>(daily_returns.size());
    double mean = 0.0;
    for (double r : daily_returns) mean += r - rf;
    mean /= n;
    double ss = 0.0;
    for (double r : daily_returns) {
        const double d = (r - rf) - mean;
        ss += d * d;
    }
    const double sd = std::sqrt(ss / (n - 1.0));
    if (!(sd > 0.0)) {
        throw UndefinedSharpeError("Sharpe ratio undefined: returns have zero dispersion");
    }
    return mean / sd * std::sqrt(static_cast<double>(params.days_per_year));
}

OptimizationGrid OptimizationGrid::defaults() {
    OptimizationGrid grid;
    for (int i = 0; i <= 10; ++i) {
        grid.f_upper.push_back(0.5 + 0.25 * i);
        grid.f_lower.push_back(0.5 + 0.25 * i);
    }
    for (int v = 8; v <= 15; ++v) {
        grid.v_max.push_back(v);
    }
    return grid;
}

void OptimizationGrid::validate() const {
    if (f_upper.empty() || f_lower.empty() || v_max.empty()) {
        throw ConfigError("optimization grid axes must be non-empty");
    }
    for (const auto& cfg : points()) {
        cfg.validate();
    }
}

std::vector<BarrierConfig> OptimizationGrid::points() const {
    std::vector<BarrierConfig> out;
    for (double fu : sorted_unique(f_upper)) {
        for (double fl : sorted_unique(f_lower)) {
            for (int v : sorted_unique(v_max)) {
                out.push_back(BarrierConfig{fu, fl, v, min_trend_days});
            }
        }
    }
    return out;
}

ReturnSeries label_strategy_returns(const LabelSeries& windows, const PriceSeries& prices) {
    ReturnSeries out;
    for (const auto& w : windows.windows()) {
        const double sign = w.label == TrendLabel::bullish   ? 1.0
                            : w.label == TrendLabel::bearish ? -1.0
                                                             : 0.0;
        for (Day d = w.start_day + 1; d <= w.end_day; d = d + 1) {
            const double prev = prices.at(d - 1).close;
            const double simple = prices.at(d).close / prev - 1.0;
            out.days.push_back(d);
            out.values.push_back(sign == 0.0 ? 0.0 : sign * simple);
        }
    }
    return out;
}

std::vector<DayRange> full_intervals(const PriceSeries& prices, const VolatilitySeries& vols,
                                     int interval_months) {
    std::vector<DayRange> out;
    const auto first_defined = vols.first_defined_day();
    if (prices.empty() || !first_defined) {
        return out;
    }
    const Day start = std::max(*first_defined, prices.first_day());
    for (DayRange block = calendar_block(start, interval_months); block.last <= prices.last_day();
         block = calendar_block(block.last + 1, interval_months)) {
        if (block.first >= start) {
            out.push_back(block);
        }
    }
    return out;
}

std::optional<double> evaluate_grid_point(const PriceSeries& prices, const VolatilitySeries& vols,
                                          DayRange interval, const BarrierConfig& config,
                                          const SharpeParams& sharpe) {
    const PriceSeries window = prices.slice(interval.first, interval.last);
    try {
        const LabelSeries labels = label_series(window, vols, config);
        if (labels.empty()) {
            return std::nullopt;
        }
        const ReturnSeries returns = label_strategy_returns(labels, window);
        if (returns.size() < 2) {
            return std::nullopt;
        }
        return sharpe_ratio(returns.values, sharpe);
    } catch (const DegenerateBarrierError&) {
        return std::nullopt;
    } catch (const UndefinedSharpeError&) {
        return std::nullopt;
    }
}

std::vector<PeriodParams> optimize_barriers(const PriceSeries& prices, const VolatilitySeries& vols,
                                            const OptimizationGrid& grid,
                                            const OptimizeOptions& options) {
    grid.validate();
    options.sharpe.validate();
    const auto intervals = full_intervals(prices, vols, options.interval_months);
    if (intervals.empty()) {
        throw DataError(fmt::format("no full {}-month interval of post-warmup data",
                                    options.interval_months));
    }
    const auto points = grid.points();
    std::vector<std::optional<double>> scores(intervals.size() * points.size());
    parallel_for(scores.size(), options.threads, [&](std::size_t job) {
        const std::size_t k = job / points.size();
        const std::size_t p = job % points.size();
        scores[job] = evaluate_grid_point(prices, vols, intervals[k], points[p], options.sharpe);
    });

    std::vector<PeriodParams> out;
    out.reserve(intervals.size());
    for (std::size_t k = 0; k < intervals.size(); ++k) {
        std::optional<std::size_t> best;
        for (std::size_t p = 0; p < points.size(); ++p) {
            const auto& s = scores[k * points.size() + p];
            if (s && (!best || *s > *scores[k * points.size() + *best])) {
                best = p;
            }
        }
        if (!best) {
            throw OptimizationError(fmt::format("no admissible grid point on interval {}..{}",
                                                intervals[k].first.iso(), intervals[k].last.iso()));
        }
        out.push_back(PeriodParams{intervals[k], points[*best],
                                   *scores[k * points.size() + *best]});
    }
    return out;
}

BarrierSchedule::BarrierSchedule(std::vector<PeriodParams> periods) : periods_(std::move(periods)) {
    for (std::size_t i = 1; i < periods_.size(); ++i) {
        if (!(periods_[i - 1].interval.last < periods_[i].interval.first)) {
            throw DataError("parameter journal intervals must be increasing and disjoint");
        }
    }
}

std::optional<BarrierConfig> BarrierSchedule::config_for(Day d) const {
    auto it = std::lower_bound(periods_.begin(), periods_.end(), d,
                               [](const PeriodParams& p, Day day) { return p.interval.last < day; });
    if (it == periods_.begin()) {
        return std::nullopt;
    }
    return (it - 1)->config;
}

BarrierProvider BarrierSchedule::provider() const {
    return [schedule = *this](Day d) { return schedule.config_for(d); };
}

void write_params_csv(std::ostream& out, std::span<const PeriodParams> periods) {
    out << kParamsHeader << '\n';
    for (const auto& p : periods) {
        out << p.interval.first.iso() << ',' << p.interval.last.iso() << ','
            << format_number(p.config.f_upper) << ',' << format_number(p.config.f_lower) << ','
            << p.config.v_max << ',' << format_number(p.sharpe) << '\n';
    }
}

std::vector<PeriodParams> read_params_csv(std::istream& in, int min_trend_days) {
    detail::expect_header(in, kParamsHeader, "params");
    std::vector<PeriodParams> out;
    std::string line;
    std::size_t line_no = 1;
    while (detail::read_line(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = detail::split_csv_line(line);
        try {
            if (f.size() != 6) {
                throw DataError(fmt::format("expected 6 fields, got {}", f.size()));
            }
            PeriodParams p;
            p.interval = {Day::parse(f[0]), Day::parse(f[1])};
            p.config.f_upper = parse_number(f[2], "f_upper");
            p.config.f_lower = parse_number(f[3], "f_lower");
            p.config.v_max = static_cast<int>(parse_number(f[4], "v_max"));
            p.config.min_trend_days = min_trend_days;
            p.sharpe = parse_number(f[5], "sharpe");
            out.push_back(p);
        } catch (const DataError& e) {
            throw DataError(fmt::format("params: line {}: {}", line_no, e.what()));
        }
    }
    return out;
}

}  // namespace trendlab
