#pragma once

#include "trendlab/calendar.hpp"
#include "trendlab/labeling.hpp"
#include "trendlab/market_data.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace trendlab {

struct SharpeParams {
    double risk_free_annual = 0.04;
    int days_per_year = 365;

    double daily_risk_free() const { return risk_free_annual / days_per_year; }
    void validate() const;
};

/// Annualized Sharpe ratio of daily returns: mean excess over the sample (n-1) standard
/// deviation, scaled by sqrt(days_per_year). A series with no excess at all scores 0;
/// any other zero-dispersion series throws UndefinedSharpeError.
double sharpe_ratio(std::span<const double> daily_returns, const SharpeParams& params);

struct OptimizationGrid {
    std::vector<double> f_upper;
    std::vector<double> f_lower;
    std::vector<int> v_max;
    int min_trend_days = 2;

    /// F in {0.5, 0.75, ..., 3.0}, v_max in {8, ..., 15}.
    static OptimizationGrid defaults();

    void validate() const;
    std::size_t size() const { return f_upper.size() * f_lower.size() * v_max.size(); }
    /// Grid points in lexicographic (f_upper, f_lower, v_max) order.
    std::vector<BarrierConfig> points() const;
};

struct PeriodParams {
    DayRange interval;
    BarrierConfig config;
    double sharpe = 0.0;
};

/// Daily simple returns of the label-following strategy: long through Bullish windows,
/// short through Bearish ones, flat otherwise. Entry at the window-start close; the return
/// dated d belongs to the window covering d-1.
ReturnSeries label_strategy_returns(const LabelSeries& windows, const PriceSeries& prices);

/// Calendar blocks fully covered by post-warmup data.
std::vector<DayRange> full_intervals(const PriceSeries& prices, const VolatilitySeries& vols,
                                     int interval_months);

/// Sharpe of one grid point on one interval, or nullopt when the point is inadmissible
/// (degenerate barriers, undefined Sharpe).
std::optional<double> evaluate_grid_point(const PriceSeries& prices,
                                          const VolatilitySeries& vols, DayRange interval,
                                          const BarrierConfig& config,
                                          const SharpeParams& sharpe);

struct OptimizeOptions {
    int interval_months = 6;
    SharpeParams sharpe;
    unsigned threads = 0;  // 0: hardware concurrency
};

/// Exhaustive per-interval grid search. Element k holds the argmax chosen on interval k;
/// it is meant to be applied to the following interval. Ties go to the earliest point in
/// lexicographic order.
std::vector<PeriodParams> optimize_barriers(const PriceSeries& prices,
                                            const VolatilitySeries& vols,
                                            const OptimizationGrid& grid,
                                            const OptimizeOptions& options = {});

/// Walk-forward application of a parameter journal: the config chosen on interval k is
/// in force from the day after interval k ends until the next interval's choice takes over.
class BarrierSchedule {
public:
    BarrierSchedule() = default;
    explicit BarrierSchedule(std::vector<PeriodParams> periods);

    std::optional<BarrierConfig> config_for(Day d) const;
    BarrierProvider provider() const;
    std::span<const PeriodParams> periods() const { return periods_; }
    bool empty() const { return periods_.empty(); }

private:
    std::vector<PeriodParams> periods_;
};

void write_params_csv(std::ostream& out, std::span<const PeriodParams> periods);
std::vector<PeriodParams> read_params_csv(std::istream& in, int min_trend_days = 2);

}  // namespace trendlab
