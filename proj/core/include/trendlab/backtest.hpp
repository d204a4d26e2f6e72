#pragma once

#include "trendlab/calendar.hpp"
#include "trendlab/labeling.hpp"
#include "trendlab/market_data.hpp"
#include "trendlab/optimizer.hpp"
#include "trendlab/signals.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace trendlab {

enum class StrategyKind { tbl, in_out_long, in_out_short, buy_hold, sell_hold };

std::string_view to_string(StrategyKind kind);
StrategyKind parse_strategy_kind(std::string_view text);

enum class Side { long_side, short_side };

std::string_view to_string(Side side);

enum class ExitReason { take_profit, stop_loss, time_limit, opposite_signal, end_of_data };

std::string_view to_string(ExitReason reason);

struct StrategyConfig {
    StrategyKind kind = StrategyKind::in_out_long;
    std::optional<BarrierConfig> barriers;
    double base_fraction = 1.0;
    double fee_rate = 0.0;  // per side
    bool confidence_sizing = true;

    void validate() const;
};

struct Trade {
    Side side = Side::long_side;
    Day entry_day;
    double entry_price = 0.0;
    Day exit_day;
    double exit_price = 0.0;
    double size = 1.0;
    ExitReason reason = ExitReason::end_of_data;
    double pnl = 0.0;  // fraction of equity at entry

    int duration_days() const { return exit_day - entry_day; }
};

using TradeLog = std::vector<Trade>;

struct EquityCurve {
    std::vector<Day> days;
    std::vector<double> equity;
};

struct BacktestResult {
    TradeLog trades;
    EquityCurve equity;
    std::vector<std::string> warnings;
};

/// Enter on the opening signal class, leave on the opposite one. A signal dated d acts at
/// the close of d+1 when that day is in `prices`.
BacktestResult run_in_out(const SignalSeries& signals, const PriceSeries& prices,
                          const StrategyConfig& config);

/// Directional signals open trades with take-profit / stop-loss at the volatility barriers
/// and a v_max-day time limit. With `schedule`, the barrier config in force on the entry day
/// replaces config.barriers.
BacktestResult run_tbl(const SignalSeries& signals, const PriceSeries& prices,
                       const VolatilitySeries& vols, const StrategyConfig& config,
                       const BarrierProvider* schedule = nullptr);

BacktestResult run_hold(const PriceSeries& prices, Side side);

std::vector<double> daily_returns(const EquityCurve& curve);

struct PerformanceReport {
    double daily_return_pct = 0.0;
    double cumulative_return_pct = 0.0;
    std::optional<double> sharpe;
    std::optional<double> sortino;
    std::size_t closed_trades = 0;
    double max_drawdown_pct = 0.0;
    std::optional<double> profit_factor;
    bool profit_factor_infinite = false;
    std::optional<double> win_rate_pct;
    std::optional<double> avg_win_duration_days;
    std::optional<double> avg_loss_duration_days;
};

double max_drawdown_pct(std::span<const double> equity);

PerformanceReport performance(std::span<const Trade> trades, const EquityCurve& equity,
                              const SharpeParams& params);

void write_trades_csv(std::ostream& out, std::span<const Trade> trades);
void write_equity_csv(std::ostream& out, const EquityCurve& curve);
std::string report_to_json(const PerformanceReport& report);

}  // namespace trendlab
