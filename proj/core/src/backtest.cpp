#include "trendlab/backtest.hpp"

#include "trendlab/errors.hpp"
#include "trendlab/numeric_format.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>
#include <json.hpp>

namespace trendlab {

namespace {

struct Position {
    Side side = Side::long_side;
    std::size_t entry_index = 0;
    double entry_price = 0.0;
    double size = 0.0;
    double equity_at_entry = 1.0;
    // TBL only
    Barriers barriers;
    std::size_t deadline_index = 0;
    std::size_t earliest_touch_index = 0;

    double sign() const { return side == Side::long_side ? 1.0 : -1.0; }

    double pnl_at(double price, double fee_rate) const {
        return size * sign() * (price - entry_price) / entry_price -
               fee_rate * size * (1.0 + price / entry_price);
    }

    double mark(double price, double fee_rate) const {
        return equity_at_entry *
               (1.0 - fee_rate * size + size * sign() * (price - entry_price) / entry_price);
    }
};

class Ledger {
public:
    Ledger(const PriceSeries& prices, double fee_rate) : prices_(prices), fee_rate_(fee_rate) {
        result_.equity.days.reserve(prices.size());
        result_.equity.equity.reserve(prices.size());
    }

    bool flat() const { return !position_.has_value(); }
    const Position& position() const { return *position_; }

    void open(Position p) {
        p.equity_at_entry = equity_;
        position_ = p;
    }

    void close(std::size_t index, double price, ExitReason reason) {
        const Position& p = *position_;
        Trade t;
        t.side = p.side;
        t.entry_day = prices_[p.entry_index].day;
        t.entry_price = p.entry_price;
        t.exit_day = prices_[index].day;
        t.exit_price = price;
        t.size = p.size;
        t.reason = reason;
        t.pnl = p.pnl_at(price, fee_rate_);
        equity_ = p.equity_at_entry * (1.0 + t.pnl);
        result_.trades.push_back(t);
        position_.reset();
    }

    void mark_close(std::size_t index) {
        const double value = position_ ? position_->mark(prices_[index].close, fee_rate_) : equity_;
        if (!(value > 0.0)) {
            throw DataError(fmt::format("equity exhausted on {}", prices_[index].day.iso()));
        }
        result_.equity.days.push_back(prices_[index].day);
        result_.equity.equity.push_back(value);
    }

    /// Force-closes at the last close and rewrites that day's equity.
    void finish() {
        if (position_) {
            const std::size_t last = prices_.size() - 1;
            close(last, prices_[last].close, ExitReason::end_of_data);
            result_.equity.equity.back() = equity_;
        }
    }

    void warn(std::string message) { result_.warnings.push_back(std::move(message)); }
    BacktestResult take() { return std::move(result_); }

private:
    const PriceSeries& prices_;
    double fee_rate_;
    double equity_ = 1.0;
    std::optional<Position> position_;
    BacktestResult result_;
};

void check_calendar(const SignalSeries& signals, const PriceSeries& prices) {
    if (prices.size() < 2) {
        throw DataError("backtest needs at least 2 price days");
    }
    if (signals.empty() || signals.last_day() + 1 < prices.first_day() ||
        signals.first_day() + 1 > prices.last_day()) {
        throw DataError("calendar mismatch: no signal day acts inside the price range");
    }
}

double position_size(const StrategyConfig& config, const DailyAggregate& signal) {
    return config.base_fraction * (config.confidence_sizing ? signal.confidence : 1.0);
}

}  // namespace

std::string_view to_string(StrategyKind kind) {
    switch (kind) {
        case StrategyKind::tbl:
            return "tbl";
        case StrategyKind::in_out_long:
            return "in_out_long";
        case StrategyKind::in_out_short:
            return "in_out_short";
        case StrategyKind::buy_hold:
            return "buy_hold";
        case StrategyKind::sell_hold:
            return "sell_hold";
    }
    throw InvariantError("unknown StrategyKind");
}

StrategyKind parse_strategy_kind(std::string_view text) {
    for (auto kind : {StrategyKind::tbl, StrategyKind::in_out_long, StrategyKind::in_out_short,
                      StrategyKind::buy_hold, StrategyKind::sell_hold}) {
        if (text == to_string(kind)) return kind;
    }
    throw ConfigError(fmt::format(
        "unknown strategy '{}' (tbl|in_out_long|in_out_short|buy_hold|sell_hold)", text));
}

std::string_view to_string(Side side) { return side == Side::long_side ? "long" : "short"; }

std::string_view to_string(ExitReason reason) {
    switch (reason) {
        case ExitReason::take_profit:
            return "take_profit";
        case ExitReason::stop_loss:
            return "stop_loss";
        case ExitReason::time_limit:
            return "time_limit";
        case ExitReason::opposite_signal:
            return "opposite_signal";
        case ExitReason::end_of_data:
            return "end_of_data";
    }
    throw InvariantError("unknown ExitReason");
}

void StrategyConfig::validate() const {
    if (!(base_fraction > 0.0 && base_fraction <= 1.0)) {
        throw ConfigError(fmt::format("base position fraction must lie in (0, 1], got {}", base_fraction));
    }
    if (!(fee_rate >= 0.0)) {
        throw ConfigError(fmt::format("fee rate must be >= 0, got {}", fee_rate));
    }
    if (kind == StrategyKind::tbl && barriers) {
        barriers->validate();
    }
}

BacktestResult run_in_out(const SignalSeries& signals, const PriceSeries& prices,
                          const StrategyConfig& config) {
    config.validate();
    if (config.kind != StrategyKind::in_out_long && config.kind != StrategyKind::in_out_short) {
        throw ConfigError("run_in_out needs an In-Out strategy kind");
    }
    check_calendar(signals, prices);
    const bool long_only = config.kind == StrategyKind::in_out_long;
    const TrendLabel enter_on = long_only ? TrendLabel::bullish : TrendLabel::bearish;
    const TrendLabel exit_on = long_only ? TrendLabel::bearish : TrendLabel::bullish;

    Ledger ledger(prices, config.fee_rate);
    for (std::size_t i = 0; i < prices.size(); ++i) {
        const DailyAggregate* signal = signals.at(prices[i].day - 1);
        if (signal != nullptr) {
            if (!ledger.flat() && signal->signal == exit_on) {
                ledger.close(i, prices[i].close, ExitReason::opposite_signal);
            } else if (ledger.flat() && signal->signal == enter_on && i + 1 < prices.size()) {
                const double size = position_size(config, *signal);
                if (size > 0.0) {
                    Position p;
                    p.side = long_only ? Side::long_side : Side::short_side;
                    p.entry_index = i;
                    p.entry_price = prices[i].close;
                    p.size = size;
                    ledger.open(p);
                }
            }
        }
        ledger.mark_close(i);
    }
    ledger.finish();
    return ledger.take();
}

BacktestResult run_tbl(const SignalSeries& signals, const PriceSeries& prices,
                       const VolatilitySeries& vols, const StrategyConfig& config,
                       const BarrierProvider* schedule) {
    config.validate();
    if (config.kind != StrategyKind::tbl) {
        throw ConfigError("run_tbl needs the tbl strategy kind");
    }
    if (!config.barriers && schedule == nullptr) {
        throw ConfigError("TBL strategy requires a barrier config");
    }
    check_calendar(signals, prices);

    Ledger ledger(prices, config.fee_rate);
    for (std::size_t i = 0; i < prices.size(); ++i) {
        const Candle& candle = prices[i];
        if (!ledger.flat()) {
            const Position& p = ledger.position();
            if (i >= p.earliest_touch_index) {
                const auto touch = detect_touch(candle, p.barriers);
                if (touch == BarrierTouch::upper) {
                    ledger.close(i, p.barriers.upper,
                                 p.side == Side::long_side ? ExitReason::take_profit : ExitReason::stop_loss);
                } else if (touch == BarrierTouch::lower) {
                    ledger.close(i, p.barriers.lower,
                                 p.side == Side::long_side ? ExitReason::stop_loss : ExitReason::take_profit);
                }
            }
            if (!ledger.flat() && i == ledger.position().deadline_index) {
                ledger.close(i, candle.close, ExitReason::time_limit);
            }
        }

        const DailyAggregate* signal = signals.at(candle.day - 1);
        if (ledger.flat() && signal != nullptr && signal->signal != TrendLabel::neutral &&
            i + 1 < prices.size()) {
            std::optional<BarrierConfig> barrier_config = config.barriers;
            if (schedule != nullptr) {
                if (auto scheduled = (*schedule)(candle.day)) barrier_config = scheduled;
            }
            const auto sigma = vols.at(candle.day);
            const double size = position_size(config, *signal);
            if (!barrier_config || !sigma) {
                ledger.warn(fmt::format("{}: no barrier config or volatility, entry skipped",
                                        candle.day.iso()));
            } else if (size > 0.0) {
                try {
                    Position p;
                    p.barriers = compute_barriers(candle.close, *sigma, *barrier_config);
                    p.side = signal->signal == TrendLabel::bullish ? Side::long_side : Side::short_side;
                    p.entry_index = i;
                    p.entry_price = candle.close;
                    p.size = size;
                    p.deadline_index = i + static_cast<std::size_t>(barrier_config->v_max);
                    p.earliest_touch_index = i + static_cast<std::size_t>(barrier_config->min_trend_days);
                    ledger.open(p);
                } catch (const DegenerateBarrierError& e) {
                    ledger.warn(fmt::format("{}: {}; entry skipped", candle.day.iso(), e.what()));
                }
            }
        }
        ledger.mark_close(i);
    }
    ledger.finish();
    return ledger.take();
}

BacktestResult run_hold(const PriceSeries& prices, Side side) {
    if (prices.size() < 2) {
        throw DataError("hold benchmark needs at least 2 days");
    }
    Ledger ledger(prices, 0.0);
    Position p;
    p.side = side;
    p.entry_index = 0;
    p.entry_price = prices[0].close;
    p.size = 1.0;
    ledger.open(p);
    for (std::size_t i = 0; i < prices.size(); ++i) {
        ledger.mark_close(i);
    }
    ledger.finish();
    return ledger.take();
}

std::vector<double> daily_returns(const EquityCurve& curve) {
    std::vector<double> out;
    for (std::size_t i = 1; i < curve.equity.size(); ++i) {
        out.push_back(curve.equity[i] / curve.equity[i - 1] - 1.0);
    }
    return out;
}

double max_drawdown_pct(std::span<const double> equity) {
    double peak = 0.0;
    double worst = 0.0;
    for (double v : equity) {
        peak = std::max(peak, v);
        if (peak > 0.0) worst = std::max(worst, (peak - v) / peak);
    }
    return worst * 100.0;
}

PerformanceReport performance(std::span<const Trade> trades, const EquityCurve& equity,
                              const SharpeParams& params) {
    params.validate();
    if (equity.equity.size() < 2) {
        throw DataError("performance needs at least 2 equity values");
    }
    PerformanceReport r;
    const auto returns = daily_returns(equity);
    const auto n = static_cast<double>(returns.size());
    double mean = 0.0;
    for (double v : returns) mean += v;
    mean /= n;
    r.daily_return_pct = mean * 100.0;
    r.cumulative_return_pct = (equity.equity.back() / equity.equity.front() - 1.0) * 100.0;
    if (returns.size() >= 2) {
        try {
            r.sharpe = sharpe_ratio(returns, params);
        } catch (const UndefinedSharpeError&) {
        }
    }

    const double rf = params.daily_risk_free();
    double downside = 0.0;
    for (double v : returns) {
        const double excess = v - rf;
        if (excess < 0.0) downside += excess * excess;
    }
    downside = std::sqrt(downside / n);
    if (downside > 0.0) {
        r.sortino = (mean - rf) / downside * std::sqrt(static_cast<double>(params.days_per_year));
    }
    r.max_drawdown_pct = max_drawdown_pct(equity.equity);

    r.closed_trades = trades.size();
    if (!trades.empty()) {
        double gross_profit = 0.0;
        double gross_loss = 0.0;
        std::size_t wins = 0;
        std::size_t losses = 0;
        double win_days = 0.0;
        double loss_days = 0.0;
        for (const auto& t : trades) {
            if (t.pnl > 0.0) {
                gross_profit += t.pnl;
                ++wins;
                win_days += t.duration_days();
            } else if (t.pnl < 0.0) {
                gross_loss -= t.pnl;
                ++losses;
                loss_days += t.duration_days();
            }
        }
        if (gross_loss > 0.0) {
            r.profit_factor = gross_profit / gross_loss;
        } else if (gross_profit > 0.0) {
            r.profit_factor_infinite = true;
        }
        r.win_rate_pct = 100.0 * static_cast<double>(wins) / static_cast<double>(trades.size());
        if (wins > 0) r.avg_win_duration_days = win_days / static_cast<double>(wins);
        if (losses > 0) r.avg_loss_duration_days = loss_days / static_cast<double>(losses);
    }
    return r;
}

void write_trades_csv(std::ostream& out, std::span<const Trade> trades) {
    out << "side,entry_day,entry_price,exit_day,exit_price,size,reason,pnl\n";
    for (const auto& t : trades) {
        out << to_string(t.side) << ',' << t.entry_day.iso() << ',' << format_number(t.entry_price)
            << ',' << t.exit_day.iso() << ',' << format_number(t.exit_price) << ','
            << format_number(t.size) << ',' << to_string(t.reason) << ',' << format_number(t.pnl)
            << '\n';
    }
}

void write_equity_csv(std::ostream& out, const EquityCurve& curve) {
    out << "day,equity\n";
    for (std::size_t i = 0; i < curve.days.size(); ++i) {
        out << curve.days[i].iso() << ',' << format_number(curve.equity[i]) << '\n';
    }
}

std::string report_to_json(const PerformanceReport& r) {
    auto opt = [](const std::optional<double>& v) -> nlohmann::ordered_json {
        return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
    };
    nlohmann::ordered_json j;
    j["daily_return_pct"] = r.daily_return_pct;
    j["cumulative_return_pct"] = r.cumulative_return_pct;
    j["sharpe"] = opt(r.sharpe);
    j["sortino"] = opt(r.sortino);
    j["closed_trades"] = r.closed_trades;
    j["max_drawdown_pct"] = r.max_drawdown_pct;
    j["profit_factor"] = opt(r.profit_factor);
    j["profit_factor_infinite"] = r.profit_factor_infinite;
    j["win_rate_pct"] = opt(r.win_rate_pct);
    j["avg_win_trade_days"] = opt(r.avg_win_duration_days);
    j["avg_losing_trade_days"] = opt(r.avg_loss_duration_days);
    return j.dump();
}

}  // namespace trendlab
