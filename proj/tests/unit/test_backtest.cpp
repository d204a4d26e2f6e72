#include "oracles.hpp"

#include "trendlab/backtest.hpp"
#include "trendlab/errors.hpp"
#include "trendlab/numeric_format.hpp"
#include "trendlab/synthetic.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace trendlab;
using trendlab::testing::series_from_closes;
using trendlab::testing::series_from_ohlc;

namespace {

const Day kDay = Day::parse("2022-01-01");
constexpr auto B = TrendLabel::bullish;
constexpr auto N = TrendLabel::neutral;
constexpr auto S = TrendLabel::bearish;

SignalSeries signals_from(Day first, const std::vector<TrendLabel>& labels,
                          const std::vector<double>& confidences = {}) {
    std::vector<DailyAggregate> days;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        DailyAggregate d;
        d.day = first + static_cast<std::int32_t>(i);
        d.signal = labels[i];
        d.counts[index_of(labels[i])] = 1;
        d.confidence_raw = 1.0;
        d.confidence = confidences.empty() ? 1.0 : confidences[i];
        days.push_back(d);
    }
    return SignalSeries(SignalMethod::majority, std::move(days));
}

StrategyConfig config_of(StrategyKind kind, bool sizing = false, double fee = 0.0) {
    StrategyConfig c;
    c.kind = kind;
    c.confidence_sizing = sizing;
    c.fee_rate = fee;
    if (kind == StrategyKind::tbl) c.barriers = BarrierConfig{1, 1, 8, 2};
    return c;
}

VolatilitySeries flat_vol(const PriceSeries& prices, double sigma) {
    return VolatilitySeries(prices.first_day(), std::vector<std::optional<double>>(prices.size(), sigma), 0);
}

}  // namespace

TEST(InOut, LongHandWalk) {
    const auto prices = series_from_closes(kDay, {100, 105, 110, 108});
    const auto r = run_in_out(signals_from(kDay, {B, N, S}), prices, config_of(StrategyKind::in_out_long));
    ASSERT_EQ(r.trades.size(), 1u);
    const auto& t = r.trades[0];
    EXPECT_EQ(t.side, Side::long_side);
    EXPECT_EQ(t.entry_day, kDay + 1);
    EXPECT_EQ(t.entry_price, 105.0);
    EXPECT_EQ(t.exit_day, kDay + 3);
    EXPECT_EQ(t.exit_price, 108.0);
    EXPECT_EQ(t.reason, ExitReason::opposite_signal);
    EXPECT_NEAR(t.pnl, 108.0 / 105.0 - 1.0, 1e-15);
    ASSERT_EQ(r.equity.equity.size(), 4u);
    EXPECT_EQ(r.equity.equity[1], 1.0);
    EXPECT_NEAR(r.equity.equity[2], 110.0 / 105.0, 1e-15);
    EXPECT_NEAR(r.equity.equity[3], 108.0 / 105.0, 1e-15);
}

TEST(InOut, AllNeutralStaysFlat) {
    const auto prices = series_from_closes(kDay, {100, 90, 120, 80});
    const auto r = run_in_out(signals_from(kDay - 1, {N, N, N, N}), prices, config_of(StrategyKind::in_out_long));
    EXPECT_TRUE(r.trades.empty());
    for (double e : r.equity.equity) EXPECT_EQ(e, 1.0);
}

TEST(InOut, ShortHandWalk) {
    const auto prices = series_from_closes(kDay, {100, 95, 97});
    const auto r = run_in_out(signals_from(kDay, {S, B}), prices, config_of(StrategyKind::in_out_short));
    ASSERT_EQ(r.trades.size(), 1u);
    EXPECT_EQ(r.trades[0].side, Side::short_side);
    EXPECT_EQ(r.trades[0].entry_day, kDay + 1);
    EXPECT_EQ(r.trades[0].exit_day, kDay + 2);
    EXPECT_NEAR(r.trades[0].pnl, -(97.0 - 95.0) / 95.0, 1e-15);
}

TEST(InOut, OpenPositionClosedAtEndAndNoEntryOnLastDay) {
    const auto prices = series_from_closes(kDay, {100, 102, 104, 106});
    const auto r = run_in_out(signals_from(kDay, {B, N, N}), prices, config_of(StrategyKind::in_out_long));
    ASSERT_EQ(r.trades.size(), 1u);
    EXPECT_EQ(r.trades[0].reason, ExitReason::end_of_data);
    EXPECT_EQ(r.trades[0].exit_day, kDay + 3);
    EXPECT_NEAR(r.equity.equity.back(), 1.0 + r.trades[0].pnl, 1e-15);

    const auto late = run_in_out(signals_from(kDay, {N, N, B}), prices, config_of(StrategyKind::in_out_long));
    EXPECT_TRUE(late.trades.empty());
}

TEST(InOut, SizingAndFees) {
    const auto prices = series_from_closes(kDay, {100, 100, 110, 110});
    const auto sized = run_in_out(signals_from(kDay, {B, N, S}, {0.4, 1, 1}), prices,
                                  config_of(StrategyKind::in_out_long, true));
    EXPECT_NEAR(sized.trades[0].size, 0.4, 1e-15);
    EXPECT_NEAR(sized.trades[0].pnl, 0.04, 1e-15);
    const auto fees = run_in_out(signals_from(kDay, {B, N, S}), prices,
                                 config_of(StrategyKind::in_out_long, false, 0.001));
    EXPECT_NEAR(fees.trades[0].pnl, 0.1 - 0.001 * 2.1, 1e-15);
    EXPECT_NEAR(fees.equity.equity[1], 0.999, 1e-15);  // entry fee marked on day one
    const auto zero = run_in_out(signals_from(kDay, {B, N, S}, {0.0, 1, 1}), prices,
                                 config_of(StrategyKind::in_out_long, true));
    EXPECT_TRUE(zero.trades.empty());
}

TEST(InOut, RejectsMismatchedCalendarsAndKinds) {
    const auto prices = series_from_closes(kDay, {100, 101, 102});
    EXPECT_THROW(run_in_out(signals_from(kDay + 10, {B, S}), prices, config_of(StrategyKind::in_out_long)), DataError);
    EXPECT_THROW(run_in_out(signals_from(kDay, {B, S}), prices, config_of(StrategyKind::tbl)), ConfigError);
    auto bad = config_of(StrategyKind::in_out_long);
    bad.base_fraction = 1.5;
    EXPECT_THROW(run_in_out(signals_from(kDay, {B, S}), prices, bad), ConfigError);
}

TEST(InOut, ShortPositionCanExhaustEquity) {
    const auto prices = series_from_closes(kDay, {100, 100, 250, 320});
    EXPECT_THROW(run_in_out(signals_from(kDay, {S, N, N}), prices, config_of(StrategyKind::in_out_short)), DataError);
}

TEST(Tbl, TakeProfitAtBarrierPrice) {
    const auto prices = series_from_ohlc(kDay, {{100, 100, 100, 100},
                                                {100, 101, 99.5, 100.5},
                                                {100.5, 101.5, 100, 101},
                                                {101, 102.5, 100.8, 102.2},
                                                {102.2, 103, 102, 102.5}});
    const auto r = run_tbl(signals_from(kDay - 1, {B, N, N, N, N}), prices, flat_vol(prices, 0.02),
                           config_of(StrategyKind::tbl));
    ASSERT_EQ(r.trades.size(), 1u);
    EXPECT_EQ(r.trades[0].exit_day, kDay + 3);
    EXPECT_NEAR(r.trades[0].exit_price, 102.0, 1e-12);
    EXPECT_EQ(r.trades[0].reason, ExitReason::take_profit);
    EXPECT_NEAR(r.trades[0].pnl, 0.02, 1e-12);
}

TEST(Tbl, TimeLimitAtDeadlineClose) {
    std::vector<std::array<double, 4>> rows;
    for (int i = 0; i < 12; ++i) rows.push_back({100, 100.5, 99.5, i == 8 ? 100.3 : 100});
    rows[9][0] = 100.3;
    const auto prices = series_from_ohlc(kDay, rows);
    const auto r = run_tbl(signals_from(kDay - 1, std::vector<TrendLabel>(12, N)), prices, flat_vol(prices, 0.02),
                           config_of(StrategyKind::tbl));
    EXPECT_TRUE(r.trades.empty());
    std::vector<TrendLabel> sig(12, N);
    sig[0] = B;
    const auto timed = run_tbl(signals_from(kDay - 1, sig), prices, flat_vol(prices, 0.02), config_of(StrategyKind::tbl));
    ASSERT_EQ(timed.trades.size(), 1u);
    EXPECT_EQ(timed.trades[0].reason, ExitReason::time_limit);
    EXPECT_EQ(timed.trades[0].exit_day, kDay + 8);
    EXPECT_EQ(timed.trades[0].exit_price, 100.3);
}

TEST(Tbl, ShortStopLossAtUpperBarrier) {
    const auto prices = series_from_ohlc(kDay, {{100, 100, 100, 100},
                                                {100, 101, 99.5, 100.5},
                                                {100.5, 103, 100, 102.5},
                                                {102.5, 103, 102, 102.5}});
    const auto r = run_tbl(signals_from(kDay - 1, {S, N, N, N}), prices, flat_vol(prices, 0.02),
                           config_of(StrategyKind::tbl));
    ASSERT_EQ(r.trades.size(), 1u);
    EXPECT_EQ(r.trades[0].side, Side::short_side);
    EXPECT_EQ(r.trades[0].reason, ExitReason::stop_loss);
    EXPECT_NEAR(r.trades[0].exit_price, 102.0, 1e-12);
    EXPECT_LT(r.trades[0].pnl, 0.0);
    EXPECT_NEAR(r.trades[0].pnl, -0.02, 1e-12);
}

TEST(Tbl, DegenerateBarriersSkipTheEntry) {
    const auto prices = series_from_closes(kDay, {100, 100, 101, 102});
    const auto r = run_tbl(signals_from(kDay - 1, {B, N, N, N}), prices, flat_vol(prices, 0.0),
                           config_of(StrategyKind::tbl));
    EXPECT_TRUE(r.trades.empty());
    ASSERT_EQ(r.warnings.size(), 1u);
    StrategyConfig none = config_of(StrategyKind::tbl);
    none.barriers.reset();
    EXPECT_THROW(run_tbl(signals_from(kDay - 1, {B}), prices, flat_vol(prices, 0.02), none), ConfigError);
}

TEST(Tbl, ScheduleOverridesFixedBarriers) {
    const auto prices = series_from_ohlc(kDay, {{100, 100, 100, 100},
                                                {100, 101, 99.5, 100.5},
                                                {100.5, 101.5, 100, 101},
                                                {101, 102.5, 100.8, 102.2},
                                                {102.2, 103, 102, 102.5},
                                                {102.5, 104.5, 102, 104}});
    const BarrierProvider wide = [](Day) { return std::optional<BarrierConfig>(BarrierConfig{2, 2, 8, 2}); };
    const auto r = run_tbl(signals_from(kDay - 1, {B, N, N, N, N, N}), prices, flat_vol(prices, 0.02),
                           config_of(StrategyKind::tbl), &wide);
    ASSERT_EQ(r.trades.size(), 1u);
    EXPECT_EQ(r.trades[0].exit_day, kDay + 5);
    EXPECT_NEAR(r.trades[0].exit_price, 104.0, 1e-12);
}

TEST(Tbl, PerfectForesightNeverLoses) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        GbmParams gbm;
        gbm.seed = seed;
        gbm.days = 400;
        const auto prices = gen_gbm(gbm);
        const auto vols = ewma_volatility(log_returns(prices), {30, 30});
        const BarrierConfig barriers{1.5, 1.0, 10, 2};
        const auto daily = daily_labels(label_series(prices, vols, barriers));
        std::vector<TrendLabel> next;
        for (Day d = daily.first_day() - 1; d < daily.last_day(); d = d + 1) next.push_back(*daily.at(d + 1));
        auto config = config_of(StrategyKind::tbl);
        config.barriers = barriers;
        const auto r = run_tbl(signals_from(daily.first_day() - 1, next), prices, vols, config);
        ASSERT_FALSE(r.trades.empty());
        for (const auto& t : r.trades) {
            EXPECT_EQ(t.reason, ExitReason::take_profit) << "seed " << seed;
            EXPECT_GT(t.pnl, 0.0);
        }
        const auto report = performance(r.trades, r.equity, SharpeParams{});
        EXPECT_TRUE(report.profit_factor_infinite);
        EXPECT_FALSE(report.profit_factor.has_value());
        EXPECT_EQ(*report.win_rate_pct, 100.0);
    }
}

namespace {

struct RandomRun {
    PriceSeries prices;
    VolatilitySeries vols;
    std::vector<TrendLabel> labels;
    std::vector<double> confidences;
};

RandomRun random_run(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    GbmParams gbm;
    gbm.seed = seed;
    gbm.days = 300;
    RandomRun run{gen_gbm(gbm), {}, {}, {}};
    run.vols = ewma_volatility(log_returns(run.prices), {30, 30});
    for (std::size_t i = 0; i < run.prices.size(); ++i) {
        run.labels.push_back(static_cast<TrendLabel>(rng() % 3));
        run.confidences.push_back(u(rng));
    }
    return run;
}

BacktestResult run_kind(const RandomRun& run, StrategyKind kind, double scale = 1.0) {
    auto confidences = run.confidences;
    for (auto& c : confidences) c *= scale;
    const auto signals = signals_from(run.prices.first_day(), run.labels, confidences);
    auto config = config_of(kind, true);
    if (kind == StrategyKind::tbl) {
        return run_tbl(signals, run.prices.slice(run.prices.first_day() + 30, run.prices.last_day()), run.vols, config);
    }
    return run_in_out(signals, run.prices, config);
}

}  // namespace

TEST(Accounting, ZeroFeeEquityIsProductOfTradeReturns) {
    for (std::uint64_t seed = 100; seed < 130; ++seed) {
        const auto run = random_run(seed);
        for (auto kind : {StrategyKind::tbl, StrategyKind::in_out_long, StrategyKind::in_out_short}) {
            const auto r = run_kind(run, kind);
            double product = 1.0;
            for (const auto& t : r.trades) {
                const double sign = t.side == Side::long_side ? 1.0 : -1.0;
                product *= 1.0 + t.size * sign * (t.exit_price - t.entry_price) / t.entry_price;
                EXPECT_GT(t.exit_day, t.entry_day);
                EXPECT_GT(t.size, 0.0);
                EXPECT_LE(t.size, 1.0);
            }
            EXPECT_NEAR(r.equity.equity.back(), product, 1e-9);
            for (double e : r.equity.equity) EXPECT_GT(e, 0.0);
        }
    }
}

TEST(Accounting, ScalingConfidenceScalesEveryPnl) {
    for (std::uint64_t seed = 200; seed < 220; ++seed) {
        const auto run = random_run(seed);
        for (auto kind : {StrategyKind::tbl, StrategyKind::in_out_long, StrategyKind::in_out_short}) {
            const auto base = run_kind(run, kind);
            for (double c : {0.5, 0.25}) {
                const auto scaled = run_kind(run, kind, c);
                ASSERT_EQ(scaled.trades.size(), base.trades.size());
                for (std::size_t i = 0; i < base.trades.size(); ++i) {
                    EXPECT_NEAR(scaled.trades[i].pnl, c * base.trades[i].pnl, 1e-15);
                }
                const auto pb = performance(base.trades, base.equity, SharpeParams{});
                const auto ps = performance(scaled.trades, scaled.equity, SharpeParams{});
                EXPECT_EQ(pb.win_rate_pct, ps.win_rate_pct);
            }
        }
    }
}

TEST(Hold, Examples) {
    const auto up = run_hold(series_from_closes(kDay, {100, 104, 110}), Side::long_side);
    ASSERT_EQ(up.trades.size(), 1u);
    EXPECT_NEAR(up.trades[0].pnl, 0.10, 1e-15);
    const auto down = run_hold(series_from_closes(kDay, {100, 95, 90}), Side::short_side);
    EXPECT_NEAR(down.trades[0].pnl, 0.10, 1e-15);
    EXPECT_EQ(performance(up.trades, up.equity, SharpeParams{}).closed_trades, 1u);
    EXPECT_EQ(*performance(up.trades, up.equity, SharpeParams{}).win_rate_pct, 100.0);
    const auto loser = run_hold(series_from_closes(kDay, {100, 95, 90}), Side::long_side);
    EXPECT_EQ(*performance(loser.trades, loser.equity, SharpeParams{}).win_rate_pct, 0.0);
    EXPECT_THROW(run_hold(series_from_closes(kDay, {100}), Side::long_side), DataError);
}

TEST(Hold, MatchesPermanentBullishInOut) {
    for (std::uint64_t seed = 1; seed < 10; ++seed) {
        GbmParams gbm;
        gbm.seed = seed;
        gbm.days = 250;
        const auto prices = gen_gbm(gbm);
        const auto hold = run_hold(prices, Side::long_side);
        const auto in_out = run_in_out(signals_from(prices.first_day() - 1, std::vector<TrendLabel>(prices.size(), B)),
                                       prices, config_of(StrategyKind::in_out_long));
        EXPECT_EQ(hold.equity.equity, in_out.equity.equity);
        EXPECT_EQ(hold.equity.days, in_out.equity.days);
    }
}

TEST(Performance, Examples) {
    EXPECT_NEAR(max_drawdown_pct(std::vector<double>{100, 120, 90, 130}), 25.0, 1e-12);
    EXPECT_EQ(max_drawdown_pct(std::vector<double>{1, 2, 3}), 0.0);

    std::vector<Trade> trades(3);
    const double pnls[] = {0.10, 0.05, -0.05};
    for (int i = 0; i < 3; ++i) {
        trades[i].entry_day = kDay;
        trades[i].exit_day = kDay + 2 + i;
        trades[i].pnl = pnls[i];
    }
    const EquityCurve curve{{kDay, kDay + 1, kDay + 2}, {1.0, 1.02, 1.0098}};
    const auto r = performance(trades, curve, SharpeParams{0.0, 365});
    EXPECT_NEAR(*r.profit_factor, 3.0, 1e-12);
    EXPECT_FALSE(r.profit_factor_infinite);
    EXPECT_NEAR(*r.win_rate_pct, 200.0 / 3.0, 1e-12);
    EXPECT_NEAR(*r.avg_win_duration_days, 2.5, 1e-12);
    EXPECT_NEAR(*r.avg_loss_duration_days, 4.0, 1e-12);
    EXPECT_NEAR(*r.sortino, 13.509256086106296, 1e-9);
    EXPECT_NEAR(r.daily_return_pct, 0.5, 1e-9);
    EXPECT_NEAR(r.cumulative_return_pct, 0.98, 1e-9);
    EXPECT_EQ(r.closed_trades, 3u);
}

TEST(Performance, SingleReturnLeavesSharpeUndefined) {
    const EquityCurve two{{kDay, kDay + 1}, {1.0, 1.1}};
    const auto r = performance({}, two, SharpeParams{0.0, 365});
    EXPECT_FALSE(r.sharpe);
    EXPECT_NEAR(r.cumulative_return_pct, 10.0, 1e-12);
}

TEST(Performance, NoTradesAndFlatEquity) {
    const EquityCurve flat{{kDay, kDay + 1, kDay + 2}, {1, 1, 1}};
    const auto r = performance({}, flat, SharpeParams{0.0, 365});
    EXPECT_EQ(r.closed_trades, 0u);
    EXPECT_FALSE(r.win_rate_pct);
    EXPECT_FALSE(r.profit_factor);
    EXPECT_FALSE(r.sortino);
    EXPECT_EQ(r.sharpe, 0.0);
    EXPECT_THROW(performance({}, EquityCurve{{kDay}, {1}}, SharpeParams{}), DataError);
}

TEST(Performance, BoundsOnRandomRuns) {
    for (std::uint64_t seed = 300; seed < 320; ++seed) {
        const auto run = random_run(seed);
        const auto r = run_kind(run, StrategyKind::in_out_long);
        const auto p = performance(r.trades, r.equity, SharpeParams{});
        EXPECT_GE(p.max_drawdown_pct, 0.0);
        EXPECT_LE(p.max_drawdown_pct, 100.0);
        if (p.win_rate_pct) {
            EXPECT_GE(*p.win_rate_pct, 0.0);
            EXPECT_LE(*p.win_rate_pct, 100.0);
        }
        if (p.profit_factor) EXPECT_GE(*p.profit_factor, 0.0);
    }
}

TEST(Output, CsvAndJsonShapes) {
    const auto r = run_in_out(signals_from(kDay, {B, N, S}), series_from_closes(kDay, {100, 105, 110, 108}),
                              config_of(StrategyKind::in_out_long));
    std::ostringstream trades;
    write_trades_csv(trades, r.trades);
    EXPECT_EQ(trades.str(),
              "side,entry_day,entry_price,exit_day,exit_price,size,reason,pnl\n"
              "long,2022-01-02,105,2022-01-04,108,1," "opposite_signal," +
                  format_number((108.0 - 105.0) / 105.0) + "\n");
    std::ostringstream equity;
    write_equity_csv(equity, r.equity);
    EXPECT_EQ(equity.str().substr(0, 24), "day,equity\n2022-01-01,1\n");
    const auto json = report_to_json(performance(r.trades, r.equity, SharpeParams{}));
    const char* keys[] = {"daily_return_pct", "cumulative_return_pct", "sharpe", "sortino", "closed_trades",
                          "max_drawdown_pct", "profit_factor", "profit_factor_infinite", "win_rate_pct",
                          "avg_win_trade_days", "avg_losing_trade_days"};
    std::size_t pos = 0;
    for (const char* key : keys) {
        const auto next = json.find(std::string("\"") + key + "\"", pos);
        ASSERT_NE(next, std::string::npos) << key;
        pos = next;
    }
}
