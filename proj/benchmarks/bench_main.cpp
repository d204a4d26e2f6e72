#include "trendlab/backtest.hpp"
#include "trendlab/labeling.hpp"
#include "trendlab/optimizer.hpp"
#include "trendlab/signals.hpp"
#include "trendlab/synthetic.hpp"

#include <benchmark/benchmark.h>

using namespace trendlab;

namespace {

PriceSeries prices_of(int days) {
    GbmParams p;
    p.days = days;
    return gen_gbm(p);
}

void BM_EwmaVolatility(benchmark::State& state) {
    const auto returns = log_returns(prices_of(static_cast<int>(state.range(0))));
    for (auto _ : state) benchmark::DoNotOptimize(ewma_volatility(returns, {30, 30}));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EwmaVolatility)->Arg(730)->Arg(3650);

void BM_LabelSeries(benchmark::State& state) {
    const auto prices = prices_of(static_cast<int>(state.range(0)));
    const auto vols = ewma_volatility(log_returns(prices), {30, 30});
    for (auto _ : state) benchmark::DoNotOptimize(label_series(prices, vols, {1, 1, 10, 2}));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LabelSeries)->Arg(730)->Arg(3650);

// Full default grid (968 points) on two years of prices; arg = worker threads.
void BM_OptimizeBarriers(benchmark::State& state) {
    const auto prices = prices_of(730);
    const auto vols = ewma_volatility(log_returns(prices), {30, 30});
    const auto grid = OptimizationGrid::defaults();
    const OptimizeOptions options{6, SharpeParams{}, static_cast<unsigned>(state.range(0))};
    for (auto _ : state) benchmark::DoNotOptimize(optimize_barriers(prices, vols, grid, options));
}
BENCHMARK(BM_OptimizeBarriers)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_BuildSignalSeries(benchmark::State& state) {
    const auto prices = prices_of(730);
    const auto vols = ewma_volatility(log_returns(prices), {30, 30});
    const auto labels = daily_labels(label_series(prices, vols, {1, 1, 10, 2}));
    SyntheticClassifierParams params;
    params.tweets_per_day = static_cast<int>(state.range(0));
    const auto preds = gen_predictions(labels, params);
    const DayRange range{labels.first_day(), labels.last_day()};
    for (auto _ : state) {
        benchmark::DoNotOptimize(build_signal_series(preds, range, SignalMethod::majority, ThresholdSchedule{}));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(preds.size()));
}
BENCHMARK(BM_BuildSignalSeries)->Arg(5)->Arg(100);

void BM_RunTbl(benchmark::State& state) {
    const auto prices = prices_of(3650);
    const auto vols = ewma_volatility(log_returns(prices), {30, 30});
    const auto labels = daily_labels(label_series(prices, vols, {1, 1, 10, 2}));
    SyntheticClassifierParams params;
    const auto preds = gen_predictions(labels, params);
    const auto signals = normalize_confidence(
        build_signal_series(preds, {labels.first_day(), labels.last_day()}, SignalMethod::majority, ThresholdSchedule{}));
    StrategyConfig config;
    config.kind = StrategyKind::tbl;
    config.barriers = BarrierConfig{1, 1, 10, 2};
    for (auto _ : state) benchmark::DoNotOptimize(run_tbl(signals, prices, vols, config));
}
BENCHMARK(BM_RunTbl);

}  // namespace

BENCHMARK_MAIN();
