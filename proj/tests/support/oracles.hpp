#pragma once

// Straight-from-the-definition reimplementations used as test oracles. Kept deliberately
// naive and independent of the library code paths they check.

#include "trendlab/labeling.hpp"
#include "trendlab/market_data.hpp"
#include "trendlab/trend.hpp"

#include <cstddef>
#include <optional>
#include <random>
#include <vector>

namespace trendlab::testing {

/// Candles with open = previous close (first open = first close), high/low = max/min of
/// open and close widened by `wick` (relative).
PriceSeries series_from_closes(Day start, const std::vector<double>& closes, double wick = 0.0);

/// Candles from explicit (open, high, low, close) rows.
PriceSeries series_from_ohlc(Day start, const std::vector<std::array<double, 4>>& rows);

/// Random-walk candles with random wicks; heavier tails than GBM so double touches occur.
PriceSeries random_walk(std::mt19937_64& rng, Day start, std::size_t days, double daily_vol);

/// sigma at price index t straight from the weighted-sum definition; nullopt before tau.
std::vector<std::optional<double>> ewma_reference(const std::vector<double>& returns, int tau, int terms);

struct OracleWindow {
    std::size_t start = 0;
    std::size_t end = 0;
    TrendLabel label = TrendLabel::neutral;
    std::optional<std::size_t> touch;
    bool truncated = false;
};

/// Forward scan of the raw path from each window start.
std::vector<OracleWindow> oracle_labels(const PriceSeries& prices,
                                        const std::vector<std::optional<double>>& sigma_by_index,
                                        const BarrierConfig& config);

/// Two-pass sample variance -> standard deviation.
double two_pass_std(const std::vector<double>& xs);

/// Spreadsheet-style Wilder RSI: row by row, seeded with the simple average.
std::vector<double> wilder_rsi_reference(const std::vector<double>& closes, int period);

/// Mean excess over sample std, annualized.
double sharpe_reference(const std::vector<double>& returns, double rf_annual, int days_per_year);

/// Spearman rank correlation with average ranks for ties.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace trendlab::testing
