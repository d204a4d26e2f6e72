#pragma once

#include "trendlab/calendar.hpp"
#include "trendlab/labeling.hpp"
#include "trendlab/market_data.hpp"
#include "trendlab/signals.hpp"
#include "trendlab/text_pipeline.hpp"

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace trendlab {

/// Recorded in output metadata so synthetic runs can be reproduced elsewhere.
inline constexpr std::string_view kRngAlgorithm =
    "mt19937_64; normals by Box-Muller on 53-bit uniforms; per-day streams seeded by "
    "splitmix64(seed + 0x9e3779b97f4a7c15 * (day_index + 1))";
inline constexpr std::string_view kHighLowConvention =
    "open = previous close; high = max(open, close) * exp(|r| / 2); "
    "low = min(open, close) * exp(-|r| / 2); r = daily log return";

/// Seed for an independent sub-stream.
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index);

/// Uniform in [0, 1) from the top 53 bits.
double uniform01(std::mt19937_64& rng);

/// Box-Muller standard normal; platform-independent unlike std::normal_distribution.
double standard_normal(std::mt19937_64& rng);

struct GbmParams {
    std::uint64_t seed = 42;
    double drift = 0.0;       // annualized
    double volatility = 0.6;  // annualized
    int days = 365;
    double start_price = 100.0;
    Day start_day = Day::from_ymd(2020, 1, 1);

    void validate() const;
};

/// Log-return increments drift/365 + volatility/sqrt(365) * Z.
PriceSeries gen_gbm(const GbmParams& params);

enum class ErrorModel { uniform, neutral_biased };

std::string_view to_string(ErrorModel model);
ErrorModel parse_error_model(std::string_view text);

struct SyntheticClassifierParams {
    std::uint64_t seed = 7;
    double accuracy = 0.8;
    int tweets_per_day = 10;
    ErrorModel error_model = ErrorModel::uniform;

    void validate() const;
};

/// Synthetic tweet id for the k-th tweet of a day; shared by gen_predictions and gen_tweets.
std::string synthetic_tweet_id(Day day, int k);

/// Each synthetic tweet carries the day's true label with probability `accuracy`.
std::vector<Prediction> gen_predictions(const DailyLabels& labels,
                                        const SyntheticClassifierParams& params);

/// Template tweets matching gen_predictions ids, for exercising the prompt stage.
std::vector<RawTweet> gen_tweets(DayRange range, int tweets_per_day, std::uint64_t seed);

}  // namespace trendlab
