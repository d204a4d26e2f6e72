#pragma once

#include "trendlab/calendar.hpp"
#include "trendlab/market_data.hpp"
#include "trendlab/optimizer.hpp"
#include "trendlab/trend.hpp"

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace trendlab {

struct Prediction {
    std::string tweet_id;
    Day day;
    TrendLabel predicted = TrendLabel::neutral;
    /// (bearish, neutral, bullish)
    std::optional<std::array<double, 3>> probs;
    std::optional<int> fold;
};

void validate_prediction(const Prediction& p);

/// Plurality vote over 1-5 fold predictions of one tweet; ties resolve to Neutral.
/// Probabilities are averaged when every fold carries them.
Prediction fold_ensemble(std::span<const Prediction> per_fold);

/// Groups by tweet id and ensembles each group. Output sorted by (day, tweet_id).
std::vector<Prediction> ensemble_folds(std::span<const Prediction> predictions);

struct MeanThresholds {
    double t_bearish = 0.8;
    double t_bullish = 1.2;
    std::optional<DayRange> valid;

    void validate() const;
};

struct DailyAggregate {
    Day day;
    std::array<std::size_t, 3> counts{};  // bearish, neutral, bullish
    double mean_encoding = 1.0;
    TrendLabel signal = TrendLabel::neutral;
    double confidence_raw = 0.0;
    double confidence = 0.0;
    bool empty = false;

    std::size_t total() const { return counts[0] + counts[1] + counts[2]; }
};

/// Plurality class (ties to Neutral) and its share of the day's predictions.
DailyAggregate aggregate_majority(std::span<const Prediction> day_predictions);

/// Thresholded mean of class encodings; confidence is the distance from the mean to the
/// crossed threshold, or to the nearer one for Neutral.
DailyAggregate aggregate_mean(std::span<const Prediction> day_predictions,
                              const MeanThresholds& thresholds);

enum class SignalMethod { majority, mean };

std::string_view to_string(SignalMethod method);
SignalMethod parse_signal_method(std::string_view text);

/// One aggregate per calendar day over a contiguous range.
class SignalSeries {
public:
    SignalSeries() = default;
    SignalSeries(SignalMethod method, std::vector<DailyAggregate> days);

    SignalMethod method() const { return method_; }
    std::span<const DailyAggregate> days() const { return days_; }
    std::size_t size() const { return days_.size(); }
    bool empty() const { return days_.empty(); }
    const DailyAggregate& operator[](std::size_t i) const { return days_[i]; }
    Day first_day() const { return days_.front().day; }
    Day last_day() const { return days_.back().day; }
    const DailyAggregate* at(Day d) const;

private:
    SignalMethod method_ = SignalMethod::majority;
    std::vector<DailyAggregate> days_;
};

/// Mean thresholds in force per day: the pair chosen on interval k applies after k ends.
class ThresholdSchedule {
public:
    explicit ThresholdSchedule(MeanThresholds fallback = {}, std::vector<MeanThresholds> periods = {});

    const MeanThresholds& thresholds_for(Day d) const;
    std::span<const MeanThresholds> periods() const { return periods_; }

private:
    MeanThresholds fallback_;
    std::vector<MeanThresholds> periods_;
};

/// Dense signal calendar over `range`. Days without predictions are Neutral with zero
/// confidence and flagged empty. Predictions outside the range are a DataError.
SignalSeries build_signal_series(std::span<const Prediction> predictions, DayRange range,
                                 SignalMethod method,
                                 const ThresholdSchedule& thresholds = ThresholdSchedule{});

/// Trailing min-max normalization of confidence_raw over the `window` days before each
/// day (non-empty days only). Degenerate history yields 0.5; empty days stay at 0.
SignalSeries normalize_confidence(const SignalSeries& series, int window = 180);

struct ThresholdGrid {
    double min = 0.6;
    double max = 1.4;
    double step = 0.05;

    /// All (t_bearish, t_bullish) with t_bearish < t_bullish, lexicographic.
    std::vector<std::pair<double, double>> pairs() const;
};

struct MeanThresholdOptions {
    ThresholdGrid grid;
    int interval_months = 6;
    SharpeParams sharpe;
};

/// Sharpe of an unsized, fee-free In-Out-Long run over `interval` driven by mean signals
/// with the given thresholds; nullopt when undefined.
std::optional<double> evaluate_threshold_pair(std::span<const Prediction> predictions,
                                              const PriceSeries& prices, DayRange interval,
                                              const MeanThresholds& thresholds,
                                              const SharpeParams& sharpe);

struct ThresholdChoice {
    MeanThresholds thresholds;  // valid = the interval it was chosen on
    double sharpe = 0.0;
};

/// Per-interval grid search of mean-method thresholds (walk-forward, like barrier params).
/// Blocks without predictions, or where no pair scores, are skipped. Exact score ties go to the band
/// centred on 1, then the wider band.
std::vector<ThresholdChoice> optimize_mean_thresholds(std::span<const Prediction> predictions,
                                                      const PriceSeries& prices,
                                                      const VolatilitySeries& vols,
                                                      const MeanThresholdOptions& options = {});

std::vector<Prediction> read_predictions_jsonl(std::istream& in);
void write_predictions_jsonl(std::ostream& out, std::span<const Prediction> predictions);
void write_signals_csv(std::ostream& out, const SignalSeries& series);
SignalSeries read_signals_csv(std::istream& in);
void write_thresholds_csv(std::ostream& out, std::span<const ThresholdChoice> choices);

}  // namespace trendlab
