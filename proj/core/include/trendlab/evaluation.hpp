#pragma once

#include "trendlab/trend.hpp"

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace trendlab {

/// Rows are true classes, columns predicted, both in (bearish, neutral, bullish) order.
struct ConfusionMatrix {
    std::array<std::array<std::size_t, 3>, 3> counts{};

    std::size_t total() const;
    std::size_t trace() const;
    std::size_t row_sum(TrendLabel truth) const;
    std::size_t column_sum(TrendLabel predicted) const;
    std::size_t operator()(TrendLabel truth, TrendLabel predicted) const {
        return counts[index_of(truth)][index_of(predicted)];
    }
    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

ConfusionMatrix confusion(std::span<const TrendLabel> truth, std::span<const TrendLabel> predicted);

/// Joins (key, label) pairs on key before tallying. Keys must match one-to-one.
ConfusionMatrix confusion(std::span<const std::pair<std::string, TrendLabel>> truth,
                          std::span<const std::pair<std::string, TrendLabel>> predicted);

enum class MetricMode { ovr, ovo_bullish, ovo_bearish };

std::string_view to_string(MetricMode mode);

struct ClassMetrics {
    MetricMode mode = MetricMode::ovr;
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;
    /// Some precision or recall had a zero denominator and was scored 0.
    bool degenerate = false;
};

/// Macro-averaged one-vs-rest metrics; F1 is the mean of the per-class F1 scores.
ClassMetrics ovr_metrics(const ConfusionMatrix& cm);

/// Bullish-vs-Bearish metrics on the samples whose true label is Bullish or Bearish.
/// Neutral predictions count as errors for both focuses.
ClassMetrics ovo_metrics(std::span<const TrendLabel> truth, std::span<const TrendLabel> predicted,
                         TrendLabel focus);

/// Mean of -ln p(true class), probabilities floored at 1e-12.
double cross_entropy(std::span<const std::array<double, 3>> probs,
                     std::span<const TrendLabel> truth);

std::string metrics_to_json(const ClassMetrics& m, std::optional<double> cross_entropy = {});

}  // namespace trendlab
