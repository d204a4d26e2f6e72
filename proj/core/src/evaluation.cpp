#include "trendlab/evaluation.hpp"

#include "trendlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include <fmt/format.h>
#include <json.hpp>

namespace trendlab {

namespace {

struct Ratio {
    double value = 0.0;
    bool defined = false;
};

Ratio ratio(std::size_t num, std::size_t den) {
    if (den == 0) return {};
    return {static_cast<double>(num) / static_cast<double>(den), true};
}

double harmonic(double precision, double recall) {
    return precision > 0.0 && recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

}  // namespace

std::size_t ConfusionMatrix::total() const {
    std::size_t sum = 0;
    for (const auto& row : counts)
        for (auto v : row) sum += v;
    return sum;
}

std::size_t ConfusionMatrix::trace() const { return counts[0][0] + counts[1][1] + counts[2][2]; }

std::size_t ConfusionMatrix::row_sum(TrendLabel truth) const {
    const auto& row = counts[index_of(truth)];
    return row[0] + row[1] + row[2];
}

std::size_t ConfusionMatrix::column_sum(TrendLabel predicted) const {
    const auto c = index_of(predicted);
    return counts[0][c] + counts[1][c] + counts[2][c];
}

ConfusionMatrix confusion(std::span<const TrendLabel> truth, std::span<const TrendLabel> predicted) {
    if (truth.size() != predicted.size()) {
        throw DataError(fmt::format("confusion: {} true labels vs {} predictions", truth.size(),
                                    predicted.size()));
    }
    if (truth.empty()) {
        throw DataError("confusion: no samples");
    }
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        ++cm.counts[index_of(truth[i])][index_of(predicted[i])];
    }
    return cm;
}

ConfusionMatrix confusion(std::span<const std::pair<std::string, TrendLabel>> truth,
                          std::span<const std::pair<std::string, TrendLabel>> predicted) {
    if (truth.size() != predicted.size()) {
        throw DataError(fmt::format("confusion: {} true labels vs {} predictions", truth.size(),
                                    predicted.size()));
    }
    std::unordered_map<std::string, TrendLabel> by_id;
    for (const auto& [id, label] : truth) {
        if (!by_id.emplace(id, label).second) {
            throw DataError(fmt::format("confusion: duplicate id '{}'", id));
        }
    }
    std::vector<TrendLabel> t;
    std::vector<TrendLabel> p;
    for (const auto& [id, label] : predicted) {
        const auto it = by_id.find(id);
        if (it == by_id.end()) {
            throw DataError(fmt::format("confusion: unmatched id '{}'", id));
        }
        t.push_back(it->second);
        p.push_back(label);
        by_id.erase(it);
    }
    if (!by_id.empty()) {
        throw DataError(fmt::format("confusion: unmatched id '{}'", by_id.begin()->first));
    }
    return confusion(t, p);
}

std::string_view to_string(MetricMode mode) {
    switch (mode) {
        case MetricMode::ovr:
            return "OVR";
        case MetricMode::ovo_bullish:
            return "OVO+";
        case MetricMode::ovo_bearish:
            return "OVO-";
    }
    throw InvariantError("unknown MetricMode");
}

ClassMetrics ovr_metrics(const ConfusionMatrix& cm) {
    const std::size_t total = cm.total();
    if (total == 0) {
        throw DataError("OVR metrics need at least one sample");
    }
    ClassMetrics m;
    m.mode = MetricMode::ovr;
    m.support = total;
    m.accuracy = static_cast<double>(cm.trace()) / static_cast<double>(total);
    for (const TrendLabel c : kAllLabels) {
        const std::size_t tp = cm(c, c);
        const Ratio precision = ratio(tp, cm.column_sum(c));
        const Ratio recall = ratio(tp, cm.row_sum(c));
        m.degenerate = m.degenerate || !precision.defined || !recall.defined;
        m.precision += precision.value / 3.0;
        m.recall += recall.value / 3.0;
        m.f1 += harmonic(precision.value, recall.value) / 3.0;
    }
    return m;
}

ClassMetrics ovo_metrics(std::span<const TrendLabel> truth, std::span<const TrendLabel> predicted,
                         TrendLabel focus) {
    if (focus == TrendLabel::neutral) {
        throw ConfigError("OVO focus must be bullish or bearish");
    }
    if (truth.size() != predicted.size()) {
        throw DataError(fmt::format("OVO: {} true labels vs {} predictions", truth.size(),
                                    predicted.size()));
    }
    const TrendLabel other = focus == TrendLabel::bullish ? TrendLabel::bearish : TrendLabel::bullish;
    std::size_t n = 0;
    std::size_t correct = 0;
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t positives = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] == TrendLabel::neutral) continue;
        ++n;
        correct += truth[i] == predicted[i];
        if (truth[i] == focus) {
            ++positives;
            tp += predicted[i] == focus;
        } else if (truth[i] == other && predicted[i] == focus) {
            ++fp;
        }
    }
    if (n == 0) {
        throw DataError("OVO: no samples with a Bullish or Bearish true label");
    }
    ClassMetrics m;
    m.mode = focus == TrendLabel::bullish ? MetricMode::ovo_bullish : MetricMode::ovo_bearish;
    m.support = positives;
    m.accuracy = static_cast<double>(correct) / static_cast<double>(n);
    const Ratio precision = ratio(tp, tp + fp);
    const Ratio recall = ratio(tp, positives);
    m.degenerate = !precision.defined || !recall.defined;
    m.precision = precision.value;
    m.recall = recall.value;
    m.f1 = harmonic(m.precision, m.recall);
    return m;
}

double cross_entropy(std::span<const std::array<double, 3>> probs, std::span<const TrendLabel> truth) {
    if (probs.size() != truth.size()) {
        throw DataError(fmt::format("cross entropy: {} probability triples for {} labels",
                                    probs.size(), truth.size()));
    }
    if (probs.empty()) {
        throw DataError("cross entropy: no samples");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        sum -= std::log(std::max(probs[i][index_of(truth[i])], 1e-12));
    }
    return sum / static_cast<double>(probs.size());
}

std::string metrics_to_json(const ClassMetrics& m, std::optional<double> ce) {
    nlohmann::ordered_json j;
    j["mode"] = std::string(to_string(m.mode));
    j["accuracy"] = m.accuracy;
    j["precision"] = m.precision;
    j["recall"] = m.recall;
    j["f1"] = m.f1;
    j["support"] = m.support;
    if (ce) j["cross_entropy"] = *ce;
    j["degenerate"] = m.degenerate;
    return j.dump();
}

}  // namespace trendlab
