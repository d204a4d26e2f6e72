#include "trendlab/signals.hpp"

#include "csv.hpp"
#include "trendlab/backtest.hpp"
#include "trendlab/errors.hpp"
#include "trendlab/numeric_format.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>

#include <fmt/format.h>
#include <json.hpp>

namespace trendlab {

namespace {

constexpr std::string_view kSignalsHeader =
    "day,method,signal,confidence_raw,confidence,n_bearish,n_neutral,n_bullish,d_mean";

std::array<std::size_t, 3> count_classes(std::span<const Prediction> predictions) {
    std::array<std::size_t, 3> counts{};
    for (const auto& p : predictions) {
        ++counts[index_of(p.predicted)];
    }
    return counts;
}

/// Unique argmax, Neutral on any tie for the maximum.
TrendLabel plurality(const std::array<std::size_t, 3>& counts) {
    const std::size_t top = *std::max_element(counts.begin(), counts.end());
    const auto winners = std::count(counts.begin(), counts.end(), top);
    if (winners > 1) {
        return TrendLabel::neutral;
    }
    return label_from_encoding(
        static_cast<int>(std::find(counts.begin(), counts.end(), top) - counts.begin()));
}

void require_single_day(std::span<const Prediction> predictions, const char* what) {
    if (predictions.empty()) {
        throw DataError(fmt::format("{}: no predictions", what));
    }
    const Day day = predictions.front().day;
    for (const auto& p : predictions) {
        if (p.day != day) {
            throw DataError(fmt::format("{}: predictions span {} and {}", what, day.iso(), p.day.iso()));
        }
    }
}

double mean_encoding_of(const std::array<std::size_t, 3>& counts) {
    const auto n = static_cast<double>(counts[0] + counts[1] + counts[2]);
    return (static_cast<double>(counts[1]) + 2.0 * static_cast<double>(counts[2])) / n;
}

DailyAggregate empty_day(Day day) {
    DailyAggregate agg;
    agg.day = day;
    agg.empty = true;
    return agg;
}

}  // namespace

void validate_prediction(const Prediction& p) {
    if (p.probs) {
        double sum = 0.0;
        for (double v : *p.probs) {
            if (!(v >= 0.0)) {
                throw DataError(fmt::format("prediction {}: negative probability", p.tweet_id));
            }
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-6) {
            throw DataError(fmt::format("prediction {}: probabilities sum to {}", p.tweet_id, sum));
        }
    }
    if (p.fold && (*p.fold < 0 || *p.fold > 4)) {
        throw DataError(fmt::format("prediction {}: fold {} outside 0-4", p.tweet_id, *p.fold));
    }
}

Prediction fold_ensemble(std::span<const Prediction> per_fold) {
    if (per_fold.empty() || per_fold.size() > 5) {
        throw DataError(fmt::format("fold ensemble needs 1-5 predictions, got {}", per_fold.size()));
    }
    const auto& first = per_fold.front();
    for (const auto& p : per_fold) {
        if (p.tweet_id != first.tweet_id) {
            throw DataError(fmt::format("fold ensemble mixes tweets '{}' and '{}'", first.tweet_id,
                                        p.tweet_id));
        }
        if (p.day != first.day) {
            throw DataError(fmt::format("fold ensemble: tweet '{}' has conflicting days", p.tweet_id));
        }
    }
    Prediction out{first.tweet_id, first.day, plurality(count_classes(per_fold)), std::nullopt,
                   std::nullopt};
    if (std::all_of(per_fold.begin(), per_fold.end(), [](const Prediction& p) { return p.probs.has_value(); })) {
        std::array<double, 3> avg{};
        for (const auto& p : per_fold) {
            for (std::size_t c = 0; c < 3; ++c) avg[c] += (*p.probs)[c];
        }
        for (double& v : avg) v /= static_cast<double>(per_fold.size());
        out.probs = avg;
    }
    return out;
}

std::vector<Prediction> ensemble_folds(std::span<const Prediction> predictions) {
    std::map<std::string, std::vector<Prediction>> groups;
    for (const auto& p : predictions) {
        groups[p.tweet_id].push_back(p);
    }
    std::vector<Prediction> out;
    out.reserve(groups.size());
    for (const auto& [id, group] : groups) {
        out.push_back(fold_ensemble(group));
    }
    std::sort(out.begin(), out.end(), [](const Prediction& a, const Prediction& b) {
        return std::tie(a.day, a.tweet_id) < std::tie(b.day, b.tweet_id);
    });
    return out;
}

void MeanThresholds::validate() const {
    if (!(0.0 <= t_bearish && t_bearish < t_bullish && t_bullish <= 2.0)) {
        throw ConfigError(fmt::format("mean thresholds need 0 <= t_bearish < t_bullish <= 2 (got {}, {})",
                                      t_bearish, t_bullish));
    }
}

DailyAggregate aggregate_majority(std::span<const Prediction> day_predictions) {
    require_single_day(day_predictions, "majority aggregation");
    DailyAggregate agg;
    agg.day = day_predictions.front().day;
    agg.counts = count_classes(day_predictions);
    agg.mean_encoding = mean_encoding_of(agg.counts);
    agg.signal = plurality(agg.counts);
    agg.confidence_raw = static_cast<double>(agg.counts[index_of(agg.signal)]) /
                         static_cast<double>(agg.total());
    return agg;
}

DailyAggregate aggregate_mean(std::span<const Prediction> day_predictions,
                              const MeanThresholds& thresholds) {
    require_single_day(day_predictions, "mean aggregation");
    thresholds.validate();
    DailyAggregate agg;
    agg.day = day_predictions.front().day;
    agg.counts = count_classes(day_predictions);
    agg.mean_encoding = mean_encoding_of(agg.counts);
    const double d = agg.mean_encoding;
    if (d < thresholds.t_bearish) {
        agg.signal = TrendLabel::bearish;
        agg.confidence_raw = std::abs(d - thresholds.t_bearish);
    } else if (d > thresholds.t_bullish) {
        agg.signal = TrendLabel::bullish;
        agg.confidence_raw = std::abs(d - thresholds.t_bullish);
    } else {
        agg.signal = TrendLabel::neutral;
        agg.confidence_raw =
            std::min(std::abs(d - thresholds.t_bearish), std::abs(d - thresholds.t_bullish));
    }
    return agg;
}

std::string_view to_string(SignalMethod method) {
    return method == SignalMethod::majority ? "majority" : "mean";
}

SignalMethod parse_signal_method(std::string_view text) {
    if (text == "majority") return SignalMethod::majority;
    if (text == "mean") return SignalMethod::mean;
    throw ConfigError(fmt::format("unknown signal method '{}' (majority|mean)", text));
}

SignalSeries::SignalSeries(SignalMethod method, std::vector<DailyAggregate> days)
    : method_(method), days_(std::move(days)) {
    for (std::size_t i = 1; i < days_.size(); ++i) {
        if (days_[i].day - days_[i - 1].day != 1) {
            throw DataError(fmt::format("signal series not dense: {} follows {}",
                                        days_[i].day.iso(), days_[i - 1].day.iso()));
        }
    }
}

const DailyAggregate* SignalSeries::at(Day d) const {
    if (days_.empty()) return nullptr;
    const auto offset = d - first_day();
    if (offset < 0 || static_cast<std::size_t>(offset) >= days_.size()) return nullptr;
    return &days_[static_cast<std::size_t>(offset)];
}

ThresholdSchedule::ThresholdSchedule(MeanThresholds fallback, std::vector<MeanThresholds> periods)
    : fallback_(fallback), periods_(std::move(periods)) {
    fallback_.validate();
    for (const auto& p : periods_) {
        p.validate();
        if (!p.valid) {
            throw DataError("scheduled mean thresholds need their source interval");
        }
    }
}

const MeanThresholds& ThresholdSchedule::thresholds_for(Day d) const {
    auto it = std::lower_bound(periods_.begin(), periods_.end(), d,
                               [](const MeanThresholds& p, Day day) { return p.valid->last < day; });
    return it == periods_.begin() ? fallback_ : *(it - 1);
}

SignalSeries build_signal_series(std::span<const Prediction> predictions, DayRange range,
                                 SignalMethod method, const ThresholdSchedule& thresholds) {
    if (range.last < range.first) {
        throw DataError("signal range is empty");
    }
    std::vector<std::vector<Prediction>> buckets(static_cast<std::size_t>(range.length()));
    for (const auto& p : predictions) {
        if (!range.contains(p.day)) {
            throw DataError(fmt::format("prediction '{}' on {} outside signal range {}..{}",
                                        p.tweet_id, p.day.iso(), range.first.iso(), range.last.iso()));
        }
        buckets[static_cast<std::size_t>(p.day - range.first)].push_back(p);
    }
    std::vector<DailyAggregate> days;
    days.reserve(buckets.size());
    for (std::size_t i = 0; i < buckets.size(); ++i) {
        const Day day = range.first + static_cast<std::int32_t>(i);
        if (buckets[i].empty()) {
            days.push_back(empty_day(day));
        } else if (method == SignalMethod::majority) {
            days.push_back(aggregate_majority(buckets[i]));
        } else {
            days.push_back(aggregate_mean(buckets[i], thresholds.thresholds_for(day)));
        }
    }
    return SignalSeries(method, std::move(days));
}

SignalSeries normalize_confidence(const SignalSeries& series, int window) {
    if (window < 2) {
        throw ConfigError(fmt::format("normalization window must be >= 2, got {}", window));
    }
    const auto w = static_cast<std::size_t>(window);
    std::vector<DailyAggregate> days(series.days().begin(), series.days().end());
    for (std::size_t i = 0; i < days.size(); ++i) {
        if (days[i].empty) {
            days[i].confidence = 0.0;
            continue;
        }
        double lo = 0.0;
        double hi = 0.0;
        std::size_t observed = 0;
        for (std::size_t j = i > w ? i - w : 0; j < i; ++j) {
            const auto& past = series[j];
            if (past.empty) continue;
            lo = observed == 0 ? past.confidence_raw : std::min(lo, past.confidence_raw);
            hi = observed == 0 ? past.confidence_raw : std::max(hi, past.confidence_raw);
            ++observed;
        }
        if (observed < 2 || !(hi > lo)) {
            days[i].confidence = 0.5;
        } else {
            days[i].confidence = std::clamp((days[i].confidence_raw - lo) / (hi - lo), 0.0, 1.0);
        }
    }
    return SignalSeries(series.method(), std::move(days));
}

std::vector<std::pair<double, double>> ThresholdGrid::pairs() const {
    if (!(step > 0.0) || !(min >= 0.0) || !(max <= 2.0) || !(min <= max)) {
        throw ConfigError(fmt::format("invalid threshold grid [{}, {}] step {}", min, max, step));
    }
    std::vector<double> values;
    const auto count = static_cast<int>(std::floor((max - min) / step + 1e-9));
    for (int i = 0; i <= count; ++i) {
        values.push_back(std::round((min + step * i) * 1e10) / 1e10);
    }
    std::vector<std::pair<double, double>> out;
    for (std::size_t a = 0; a < values.size(); ++a) {
        for (std::size_t b = a + 1; b < values.size(); ++b) {
            out.emplace_back(values[a], values[b]);
        }
    }
    return out;
}

namespace {

// Exact Sharpe ties are common when every tweet of a day agrees (the daily mean is then 0, 1
// or 2). Prefer the band centred on the neutral encoding, then the wider one.
bool better_centered(const MeanThresholds& a, const MeanThresholds& b) {
    const double off_a = std::abs((a.t_bearish + a.t_bullish) / 2.0 - 1.0);
    const double off_b = std::abs((b.t_bearish + b.t_bullish) / 2.0 - 1.0);
    if (std::abs(off_a - off_b) > 1e-12) return off_a < off_b;
    return (a.t_bullish - a.t_bearish) > (b.t_bullish - b.t_bearish) + 1e-12;
}

}  // namespace

std::optional<double> evaluate_threshold_pair(std::span<const Prediction> predictions,
                                              const PriceSeries& prices, DayRange interval,
                                              const MeanThresholds& thresholds,
                                              const SharpeParams& sharpe) {
    std::vector<Prediction> inside;
    for (const auto& p : predictions) {
        if (interval.contains(p.day)) inside.push_back(p);
    }
    const auto signals = build_signal_series(inside, interval, SignalMethod::mean,
                                             ThresholdSchedule{thresholds});
    const StrategyConfig config{StrategyKind::in_out_long, std::nullopt, 1.0, 0.0, false};
    const auto result = run_in_out(signals, prices.slice(interval.first, interval.last), config);
    const auto returns = daily_returns(result.equity);
    if (returns.size() < 2) {
        return std::nullopt;
    }
    try {
        return sharpe_ratio(returns, sharpe);
    } catch (const UndefinedSharpeError&) {
        return std::nullopt;
    }
}

std::vector<ThresholdChoice> optimize_mean_thresholds(std::span<const Prediction> predictions,
                                                      const PriceSeries& prices,
                                                      const VolatilitySeries& vols,
                                                      const MeanThresholdOptions& options) {
    const auto intervals = full_intervals(prices, vols, options.interval_months);
    if (intervals.empty()) {
        throw DataError(fmt::format("no full {}-month interval for threshold optimization",
                                    options.interval_months));
    }
    const auto pairs = options.grid.pairs();
    std::vector<ThresholdChoice> out;
    for (const auto& interval : intervals) {
        // Blocks without predictions carry no information; the previous choice stays in force.
        const bool observed = std::any_of(predictions.begin(), predictions.end(),
                                          [&](const Prediction& p) { return interval.contains(p.day); });
        if (!observed) continue;
        std::optional<ThresholdChoice> best;
        for (const auto& [bear, bull] : pairs) {
            const MeanThresholds candidate{bear, bull, interval};
            const auto score = evaluate_threshold_pair(predictions, prices, interval, candidate,
                                                       options.sharpe);
            if (score && (!best || *score > best->sharpe ||
                          (*score == best->sharpe && better_centered(candidate, best->thresholds)))) {
                best = ThresholdChoice{candidate, *score};
            }
        }
        if (best) out.push_back(*best);
    }
    return out;
}

std::vector<Prediction> read_predictions_jsonl(std::istream& in) {
    std::vector<Prediction> out;
    std::string line;
    std::size_t line_no = 0;
    while (detail::read_line(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            Prediction p;
            p.tweet_id = j.at("tweet_id").get<std::string>();
            p.day = Day::parse(j.at("day").get<std::string>());
            const auto& cls = j.at("class");
            p.predicted = cls.is_number_integer() ? label_from_encoding(cls.get<int>())
                                                  : parse_trend_label(cls.get<std::string>());
            if (j.contains("probs") && !j.at("probs").is_null()) {
                const auto probs = j.at("probs").get<std::vector<double>>();
                if (probs.size() != 3) {
                    throw DataError("probs must have 3 entries");
                }
                p.probs = std::array<double, 3>{probs[0], probs[1], probs[2]};
            }
            if (j.contains("fold") && !j.at("fold").is_null()) {
                p.fold = j.at("fold").get<int>();
            }
            validate_prediction(p);
            out.push_back(std::move(p));
        } catch (const nlohmann::json::exception& e) {
            throw DataError(fmt::format("predictions: line {}: {}", line_no, e.what()));
        } catch (const DataError& e) {
            throw DataError(fmt::format("predictions: line {}: {}", line_no, e.what()));
        }
    }
    return out;
}

void write_predictions_jsonl(std::ostream& out, std::span<const Prediction> predictions) {
    for (const auto& p : predictions) {
        nlohmann::ordered_json j;
        j["tweet_id"] = p.tweet_id;
        j["day"] = p.day.iso();
        j["class"] = std::string(to_string(p.predicted));
        if (p.probs) j["probs"] = *p.probs;
        if (p.fold) j["fold"] = *p.fold;
        out << j.dump() << '\n';
    }
}

void write_signals_csv(std::ostream& out, const SignalSeries& series) {
    out << kSignalsHeader << '\n';
    for (const auto& d : series.days()) {
        out << d.day.iso() << ',' << to_string(series.method()) << ',' << to_string(d.signal) << ','
            << format_number(d.confidence_raw) << ',' << format_number(d.confidence) << ','
            << d.counts[0] << ',' << d.counts[1] << ',' << d.counts[2] << ','
            << (d.empty ? std::string{} : format_number(d.mean_encoding)) << '\n';
    }
}

SignalSeries read_signals_csv(std::istream& in) {
    detail::expect_header(in, kSignalsHeader, "signals");
    std::optional<SignalMethod> method;
    std::vector<DailyAggregate> days;
    std::string line;
    std::size_t line_no = 1;
    while (detail::read_line(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = detail::split_csv_line(line);
        try {
            if (f.size() != 9) {
                throw DataError(fmt::format("expected 9 fields, got {}", f.size()));
            }
            DailyAggregate d;
            d.day = Day::parse(f[0]);
            SignalMethod m;
            try {
                m = parse_signal_method(f[1]);
            } catch (const ConfigError& e) {
                throw DataError(e.what());
            }
            if (method && *method != m) {
                throw DataError("mixed aggregation methods");
            }
            method = m;
            d.signal = parse_trend_label(f[2]);
            d.confidence_raw = parse_number(f[3], "confidence_raw");
            d.confidence = parse_number(f[4], "confidence");
            for (std::size_t c = 0; c < 3; ++c) {
                const double v = parse_number(f[5 + c], "count");
                if (v < 0 || v != std::floor(v)) {
                    throw DataError(fmt::format("count '{}' is not a non-negative integer", f[5 + c]));
                }
                d.counts[c] = static_cast<std::size_t>(v);
            }
            d.empty = d.total() == 0;
            d.mean_encoding = f[8].empty() ? 1.0 : parse_number(f[8], "d_mean");
            days.push_back(d);
        } catch (const DataError& e) {
            throw DataError(fmt::format("signals: line {}: {}", line_no, e.what()));
        }
    }
    return SignalSeries(method.value_or(SignalMethod::majority), std::move(days));
}

void write_thresholds_csv(std::ostream& out, std::span<const ThresholdChoice> choices) {
    out << "interval_start,interval_end,t_bearish,t_bullish,sharpe\n";
    for (const auto& c : choices) {
        out << c.thresholds.valid->first.iso() << ',' << c.thresholds.valid->last.iso() << ','
            << format_number(c.thresholds.t_bearish) << ',' << format_number(c.thresholds.t_bullish)
            << ',' << format_number(c.sharpe) << '\n';
    }
}

}  // namespace trendlab
