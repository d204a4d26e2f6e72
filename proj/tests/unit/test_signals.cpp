#include "oracles.hpp"

#include "trendlab/errors.hpp"
#include "trendlab/signals.hpp"
#include "trendlab/synthetic.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

using namespace trendlab;

namespace {

const Day kDay = Day::parse("2020-03-01");

std::vector<Prediction> of_labels(const std::vector<TrendLabel>& labels, Day day = kDay) {
    std::vector<Prediction> out;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        out.push_back({"t" + std::to_string(i), day, labels[i], std::nullopt, std::nullopt});
    }
    return out;
}

std::vector<Prediction> of_counts(std::size_t bear, std::size_t neut, std::size_t bull) {
    std::vector<TrendLabel> labels;
    labels.insert(labels.end(), bear, TrendLabel::bearish);
    labels.insert(labels.end(), neut, TrendLabel::neutral);
    labels.insert(labels.end(), bull, TrendLabel::bullish);
    return of_labels(labels);
}

std::vector<TrendLabel> random_labels(std::mt19937_64& rng, std::size_t n) {
    std::vector<TrendLabel> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(static_cast<TrendLabel>(rng() % 3));
    return out;
}

constexpr auto B = TrendLabel::bullish;
constexpr auto N = TrendLabel::neutral;
constexpr auto S = TrendLabel::bearish;

}  // namespace

TEST(FoldEnsemble, Plurality) {
    const auto folds = [](const std::vector<TrendLabel>& labels) {
        auto preds = of_labels(labels);
        for (std::size_t i = 0; i < preds.size(); ++i) {
            preds[i].tweet_id = "same";
            preds[i].fold = static_cast<int>(i);
        }
        return preds;
    };
    EXPECT_EQ(fold_ensemble(folds({B, B, B, N, S})).predicted, B);
    EXPECT_EQ(fold_ensemble(folds({B, B, S, S, N})).predicted, N);
    EXPECT_EQ(fold_ensemble(folds({S})).predicted, S);
}

TEST(FoldEnsemble, RejectsMixedTweetsAndAveragesProbs) {
    auto folds = of_labels({B, B});
    EXPECT_THROW(fold_ensemble(folds), DataError);  // distinct ids
    folds[1].tweet_id = folds[0].tweet_id;
    folds[0].probs = std::array<double, 3>{0.1, 0.2, 0.7};
    folds[1].probs = std::array<double, 3>{0.3, 0.2, 0.5};
    const auto merged = fold_ensemble(folds);
    ASSERT_TRUE(merged.probs);
    EXPECT_NEAR((*merged.probs)[2], 0.6, 1e-12);
    EXPECT_THROW(fold_ensemble(std::vector<Prediction>{}), DataError);

    std::vector<Prediction> many;
    for (int f = 0; f < 5; ++f) many.push_back({"x", kDay, f < 3 ? B : S, std::nullopt, f});
    many.push_back({"y", kDay + 1, N, std::nullopt, 0});
    const auto grouped = ensemble_folds(many);
    ASSERT_EQ(grouped.size(), 2u);
    EXPECT_EQ(grouped[0].predicted, B);
}

TEST(Majority, Examples) {
    const auto a = aggregate_majority(of_counts(5, 5, 10));
    EXPECT_EQ(a.signal, B);
    EXPECT_DOUBLE_EQ(a.confidence_raw, 0.5);
    EXPECT_EQ(a.total(), 20u);
    const auto tie = aggregate_majority(of_counts(7, 0, 7));
    EXPECT_EQ(tie.signal, N);
    EXPECT_EQ(tie.confidence_raw, 0.0);
    EXPECT_THROW(aggregate_majority(std::vector<Prediction>{}), DataError);
    auto two_days = of_counts(1, 1, 0);
    two_days[1].day = kDay + 1;
    EXPECT_THROW(aggregate_majority(two_days), DataError);
}

TEST(Majority, MatchesRecountOracleAndIgnoresDuplication) {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 200; ++trial) {
        const auto labels = random_labels(rng, trial == 0 ? 1000 : 1 + rng() % 40);
        std::array<std::size_t, 3> counts{};
        for (auto l : labels) ++counts[index_of(l)];
        const auto top = *std::max_element(counts.begin(), counts.end());
        TrendLabel want = N;
        if (std::count(counts.begin(), counts.end(), top) == 1) {
            want = static_cast<TrendLabel>(std::max_element(counts.begin(), counts.end()) - counts.begin());
        }
        const auto got = aggregate_majority(of_labels(labels));
        EXPECT_EQ(got.counts, counts);
        EXPECT_EQ(got.signal, want);
        EXPECT_DOUBLE_EQ(got.confidence_raw, static_cast<double>(counts[index_of(want)]) / labels.size());

        auto doubled = labels;
        doubled.insert(doubled.end(), labels.begin(), labels.end());
        const auto twice = aggregate_majority(of_labels(doubled));
        EXPECT_EQ(twice.signal, got.signal);
        EXPECT_DOUBLE_EQ(twice.confidence_raw, got.confidence_raw);
    }
}

TEST(Mean, Examples) {
    const auto a = aggregate_mean(of_labels({B, B, N}), {0.8, 1.5, std::nullopt});
    EXPECT_NEAR(a.mean_encoding, 5.0 / 3.0, 1e-15);
    EXPECT_EQ(a.signal, B);
    EXPECT_NEAR(a.confidence_raw, 1.0 / 6.0, 1e-12);
    const auto b = aggregate_mean(of_labels({S, N, B}), {0.8, 1.2, std::nullopt});
    EXPECT_EQ(b.mean_encoding, 1.0);
    EXPECT_EQ(b.signal, N);
    EXPECT_NEAR(b.confidence_raw, 0.2, 1e-12);
    EXPECT_THROW(aggregate_mean(of_labels({B}), {1.2, 0.8, std::nullopt}), ConfigError);
}

TEST(Mean, MatchesDirectDefinition) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    for (int trial = 0; trial < 500; ++trial) {
        const auto labels = random_labels(rng, 1 + rng() % 30);
        double lo = u(rng);
        double hi = u(rng);
        if (lo == hi) continue;
        if (lo > hi) std::swap(lo, hi);
        double sum = 0;
        for (auto l : labels) sum += encoding(l);
        const double d = sum / static_cast<double>(labels.size());
        const auto got = aggregate_mean(of_labels(labels), {lo, hi, std::nullopt});
        EXPECT_NEAR(got.mean_encoding, d, 1e-12);
        if (d < lo) {
            EXPECT_EQ(got.signal, S);
            EXPECT_NEAR(got.confidence_raw, lo - d, 1e-12);
        } else if (d > hi) {
            EXPECT_EQ(got.signal, B);
            EXPECT_NEAR(got.confidence_raw, d - hi, 1e-12);
        } else {
            EXPECT_EQ(got.signal, N);
            EXPECT_NEAR(got.confidence_raw, std::min(d - lo, hi - d), 1e-12);
        }
    }
}

TEST(Mean, AddingBullishNeverLowersTheMean) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 300; ++trial) {
        auto labels = random_labels(rng, 1 + rng() % 20);
        const double before = aggregate_mean(of_labels(labels), {}).mean_encoding;
        labels.push_back(B);
        EXPECT_GE(aggregate_mean(of_labels(labels), {}).mean_encoding, before);
        labels.pop_back();
        labels.push_back(S);
        EXPECT_LE(aggregate_mean(of_labels(labels), {}).mean_encoding, before);
    }
}

TEST(Aggregation, UnanimousDaysAgree) {
    for (auto l : {S, N, B}) {
        const auto preds = of_labels(std::vector<TrendLabel>(7, l));
        const auto maj = aggregate_majority(preds);
        const auto mean = aggregate_mean(preds, {0.8, 1.2, std::nullopt});
        EXPECT_EQ(maj.signal, l);
        EXPECT_EQ(mean.signal, l);
        EXPECT_EQ(maj.confidence_raw, 1.0);
    }
}

TEST(SignalSeries, DenseCalendarWithEmptyDays) {
    auto preds = of_counts(0, 0, 3);
    auto later = of_labels({S, S}, kDay + 3);
    preds.insert(preds.end(), later.begin(), later.end());
    const auto series = build_signal_series(preds, {kDay - 1, kDay + 4}, SignalMethod::majority);
    ASSERT_EQ(series.size(), 6u);
    EXPECT_TRUE(series[0].empty);
    EXPECT_EQ(series[0].signal, N);
    EXPECT_EQ(series[0].confidence, 0.0);
    EXPECT_EQ(series.at(kDay)->signal, B);
    EXPECT_TRUE(series.at(kDay + 1)->empty);
    EXPECT_EQ(series.at(kDay + 3)->signal, S);
    EXPECT_EQ(series.at(kDay + 9), nullptr);
    EXPECT_THROW(build_signal_series(preds, {kDay, kDay + 2}, SignalMethod::majority), DataError);
}

TEST(SignalSeries, ScheduledThresholdsApplyAfterTheirInterval) {
    const MeanThresholds chosen{1.05, 1.9, DayRange{kDay - 10, kDay}};
    const ThresholdSchedule schedule({0.8, 1.2, std::nullopt}, {chosen});
    EXPECT_EQ(schedule.thresholds_for(kDay).t_bullish, 1.2);
    EXPECT_EQ(schedule.thresholds_for(kDay + 1).t_bullish, 1.9);
    auto preds = of_counts(1, 1, 2);
    auto next = of_labels({S, N, B, B}, kDay + 1);
    preds.insert(preds.end(), next.begin(), next.end());
    const auto series = build_signal_series(preds, {kDay, kDay + 1}, SignalMethod::mean, schedule);
    EXPECT_EQ(series[0].signal, B);  // 1.25 > 1.2
    EXPECT_EQ(series[1].signal, N);  // 1.25 inside (1.05, 1.9)
}

TEST(Normalize, Examples) {
    std::vector<DailyAggregate> days(3);
    const double raws[] = {0.2, 0.8, 0.8};
    for (int i = 0; i < 3; ++i) {
        days[i].day = kDay + i;
        days[i].confidence_raw = raws[i];
    }
    const auto norm = normalize_confidence(SignalSeries(SignalMethod::majority, days), 180);
    EXPECT_EQ(norm[2].confidence, 1.0);
    EXPECT_EQ(norm[0].confidence, 0.5);  // no history yet

    for (auto& d : days) d.confidence_raw = 0.4;
    for (const auto& d : normalize_confidence(SignalSeries(SignalMethod::majority, days), 180).days()) {
        EXPECT_EQ(d.confidence, 0.5);
    }
    EXPECT_THROW(normalize_confidence(SignalSeries(SignalMethod::majority, days), 1), ConfigError);
}

TEST(Normalize, BoundedAffineInvariantAndPastOnly) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<DailyAggregate> days(400);
        for (std::size_t i = 0; i < days.size(); ++i) {
            days[i].day = kDay + static_cast<std::int32_t>(i);
            days[i].empty = u(rng) < 0.1;
            days[i].confidence_raw = days[i].empty ? 0.0 : u(rng);
        }
        const int window = 20 + trial * 10;
        const auto base = normalize_confidence(SignalSeries(SignalMethod::mean, days), window);
        for (const auto& d : base.days()) {
            EXPECT_GE(d.confidence, 0.0);
            EXPECT_LE(d.confidence, 1.0);
            if (d.empty) EXPECT_EQ(d.confidence, 0.0);
        }
        auto scaled = days;
        for (auto& d : scaled) d.confidence_raw = 3.0 * d.confidence_raw + 7.0;
        const auto affine = normalize_confidence(SignalSeries(SignalMethod::mean, scaled), window);
        for (std::size_t i = 0; i < days.size(); ++i) {
            EXPECT_NEAR(affine[i].confidence, base[i].confidence, 1e-9);
        }
        const std::size_t cut = 100 + rng() % 250;
        auto future = days;
        for (std::size_t i = cut; i < future.size(); ++i) future[i].confidence_raw = u(rng) * 50;
        const auto mutated = normalize_confidence(SignalSeries(SignalMethod::mean, future), window);
        for (std::size_t i = 0; i < cut; ++i) EXPECT_EQ(mutated[i].confidence, base[i].confidence);
    }
}

TEST(ThresholdGrid, PairsAreOrderedAndStrict) {
    const auto pairs = ThresholdGrid{}.pairs();
    EXPECT_EQ(pairs.size(), 17u * 16u / 2u);
    EXPECT_EQ(pairs.front(), std::make_pair(0.6, 0.65));
    EXPECT_EQ(pairs.back(), std::make_pair(1.35, 1.4));
    for (const auto& [a, b] : pairs) EXPECT_LT(a, b);
    EXPECT_THROW((ThresholdGrid{1.0, 0.5, 0.1}.pairs()), ConfigError);
}

namespace {

struct TrendFixture {
    PriceSeries prices;
    VolatilitySeries vols;
    std::vector<Prediction> predictions;
};

// One tweet per day that already knows the next day's label.
TrendFixture foresight_fixture(std::uint64_t seed) {
    GbmParams gbm;
    gbm.seed = seed;
    gbm.days = 400;
    gbm.drift = 0.5;
    TrendFixture f{gen_gbm(gbm), {}, {}};
    f.vols = ewma_volatility(log_returns(f.prices), {30, 30});
    const auto daily = daily_labels(label_series(f.prices, f.vols, {1, 1, 8, 2}));
    for (Day d = daily.first_day(); d < daily.last_day(); d = d + 1) {
        f.predictions.push_back({d.iso(), d, *daily.at(d + 1), std::nullopt, std::nullopt});
    }
    return f;
}

}  // namespace

TEST(MeanThresholds, SingletonGridAndReevaluation) {
    const auto f = foresight_fixture(4);
    MeanThresholdOptions options;
    options.grid = {0.9, 1.1, 0.2};
    const auto choices = optimize_mean_thresholds(f.predictions, f.prices, f.vols, options);
    ASSERT_FALSE(choices.empty());
    for (const auto& c : choices) {
        EXPECT_DOUBLE_EQ(c.thresholds.t_bearish, 0.9);
        EXPECT_DOUBLE_EQ(c.thresholds.t_bullish, 1.1);
        EXPECT_EQ(c.sharpe, *evaluate_threshold_pair(f.predictions, f.prices, *c.thresholds.valid,
                                                     c.thresholds, options.sharpe));
    }
}

TEST(MeanThresholds, PerfectSignalsStraddleNeutral) {
    for (std::uint64_t seed : {4u, 6u, 8u}) {
        const auto f = foresight_fixture(seed);
        const auto choices = optimize_mean_thresholds(f.predictions, f.prices, f.vols);
        ASSERT_FALSE(choices.empty());
        for (const auto& c : choices) {
            EXPECT_LT(c.thresholds.t_bearish, 1.0) << "seed " << seed;
            EXPECT_GT(c.thresholds.t_bullish, 1.0) << "seed " << seed;
            // independent re-evaluation over the whole grid
            double best = -1e300;
            for (const auto& [lo, hi] : ThresholdGrid{}.pairs()) {
                const auto s = evaluate_threshold_pair(f.predictions, f.prices, *c.thresholds.valid,
                                                       {lo, hi, std::nullopt}, SharpeParams{});
                if (s) best = std::max(best, *s);
            }
            EXPECT_EQ(c.sharpe, best);
        }
    }
}

TEST(PredictionsJsonl, RoundTrip) {
    std::vector<Prediction> preds{{"a", kDay, B, std::array<double, 3>{0.1, 0.2, 0.7}, 3},
                                  {"b", kDay + 1, S, std::nullopt, std::nullopt}};
    std::stringstream buf;
    write_predictions_jsonl(buf, preds);
    const auto back = read_predictions_jsonl(buf);
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[0].probs, preds[0].probs);
    EXPECT_EQ(back[0].fold, 3);
    EXPECT_FALSE(back[1].probs.has_value());
    std::istringstream bad(R"({"tweet_id":"a","day":"2020-01-01","class":"bullish","probs":[0.5,0.6,0.1]})");
    EXPECT_THROW(read_predictions_jsonl(bad), DataError);
}

TEST(SignalsCsv, RoundTrip) {
    auto preds = of_counts(2, 1, 4);
    const auto series = normalize_confidence(build_signal_series(preds, {kDay - 3, kDay + 2}, SignalMethod::majority), 5);
    std::stringstream buf;
    write_signals_csv(buf, series);
    const auto back = read_signals_csv(buf);
    ASSERT_EQ(back.size(), series.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        EXPECT_EQ(back[i].signal, series[i].signal);
        EXPECT_EQ(back[i].counts, series[i].counts);
        EXPECT_EQ(back[i].confidence, series[i].confidence);
        EXPECT_EQ(back[i].empty, series[i].empty);
    }
}
