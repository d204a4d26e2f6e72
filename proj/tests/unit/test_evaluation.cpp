#include "trendlab/errors.hpp"
#include "trendlab/evaluation.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace trendlab;

namespace {

constexpr auto B = TrendLabel::bullish;
constexpr auto N = TrendLabel::neutral;
constexpr auto S = TrendLabel::bearish;

// Hand tally: rows bearish [2,2,0], neutral [0,2,2], bullish [1,0,3].
const std::vector<TrendLabel> kTruth12{B, B, B, B, N, N, N, N, S, S, S, S};
const std::vector<TrendLabel> kPred12{B, B, B, S, N, N, B, B, S, N, N, S};

// 8 bullish, 7 bearish and 5 neutral truths.
const std::vector<TrendLabel> kTruth20{B, B, B, B, B, B, B, B, S, S, S, S, S, S, S, N, N, N, N, N};
const std::vector<TrendLabel> kPred20{B, B, B, B, B, S, S, N, S, S, S, S, B, N, N, B, B, S, N, N};

}  // namespace

TEST(Confusion, HandTalliedTwelveSamples) {
    const auto cm = confusion(kTruth12, kPred12);
    const ConfusionMatrix want{{{{2, 2, 0}, {0, 2, 2}, {1, 0, 3}}}};
    EXPECT_EQ(cm, want);
    EXPECT_EQ(cm.total(), 12u);
    EXPECT_EQ(cm.trace(), 7u);
    EXPECT_EQ(cm.column_sum(B), 5u);
    EXPECT_EQ(cm.row_sum(S), 4u);
}

TEST(Confusion, DegenerateShapes) {
    const std::vector<TrendLabel> truth{S, N, B, S, N, B};
    const auto perfect = confusion(truth, truth);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) EXPECT_EQ(perfect.counts[r][c], r == c ? 2u : 0u);
    const auto flat = confusion(truth, std::vector<TrendLabel>(6, N));
    EXPECT_EQ(flat.column_sum(N), 6u);
    EXPECT_EQ(flat.column_sum(B) + flat.column_sum(S), 0u);
    EXPECT_THROW(confusion(truth, std::vector<TrendLabel>(5, N)), DataError);
    EXPECT_THROW(confusion(std::vector<TrendLabel>{}, std::vector<TrendLabel>{}), DataError);
}

TEST(Confusion, KeyedJoin) {
    const std::vector<std::pair<std::string, TrendLabel>> truth{{"a", B}, {"b", S}, {"c", N}};
    const std::vector<std::pair<std::string, TrendLabel>> pred{{"c", N}, {"a", S}, {"b", S}};
    const auto cm = confusion(truth, pred);
    EXPECT_EQ(cm(B, S), 1u);
    EXPECT_EQ(cm(S, S), 1u);
    EXPECT_EQ(cm(N, N), 1u);
    const std::vector<std::pair<std::string, TrendLabel>> stray{{"a", B}, {"b", S}, {"z", N}};
    EXPECT_THROW(confusion(truth, stray), DataError);
}

TEST(Ovr, HandComputedMacroScores) {
    const auto m = ovr_metrics(confusion(kTruth12, kPred12));
    EXPECT_NEAR(m.accuracy, 7.0 / 12.0, 1e-15);
    EXPECT_NEAR(m.precision, 53.0 / 90.0, 1e-15);
    EXPECT_NEAR(m.recall, 7.0 / 12.0, 1e-15);
    // per-class F1 4/7, 1/2, 2/3
    EXPECT_NEAR(m.f1, 73.0 / 126.0, 1e-15);
    EXPECT_FALSE(m.degenerate);
    EXPECT_EQ(m.mode, MetricMode::ovr);
}

TEST(Ovr, PerfectAndDegenerate) {
    const std::vector<TrendLabel> truth{S, N, B, B};
    const auto perfect = ovr_metrics(confusion(truth, truth));
    EXPECT_EQ(perfect.accuracy, 1.0);
    EXPECT_EQ(perfect.precision, 1.0);
    EXPECT_EQ(perfect.recall, 1.0);
    EXPECT_EQ(perfect.f1, 1.0);
    const auto flat = ovr_metrics(confusion(truth, std::vector<TrendLabel>(4, N)));
    EXPECT_TRUE(flat.degenerate);
    EXPECT_NEAR(flat.accuracy, 0.25, 1e-15);
}

TEST(Ovr, UniformGuessingScoresOneThird) {
    std::mt19937_64 rng(2024);
    std::vector<TrendLabel> truth;
    std::vector<TrendLabel> pred;
    for (int i = 0; i < 100000; ++i) {
        truth.push_back(static_cast<TrendLabel>(i % 3));
        pred.push_back(static_cast<TrendLabel>(rng() % 3));
    }
    EXPECT_NEAR(ovr_metrics(confusion(truth, pred)).accuracy, 1.0 / 3.0, 0.02);
}

TEST(Ovo, HandComputedTwentySamples) {
    const auto bull = ovo_metrics(kTruth20, kPred20, B);
    const auto bear = ovo_metrics(kTruth20, kPred20, S);
    EXPECT_NEAR(bull.accuracy, 0.6, 1e-15);
    EXPECT_EQ(bull.accuracy, bear.accuracy);
    EXPECT_NEAR(bull.precision, 5.0 / 6.0, 1e-15);
    EXPECT_NEAR(bull.recall, 5.0 / 8.0, 1e-15);
    EXPECT_NEAR(bull.f1, 5.0 / 7.0, 1e-15);
    EXPECT_NEAR(bear.precision, 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(bear.recall, 4.0 / 7.0, 1e-15);
    EXPECT_NEAR(bear.f1, 8.0 / 13.0, 1e-15);
    EXPECT_EQ(bull.support, 8u);
    EXPECT_EQ(bear.support, 7u);
    EXPECT_EQ(bull.mode, MetricMode::ovo_bullish);
}

TEST(Ovo, Examples) {
    const std::vector<TrendLabel> pair{B, S};
    EXPECT_EQ(ovo_metrics(pair, pair, B).accuracy, 1.0);
    EXPECT_EQ(ovo_metrics(pair, pair, S).accuracy, 1.0);
    const auto neutral = ovo_metrics(pair, std::vector<TrendLabel>{N, N}, B);
    EXPECT_EQ(neutral.accuracy, 0.0);
    EXPECT_EQ(neutral.recall, 0.0);
    EXPECT_TRUE(neutral.degenerate);
    const std::vector<TrendLabel> only_neutral{N, N};
    EXPECT_THROW(ovo_metrics(only_neutral, only_neutral, B), DataError);
    EXPECT_THROW(ovo_metrics(pair, pair, N), ConfigError);
}

TEST(Metrics, PermutationInvariantAndSharedOvoAccuracy) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<TrendLabel> truth;
        std::vector<TrendLabel> pred;
        const std::size_t n = 3 + rng() % 60;
        for (std::size_t i = 0; i < n; ++i) {
            truth.push_back(static_cast<TrendLabel>(rng() % 3));
            pred.push_back(static_cast<TrendLabel>(rng() % 3));
        }
        truth[0] = B;
        const auto base = ovr_metrics(confusion(truth, pred));
        std::size_t matches = 0;
        for (std::size_t i = 0; i < n; ++i) matches += truth[i] == pred[i];
        EXPECT_DOUBLE_EQ(base.accuracy, static_cast<double>(matches) / static_cast<double>(n));
        const auto ovo_b = ovo_metrics(truth, pred, B);
        EXPECT_EQ(ovo_b.accuracy, ovo_metrics(truth, pred, S).accuracy);

        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        std::shuffle(order.begin(), order.end(), rng);
        std::vector<TrendLabel> t2;
        std::vector<TrendLabel> p2;
        for (auto i : order) {
            t2.push_back(truth[i]);
            p2.push_back(pred[i]);
        }
        const auto shuffled = ovr_metrics(confusion(t2, p2));
        EXPECT_EQ(shuffled.accuracy, base.accuracy);
        EXPECT_EQ(shuffled.precision, base.precision);
        EXPECT_EQ(shuffled.recall, base.recall);
        EXPECT_EQ(shuffled.f1, base.f1);
        const auto ovo_shuffled = ovo_metrics(t2, p2, B);
        EXPECT_EQ(ovo_shuffled.precision, ovo_b.precision);
        EXPECT_EQ(ovo_shuffled.recall, ovo_b.recall);
    }
}

TEST(CrossEntropy, Examples) {
    const std::vector<TrendLabel> truth{S, N, B};
    const std::vector<std::array<double, 3>> uniform(3, {1.0 / 3, 1.0 / 3, 1.0 / 3});
    EXPECT_NEAR(cross_entropy(uniform, truth), std::log(3.0), 1e-12);
    const std::vector<std::array<double, 3>> onehot{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    EXPECT_EQ(cross_entropy(onehot, truth), 0.0);

    const std::vector<std::array<double, 3>> mixed{{0.7, 0.2, 0.1}, {0.1, 0.3, 0.6}, {0, 0, 1}, {1, 0, 0}};
    const std::vector<TrendLabel> mixed_truth{S, N, B, B};
    // last sample puts zero mass on the truth and hits the 1e-12 floor
    EXPECT_NEAR(cross_entropy(mixed, mixed_truth), 7.297917216048304, 1e-12);
    EXPECT_THROW(cross_entropy(mixed, truth), DataError);
}

TEST(CrossEntropy, NonNegativeAndZeroOnlyWhenConfidentlyRight) {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::array<double, 3>> probs;
        std::vector<TrendLabel> truth;
        for (int i = 0; i < 10; ++i) {
            std::array<double, 3> p{u(rng), u(rng), u(rng)};
            const double sum = p[0] + p[1] + p[2];
            for (auto& v : p) v /= sum;
            probs.push_back(p);
            truth.push_back(static_cast<TrendLabel>(rng() % 3));
        }
        EXPECT_GT(cross_entropy(probs, truth), 0.0);
    }
}

TEST(MetricsJson, FieldOrder) {
    const auto m = ovr_metrics(confusion(kTruth12, kPred12));
    const auto json = metrics_to_json(m, 0.5);
    EXPECT_EQ(json.find("{\"mode\":\"OVR\",\"accuracy\":"), 0u) << json;
    EXPECT_NE(json.find("\"cross_entropy\":0.5"), std::string::npos);
}
