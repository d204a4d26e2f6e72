#include "trendlab/synthetic.hpp"

#include "trendlab/errors.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

namespace trendlab {

namespace {

constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::mt19937_64 day_stream(std::uint64_t seed, std::uint64_t index) {
    return std::mt19937_64(substream_seed(seed, index));
}

TrendLabel other_label(TrendLabel truth, std::mt19937_64& rng, ErrorModel model) {
    if (model == ErrorModel::neutral_biased && truth != TrendLabel::neutral) {
        if (uniform01(rng) < 0.8) return TrendLabel::neutral;
        return truth == TrendLabel::bullish ? TrendLabel::bearish : TrendLabel::bullish;
    }
    std::array<TrendLabel, 2> others{};
    std::size_t n = 0;
    for (auto label : kAllLabels) {
        if (label != truth) others[n++] = label;
    }
    return others[uniform01(rng) < 0.5 ? 0 : 1];
}

}  // namespace

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) {
    return mix64(seed + kGoldenGamma * (index + 1));
}

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double standard_normal(std::mt19937_64& rng) {
    double u1 = 0.0;
    while (u1 == 0.0) u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void GbmParams::validate() const {
    if (days < 2) throw ConfigError(fmt::format("synthetic series needs >= 2 days, got {}", days));
    if (!(volatility >= 0.0) || !std::isfinite(volatility)) {
        throw ConfigError(fmt::format("volatility must be finite and >= 0, got {}", volatility));
    }
    if (!std::isfinite(drift)) throw ConfigError("drift must be finite");
    if (!(start_price > 0.0) || !std::isfinite(start_price)) {
        throw ConfigError(fmt::format("start price must be > 0, got {}", start_price));
    }
}

PriceSeries gen_gbm(const GbmParams& params) {
    params.validate();
    const double mu = params.drift / 365.0;
    const double sd = params.volatility / std::sqrt(365.0);
    std::vector<Candle> candles;
    candles.reserve(static_cast<std::size_t>(params.days));
    double close = params.start_price;
    for (int i = 0; i < params.days; ++i) {
        auto rng = day_stream(params.seed, static_cast<std::uint64_t>(i));
        const double z = standard_normal(rng);
        const double r = i == 0 ? 0.0 : mu + sd * z;
        const double open = close;
        close = open * std::exp(r);
        Candle c;
        c.day = params.start_day + i;
        c.open = open;
        c.close = close;
        c.high = std::max(open, close) * std::exp(std::abs(r) / 2.0);
        c.low = std::min(open, close) * std::exp(-std::abs(r) / 2.0);
        c.volume = 1.0e6 * (0.5 + uniform01(rng));
        candles.push_back(c);
    }
    return PriceSeries(std::move(candles));
}

std::string_view to_string(ErrorModel model) {
    return model == ErrorModel::uniform ? "uniform" : "neutral_biased";
}

ErrorModel parse_error_model(std::string_view text) {
    if (text == "uniform") return ErrorModel::uniform;
    if (text == "neutral_biased") return ErrorModel::neutral_biased;
    throw ConfigError(fmt::format("unknown error model '{}' (uniform|neutral_biased)", text));
}

void SyntheticClassifierParams::validate() const {
    if (!(accuracy >= 1.0 / 3.0 && accuracy <= 1.0)) {
        throw ConfigError(fmt::format("synthetic accuracy must lie in [1/3, 1], got {}", accuracy));
    }
    if (tweets_per_day < 0) {
        throw ConfigError(fmt::format("tweets per day must be >= 0, got {}", tweets_per_day));
    }
}

std::string synthetic_tweet_id(Day day, int k) { return fmt::format("syn-{}-{}", day.iso(), k); }

std::vector<Prediction> gen_predictions(const DailyLabels& labels,
                                        const SyntheticClassifierParams& params) {
    params.validate();
    std::vector<Prediction> out;
    out.reserve(labels.size() * static_cast<std::size_t>(params.tweets_per_day));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const Day day = labels.first_day() + static_cast<std::int32_t>(i);
        const TrendLabel truth = labels.labels()[i];
        auto rng = day_stream(params.seed, static_cast<std::uint64_t>(day.serial()));
        for (int k = 0; k < params.tweets_per_day; ++k) {
            Prediction p;
            p.tweet_id = synthetic_tweet_id(day, k);
            p.day = day;
            p.predicted = uniform01(rng) < params.accuracy ? truth
                                                            : other_label(truth, rng, params.error_model);
            const double q = 0.4 + 0.5 * uniform01(rng);
            std::array<double, 3> probs{};
            probs.fill((1.0 - q) / 2.0);
            probs[index_of(p.predicted)] = q;
            p.probs = probs;
            out.push_back(std::move(p));
        }
    }
    return out;
}

std::vector<RawTweet> gen_tweets(DayRange range, int tweets_per_day, std::uint64_t seed) {
    if (tweets_per_day < 0) {
        throw ConfigError(fmt::format("tweets per day must be >= 0, got {}", tweets_per_day));
    }
    static constexpr std::array<std::string_view, 12> kTemplates{
        "Bitcoin is on the rise! #BTC",
        "$BTC looking heavy today, might dump further",
        "Just bought more bitcoin, HODLing for the long run \xF0\x9F\x9A\x80",
        "Is anyone else worried about the crypto market? https://example.com/news",
        "@trader42 what do you think about BTC at these levels?",
        "Bitcoin price moving sideways again #crypto #bitcoin",
        "Sold my coins, the bears are in control",
        "Mining difficulty adjusted, network looks healthy",
        "Whales are accumulating bitcoins, bullish signal",
        "FREE giveaway! Retweet to win 1 BTC, click the link",
        "Crypto winter is coming, be careful out there \xE2\x9D\x84\xEF\xB8\x8F",
        "New all time high soon? Bitcoin's momentum is strong",
    };
    std::vector<RawTweet> out;
    for (Day day = range.first; day <= range.last; day = day + 1) {
        auto rng = day_stream(seed, static_cast<std::uint64_t>(day.serial()));
        for (int k = 0; k < tweets_per_day; ++k) {
            const auto pick = static_cast<std::size_t>(uniform01(rng) * kTemplates.size());
            out.push_back({synthetic_tweet_id(day, k), day, std::string(kTemplates[pick])});
        }
    }
    return out;
}

}  // namespace trendlab
