#pragma once

#include "trendlab/calendar.hpp"
#include "trendlab/labeling.hpp"
#include "trendlab/market_data.hpp"
#include "trendlab/trend.hpp"

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <regex>
#include <span>
#include <string>
#include <vector>

namespace trendlab {

struct RawTweet {
    std::string id;
    Day day;
    std::string text;
};

struct CleanTweet {
    std::string id;
    Day day;
    std::string normalized_text;
    std::vector<std::string> hashtags;
    std::vector<std::string> emojis;
    bool dropped = false;
    std::string drop_rule;  // empty unless dropped
};

struct FilterRule {
    std::string id;
    std::string pattern;  // ECMAScript regex, matched case-insensitively
};

/// Promotional/advertisement filter. Rules are tried in insertion order.
class FilterRuleset {
public:
    FilterRuleset() = default;

    static FilterRuleset defaults();

    void add(FilterRule rule);
    /// Id of the first matching rule.
    std::optional<std::string> match(const std::string& text) const;
    std::span<const FilterRule> rules() const { return rules_; }

private:
    std::vector<FilterRule> rules_;
    std::vector<std::regex> compiled_;
};

/// Lowercase, strip URLs, mentions, hashtags, emojis and punctuation, and fold common
/// crypto-vocabulary inflections to a base form. Hashtags and emojis are extracted first.
CleanTweet preprocess_tweet(const RawTweet& raw, const FilterRuleset& rules);

struct PromptContext {
    Day day;
    TrendLabel previous_label = TrendLabel::neutral;
    TrendTerm roc_term = TrendLabel::neutral;
    TrendTerm rsi_term = TrendLabel::neutral;
};

/// Market context known before `day` opens: the label of the latest window closed before
/// `day`, and indicator terms from day-1. Throws NoContextError if either is missing.
PromptContext build_context(Day day, const LabelSeries& labels, const IndicatorSeries& roc,
                            const IndicatorSeries& rsi, const IndicatorThresholds& roc_thresholds,
                            const IndicatorThresholds& rsi_thresholds);

/// CUA: tweet only. CA: market context. TCA: date plus market context.
enum class PromptMode { cua, ca, tca };

std::string_view to_string(PromptMode mode);
PromptMode parse_prompt_mode(std::string_view text);

struct PromptRecord {
    std::string id;
    Day day;
    PromptMode mode = PromptMode::ca;
    std::string prompt_text;
    TrendLabel label = TrendLabel::neutral;

    friend bool operator==(const PromptRecord&, const PromptRecord&) = default;
};

/// "Date: 2020, January, 01, "
std::string render_date(Day day);

PromptRecord render_prompt(const std::optional<PromptContext>& context, const CleanTweet& tweet,
                           PromptMode mode, TrendLabel label);

std::size_t export_dataset(std::span<const PromptRecord> records, const std::filesystem::path& path);
void write_dataset(std::ostream& out, std::span<const PromptRecord> records);
std::vector<PromptRecord> import_dataset(std::istream& in);
std::vector<PromptRecord> import_dataset(const std::filesystem::path& path);

std::vector<RawTweet> read_tweets_jsonl(std::istream& in);
void write_tweets_jsonl(std::ostream& out, std::span<const RawTweet> tweets);

struct PromptBuildOptions {
    PromptMode mode = PromptMode::ca;
    int rsi_period = 14;
    IndicatorThresholds rsi_thresholds = kRsiThresholds;
    int roc_period = 8;
    int roc_window = 180;
    double roc_k = 1.0;
    int interval_months = 6;
};

struct PromptBuildResult {
    std::vector<PromptRecord> records;
    std::size_t dropped = 0;     // filtered by preprocessing
    std::size_t unlabeled = 0;   // day outside the labeled range
    std::size_t no_context = 0;  // no prior window, indicator or ROC threshold history
};

/// Preprocess, join each tweet with its day's label and context, and render. ROC thresholds
/// are re-estimated per calendar block from the returns before the block starts.
PromptBuildResult build_prompt_dataset(std::span<const RawTweet> tweets, const PriceSeries& prices,
                                       const LabelSeries& labels, const FilterRuleset& rules,
                                       const PromptBuildOptions& options);

}  // namespace trendlab
