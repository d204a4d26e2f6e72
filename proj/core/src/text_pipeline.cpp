#include "trendlab/text_pipeline.hpp"

#include "trendlab/errors.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include <fmt/format.h>
#include <json.hpp>

namespace trendlab {

namespace {

using ordered_json = nlohmann::ordered_json;

struct CodePoint {
    char32_t value;
    std::size_t length;
};

CodePoint decode_utf8(std::string_view s, std::size_t pos) {
    const auto b0 = static_cast<unsigned char>(s[pos]);
    auto cont = [&](std::size_t k) -> int {
        if (pos + k >= s.size()) return -1;
        const auto b = static_cast<unsigned char>(s[pos + k]);
        return (b & 0xC0) == 0x80 ? (b & 0x3F) : -1;
    };
    if (b0 < 0x80) return {b0, 1};
    std::size_t len = 0;
    char32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
    } else {
        return {0xFFFD, 1};
    }
    for (std::size_t k = 1; k < len; ++k) {
        const int c = cont(k);
        if (c < 0) return {0xFFFD, 1};
        cp = (cp << 6) | static_cast<char32_t>(c);
    }
    return {cp, len};
}

// Joiners, variation selectors and skin-tone modifiers are glue, not emojis of their own.
bool is_emoji_glue(char32_t cp) {
    return cp == 0x200D || cp == 0xFE0F || cp == 0xFE0E || (cp >= 0x1F3FB && cp <= 0x1F3FF);
}

bool is_emoji(char32_t cp) {
    return (cp >= 0x1F000 && cp <= 0x1FAFF) || (cp >= 0x2600 && cp <= 0x27BF) ||
           (cp >= 0x2300 && cp <= 0x23FF) || (cp >= 0x2B00 && cp <= 0x2BFF) || cp == 0x3030 ||
           cp == 0x303D || cp == 0x3297 || cp == 0x3299;
}

const std::regex& hashtag_pattern() {
    static const std::regex re(R"(#\w+)");
    return re;
}

const std::regex& url_pattern() {
    static const std::regex re(R"((https?://|www\.)\S+)", std::regex::icase);
    return re;
}

const std::regex& mention_pattern() {
    static const std::regex re(R"(@\w+)");
    return re;
}

void ascii_lower(std::string& s) {
    for (char& c : s) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
}

// Closed vocabulary: inflections fold to a base form. No value appears as a key,
// so folding is idempotent.
const std::unordered_map<std::string_view, std::string_view>& vocabulary() {
    static const std::unordered_map<std::string_view, std::string_view> map{
        {"bitcoins", "bitcoin"},        {"btcs", "btc"},
        {"cryptos", "crypto"},          {"cryptocurrencies", "cryptocurrency"},
        {"coins", "coin"},              {"tokens", "token"},
        {"hodling", "hodl"},            {"hodled", "hodl"},
        {"hodler", "hodl"},             {"hodlers", "hodl"},
        {"hodlin", "hodl"},             {"mining", "mine"},
        {"mined", "mine"},              {"miners", "miner"},
        {"pumps", "pump"},              {"pumping", "pump"},
        {"pumped", "pump"},             {"dumps", "dump"},
        {"dumping", "dump"},            {"dumped", "dump"},
        {"bulls", "bull"},              {"bears", "bear"},
        {"rallies", "rally"},           {"rallying", "rally"},
        {"rallied", "rally"},           {"crashes", "crash"},
        {"crashing", "crash"},          {"crashed", "crash"},
        {"trading", "trade"},           {"traded", "trade"},
        {"trades", "trade"},            {"traders", "trader"},
        {"buying", "buy"},              {"bought", "buy"},
        {"buys", "buy"},                {"selling", "sell"},
        {"sold", "sell"},               {"sells", "sell"},
        {"rising", "rise"},             {"rises", "rise"},
        {"rose", "rise"},               {"falling", "fall"},
        {"falls", "fall"},              {"fell", "fall"},
        {"dipping", "dip"},             {"dips", "dip"},
        {"dipped", "dip"},              {"whales", "whale"},
        {"exchanges", "exchange"},      {"wallets", "wallet"},
        {"investors", "investor"},      {"investing", "invest"},
        {"invested", "invest"},         {"prices", "price"},
        {"gains", "gain"},              {"losses", "loss"},
        {"candles", "candle"},          {"halvings", "halving"},
    };
    return map;
}

std::string fold_and_collapse(std::string_view text) {
    std::string out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && text[i] == ' ') ++i;
        const std::size_t start = i;
        while (i < text.size() && text[i] != ' ') ++i;
        if (i == start) break;
        const std::string_view token = text.substr(start, i - start);
        const auto& vocab = vocabulary();
        const auto it = vocab.find(token);
        if (!out.empty()) out.push_back(' ');
        out.append(it == vocab.end() ? token : it->second);
    }
    return out;
}

Day parse_timestamp(const std::string& ts) {
    if (ts.size() > 10 && (ts[10] == 'T' || ts[10] == ' ')) {
        return Day::parse(std::string_view(ts).substr(0, 10));
    }
    return Day::parse(ts);
}

PromptRecord record_from_json(const ordered_json& j) {
    PromptRecord r;
    r.id = j.at("id").get<std::string>();
    r.day = Day::parse(j.at("day").get<std::string>());
    r.mode = parse_prompt_mode(j.at("mode").get<std::string>());
    r.prompt_text = j.at("prompt").get<std::string>();
    r.label = parse_trend_label(j.at("label").get<std::string>());
    return r;
}

}  // namespace

FilterRuleset FilterRuleset::defaults() {
    FilterRuleset rules;
    rules.add({"promo-giveaway", R"(\b(giveaways?|airdrops?)\b)"});
    rules.add({"promo-retweet-to-win", R"(\b(retweet|rt)\b.{0,40}\bwin\b)"});
    rules.add({"promo-referral", R"(\b(referral|promo code|sign ?up bonus|use my code)\b)"});
    rules.add({"promo-join-group", R"(\bjoin (our|my) (telegram|discord|group|channel)\b)"});
    rules.add({"promo-click-link", R"(\bclick (the |this )?link\b)"});
    return rules;
}

void FilterRuleset::add(FilterRule rule) {
    if (rule.id.empty()) throw ConfigError("filter rule id must not be empty");
    try {
        compiled_.emplace_back(rule.pattern, std::regex::ECMAScript | std::regex::icase);
    } catch (const std::regex_error& e) {
        throw ConfigError(fmt::format("filter rule '{}' has an invalid pattern: {}", rule.id, e.what()));
    }
    rules_.push_back(std::move(rule));
}

std::optional<std::string> FilterRuleset::match(const std::string& text) const {
    for (std::size_t i = 0; i < rules_.size(); ++i) {
        if (std::regex_search(text, compiled_[i])) return rules_[i].id;
    }
    return std::nullopt;
}

CleanTweet preprocess_tweet(const RawTweet& raw, const FilterRuleset& rules) {
    if (raw.text.empty()) {
        throw DataError(fmt::format("tweet {} has empty text", raw.id));
    }
    CleanTweet clean;
    clean.id = raw.id;
    clean.day = raw.day;

    for (auto it = std::sregex_iterator(raw.text.begin(), raw.text.end(), hashtag_pattern());
         it != std::sregex_iterator(); ++it) {
        std::string tag = it->str();
        ascii_lower(tag);
        clean.hashtags.push_back(std::move(tag));
    }

    // Emojis, glue code points and malformed UTF-8 bytes go; everything else is copied through.
    // Stray bytes must not survive, or stripping punctuation later could splice them into a
    // new code point.
    std::string text;
    text.reserve(raw.text.size());
    for (std::size_t pos = 0; pos < raw.text.size();) {
        const auto cp = decode_utf8(raw.text, pos);
        if (cp.value == 0xFFFD && cp.length == 1) {
            text.push_back(' ');
        } else if (is_emoji(cp.value)) {
            clean.emojis.push_back(raw.text.substr(pos, cp.length));
            text.push_back(' ');
        } else if (is_emoji_glue(cp.value)) {
            text.push_back(' ');
        } else {
            text.append(raw.text, pos, cp.length);
        }
        pos += cp.length;
    }

    if (auto rule = rules.match(raw.text)) {
        clean.dropped = true;
        clean.drop_rule = *rule;
    }

    ascii_lower(text);
    text = std::regex_replace(text, url_pattern(), " ");
    text = std::regex_replace(text, mention_pattern(), " ");
    text = std::regex_replace(text, hashtag_pattern(), " ");

    std::string stripped;
    stripped.reserve(text.size());
    for (std::size_t pos = 0; pos < text.size();) {
        const auto cp = decode_utf8(text, pos);
        if (cp.value == '\'' || cp.value == 0x2019) {
            // apostrophes join: "bitcoin's" -> "bitcoins"
        } else if (cp.value < 0x80 && (std::ispunct(static_cast<unsigned char>(cp.value)) ||
                                       std::isspace(static_cast<unsigned char>(cp.value)))) {
            stripped.push_back(' ');
        } else {
            stripped.append(text, pos, cp.length);
        }
        pos += cp.length;
    }
    clean.normalized_text = fold_and_collapse(stripped);

    if (!clean.dropped && clean.normalized_text.empty()) {
        clean.dropped = true;
        clean.drop_rule = "empty";
    }
    return clean;
}

PromptContext build_context(Day day, const LabelSeries& labels, const IndicatorSeries& roc,
                            const IndicatorSeries& rsi, const IndicatorThresholds& roc_thresholds,
                            const IndicatorThresholds& rsi_thresholds) {
    const BarrierWindow* previous = labels.latest_closed_before(day);
    if (previous == nullptr) {
        throw NoContextError(fmt::format("{}: no labeled window closed before this day", day.iso()));
    }
    const auto roc_value = roc.at(day - 1);
    const auto rsi_value = rsi.at(day - 1);
    if (!roc_value || !rsi_value) {
        throw NoContextError(fmt::format("{}: indicators undefined on the previous day", day.iso()));
    }
    PromptContext ctx;
    ctx.day = day;
    ctx.previous_label = previous->label;
    ctx.roc_term = discretize_indicator(*roc_value, IndicatorKind::roc, roc_thresholds);
    ctx.rsi_term = discretize_indicator(*rsi_value, IndicatorKind::rsi, rsi_thresholds);
    return ctx;
}

std::string_view to_string(PromptMode mode) {
    switch (mode) {
        case PromptMode::cua:
            return "CUA";
        case PromptMode::ca:
            return "CA";
        case PromptMode::tca:
            return "TCA";
    }
    throw InvariantError("unknown PromptMode");
}

PromptMode parse_prompt_mode(std::string_view text) {
    std::string upper(text);
    for (char& c : upper) {
        if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
    }
    for (auto mode : {PromptMode::cua, PromptMode::ca, PromptMode::tca}) {
        if (upper == to_string(mode)) return mode;
    }
    throw ConfigError(fmt::format("unknown prompt mode '{}' (CUA|CA|TCA)", text));
}

std::string render_date(Day day) {
    return fmt::format("Date: {}, {}, {:02}, ", day.year(), month_name(day.month()), day.day_of_month());
}

PromptRecord render_prompt(const std::optional<PromptContext>& context, const CleanTweet& tweet,
                           PromptMode mode, TrendLabel label) {
    if (tweet.dropped) {
        throw DataError(fmt::format("tweet {} was dropped ({}) and cannot be rendered", tweet.id,
                                    tweet.drop_rule));
    }
    PromptRecord r;
    r.id = tweet.id;
    r.day = tweet.day;
    r.mode = mode;
    r.label = label;
    if (mode == PromptMode::cua) {
        r.prompt_text = tweet.normalized_text;
        return r;
    }
    if (!context) {
        throw ConfigError(fmt::format("{} prompts need market context", to_string(mode)));
    }
    if (context->day != tweet.day) {
        throw DataError(fmt::format("context day {} does not match tweet day {}", context->day.iso(),
                                    tweet.day.iso()));
    }
    r.prompt_text = fmt::format("Previous Label: {}, ROC: {}, RSI: {}, Tweet: {}",
                                to_string(context->previous_label), to_string(context->roc_term),
                                to_string(context->rsi_term), tweet.normalized_text);
    if (mode == PromptMode::tca) r.prompt_text = render_date(tweet.day) + r.prompt_text;
    return r;
}

void write_dataset(std::ostream& out, std::span<const PromptRecord> records) {
    for (const auto& r : records) {
        ordered_json j;
        j["id"] = r.id;
        j["day"] = r.day.iso();
        j["mode"] = to_string(r.mode);
        j["prompt"] = r.prompt_text;
        j["label"] = to_string(r.label);
        out << j.dump() << '\n';
    }
}

std::size_t export_dataset(std::span<const PromptRecord> records, const std::filesystem::path& path) {
    if (records.empty()) {
        throw DataError("refusing to export an empty prompt dataset");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError(fmt::format("cannot write {}", path.string()));
    write_dataset(out, records);
    out.flush();
    if (!out) throw DataError(fmt::format("write failed for {}", path.string()));
    return records.size();
}

std::vector<PromptRecord> import_dataset(std::istream& in) {
    std::vector<PromptRecord> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        try {
            out.push_back(record_from_json(ordered_json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw DataError(fmt::format("prompt dataset line {}: {}", line_no, e.what()));
        } catch (const std::runtime_error& e) {
            throw DataError(fmt::format("prompt dataset line {}: {}", line_no, e.what()));
        }
    }
    return out;
}

std::vector<PromptRecord> import_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(fmt::format("cannot read {}", path.string()));
    return import_dataset(in);
}

std::vector<RawTweet> read_tweets_jsonl(std::istream& in) {
    std::vector<RawTweet> out;
    std::set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        RawTweet t;
        try {
            const auto j = ordered_json::parse(line);
            t.id = j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump();
            t.day = parse_timestamp(j.at("timestamp").get<std::string>());
            t.text = j.at("text").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw DataError(fmt::format("tweets line {}: {}", line_no, e.what()));
        } catch (const std::runtime_error& e) {
            throw DataError(fmt::format("tweets line {}: {}", line_no, e.what()));
        }
        if (t.text.empty()) throw DataError(fmt::format("tweets line {}: empty text", line_no));
        if (!seen.insert(t.id).second) {
            throw DataError(fmt::format("tweets line {}: duplicate id {}", line_no, t.id));
        }
        out.push_back(std::move(t));
    }
    return out;
}

void write_tweets_jsonl(std::ostream& out, std::span<const RawTweet> tweets) {
    for (const auto& t : tweets) {
        ordered_json j;
        j["id"] = t.id;
        j["timestamp"] = t.day.iso();
        j["text"] = t.text;
        out << j.dump() << '\n';
    }
}

PromptBuildResult build_prompt_dataset(std::span<const RawTweet> tweets, const PriceSeries& prices,
                                       const LabelSeries& labels, const FilterRuleset& rules,
                                       const PromptBuildOptions& options) {
    PromptBuildResult result;
    const DailyLabels daily = daily_labels(labels);
    const bool needs_context = options.mode != PromptMode::cua;

    IndicatorSeries rsi_series;
    IndicatorSeries roc_series;
    ReturnSeries returns;
    if (needs_context) {
        rsi_series = rsi(prices, options.rsi_period);
        roc_series = roc(prices, options.roc_period);
        returns = log_returns(prices);
    }
    std::map<std::int32_t, std::optional<IndicatorThresholds>> roc_cache;
    auto roc_thresholds_for = [&](Day day) -> std::optional<IndicatorThresholds> {
        const DayRange block = calendar_block(day, options.interval_months);
        auto [it, inserted] = roc_cache.try_emplace(block.first.serial());
        if (inserted) {
            try {
                it->second = roc_thresholds(returns.up_to(block.first - 1), options.roc_window,
                                            options.roc_k, options.roc_period);
            } catch (const DataError&) {
                it->second = std::nullopt;
            }
        }
        return it->second;
    };

    std::set<std::string> seen;
    for (const auto& tweet : tweets) {
        if (!seen.insert(tweet.id).second) {
            throw DataError(fmt::format("duplicate tweet id {}", tweet.id));
        }
        const CleanTweet clean = preprocess_tweet(tweet, rules);
        if (clean.dropped) {
            ++result.dropped;
            continue;
        }
        const auto label = daily.empty() ? std::nullopt : daily.at(clean.day);
        if (!label) {
            ++result.unlabeled;
            continue;
        }
        std::optional<PromptContext> ctx;
        if (needs_context) {
            const auto roc_th = roc_thresholds_for(clean.day);
            if (!roc_th) {
                ++result.no_context;
                continue;
            }
            try {
                ctx = build_context(clean.day, labels, roc_series, rsi_series, *roc_th,
                                    options.rsi_thresholds);
            } catch (const NoContextError&) {
                ++result.no_context;
                continue;
            }
        }
        result.records.push_back(render_prompt(ctx, clean, options.mode, *label));
    }
    return result;
}

}  // namespace trendlab
