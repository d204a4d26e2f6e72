#include "cli/run_config.hpp"

#include "trendlab/errors.hpp"
#include "trendlab/parallel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace trendlab::cli {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

const ConfigKey* find_key(const std::string& name) {
    const auto& keys = config_keys();
    const auto it = std::find_if(keys.begin(), keys.end(), [&](const ConfigKey& k) { return k.name == name; });
    return it == keys.end() ? nullptr : &*it;
}

double to_double(const std::string& key, const std::string& text) {
    double v = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc{} || ptr != end || !std::isfinite(v)) {
        throw ConfigError(fmt::format("{}: expected a number, got '{}'", key, text));
    }
    return v;
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
    using K = KeyKind;
    static const std::vector<ConfigKey> keys{
        {"out_dir", "out", "directory for artifacts and manifests", K::path},
        {"ohlcv", "", "daily OHLCV CSV", K::path},
        {"fill_gaps", "reject", "missing calendar days: reject or forward (fill closes, zero volume)"},
        {"tweets", "", "tweet JSONL (id, timestamp, text)", K::path},
        {"predictions", "", "per-tweet prediction JSONL", K::path},
        {"labels", "", "daily labels CSV (day,label)", K::path},
        {"windows", "", "labeling windows CSV", K::path},
        {"signals", "", "daily signals CSV", K::path},
        {"params", "", "walk-forward barrier parameter CSV; overrides the fixed barrier config", K::path},
        {"ewma_tau", "30", "EWMA span in days"},
        {"ewma_terms", "30", "squared returns in the EWMA sum (0: all history)"},
        {"f_upper", "1", "upper barrier volatility factor"},
        {"f_lower", "1", "lower barrier volatility factor"},
        {"v_max", "8", "vertical barrier in days (8-15)"},
        {"min_trend_days", "2", "days before a barrier touch counts"},
        {"grid_f_upper", "0.5:3:0.25", "optimizer grid for f_upper (min:max:step or a,b,c)"},
        {"grid_f_lower", "0.5:3:0.25", "optimizer grid for f_lower"},
        {"grid_v_max", "8:15:1", "optimizer grid for v_max"},
        {"interval_months", "6", "re-optimization block length in months"},
        {"rsi_period", "14", "RSI period"},
        {"rsi_lower", "30", "RSI oversold threshold"},
        {"rsi_upper", "70", "RSI overbought threshold"},
        {"roc_period", "8", "ROC period"},
        {"roc_k", "1", "ROC threshold multiplier"},
        {"roc_window", "180", "days of returns behind the ROC thresholds"},
        {"prompt_mode", "CA", "CUA, CA or TCA"},
        {"signal_method", "majority", "majority or mean"},
        {"t_bearish", "0.8", "mean-method bearish threshold"},
        {"t_bullish", "1.2", "mean-method bullish threshold"},
        {"mean_optimize", "true", "re-optimize mean thresholds per block"},
        {"mean_grid_min", "0.6", "mean threshold grid minimum"},
        {"mean_grid_max", "1.4", "mean threshold grid maximum"},
        {"mean_grid_step", "0.05", "mean threshold grid step"},
        {"confidence_window", "180", "trailing days for confidence normalization"},
        {"strategy", "all", "tbl, in_out_long, in_out_short, buy_hold, sell_hold or all"},
        {"base_fraction", "1", "position size before confidence scaling"},
        {"fee_rate", "0", "fee per side as a fraction of notional"},
        {"confidence_sizing", "true", "scale positions by normalized confidence"},
        {"risk_free", "0.04", "annual risk-free rate"},
        {"days_per_year", "365", "annualization days"},
        {"seed", "42", "base seed for synthetic data"},
        {"synth_days", "730", "synthetic price days"},
        {"synth_drift", "0", "synthetic annual drift"},
        {"synth_vol", "0.6", "synthetic annual volatility"},
        {"synth_start_price", "100", "synthetic first close"},
        {"synth_start_day", "2020-01-01", "synthetic first day"},
        {"synth_accuracy", "0.8", "synthetic classifier accuracy"},
        {"synth_tweets_per_day", "5", "synthetic tweets per day"},
        {"synth_error_model", "uniform", "uniform or neutral_biased"},
        {"threads", "0", "worker cap (0: TRENDLAB_THREADS or all cores)"},
    };
    return keys;
}

std::string flag_for(const std::string& key) {
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    return flag;
}

RunConfig::RunConfig() {
    for (const auto& k : config_keys()) values_[k.name] = k.default_value;
}

void RunConfig::load_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("cannot read config file {}", path.string()));
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        const std::string content = trim(line);
        if (content.empty()) continue;
        const auto eq = content.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(fmt::format("{}:{}: expected key=value", path.string(), line_no));
        }
        const std::string key = trim(std::string_view(content).substr(0, eq));
        if (find_key(key) == nullptr) {
            throw ConfigError(fmt::format("{}:{}: unknown key '{}'", path.string(), line_no, key));
        }
        values_[key] = trim(std::string_view(content).substr(eq + 1));
    }
}

void RunConfig::set(const std::string& key, const std::string& value) {
    if (find_key(key) == nullptr) throw ConfigError(fmt::format("unknown config key '{}'", key));
    values_[key] = value;
}

const std::string& RunConfig::get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw InvariantError(fmt::format("config key '{}' not registered", key));
    return it->second;
}

std::filesystem::path RunConfig::path(const std::string& key) const {
    const auto& v = get(key);
    if (v.empty()) {
        throw ConfigError(fmt::format("{} is required ({} or '{} = ...' in the config)", key,
                                      flag_for(key), key));
    }
    return v;
}

std::filesystem::path RunConfig::input(const std::string& key) const {
    auto p = path(key);
    if (!std::filesystem::is_regular_file(p)) {
        throw ConfigError(fmt::format("{}: no such file {}", key, p.string()));
    }
    return p;
}

double RunConfig::number(const std::string& key) const { return to_double(key, get(key)); }

int RunConfig::integer(const std::string& key) const {
    const auto& text = get(key);
    int v = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc{} || ptr != end) {
        throw ConfigError(fmt::format("{}: expected an integer, got '{}'", key, text));
    }
    return v;
}

std::uint64_t RunConfig::unsigned_integer(const std::string& key) const {
    const auto& text = get(key);
    std::uint64_t v = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc{} || ptr != end) {
        throw ConfigError(fmt::format("{}: expected a non-negative integer, got '{}'", key, text));
    }
    return v;
}

bool RunConfig::boolean(const std::string& key) const {
    const auto& v = get(key);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError(fmt::format("{}: expected true or false, got '{}'", key, v));
}

std::vector<double> RunConfig::number_list(const std::string& key) const {
    const auto& text = get(key);
    std::vector<double> out;
    if (text.find(':') != std::string::npos) {
        std::vector<double> parts;
        std::stringstream ss(text);
        std::string part;
        while (std::getline(ss, part, ':')) parts.push_back(to_double(key, trim(part)));
        if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0]) {
            throw ConfigError(fmt::format("{}: expected min:max:step with step > 0, got '{}'", key, text));
        }
        const auto n = static_cast<long>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
        for (long i = 0; i <= n; ++i) out.push_back(parts[0] + static_cast<double>(i) * parts[2]);
        return out;
    }
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) out.push_back(to_double(key, trim(part)));
    if (out.empty()) throw ConfigError(fmt::format("{}: empty list", key));
    return out;
}

std::string RunConfig::render() const {
    std::string out;
    for (const auto& k : config_keys()) {
        out += fmt::format("# {}\n{} = {}\n", k.help, k.name, get(k.name));
    }
    return out;
}

std::string RunConfig::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& k : config_keys()) {
        if (k.kind == KeyKind::path) continue;
        for (char c : k.name + "=" + get(k.name) + "\n") {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001b3ULL;
        }
    }
    return fmt::format("{:016x}", h);
}

std::map<std::string, std::string> RunConfig::parameters() const {
    std::map<std::string, std::string> out;
    for (const auto& k : config_keys()) {
        if (k.kind == KeyKind::parameter) out[k.name] = get(k.name);
    }
    return out;
}

unsigned RunConfig::threads() const {
    const int t = integer("threads");
    if (t < 0) throw ConfigError("threads must be >= 0");
    return resolve_threads(static_cast<unsigned>(t));
}

GapPolicy RunConfig::gap_policy() const {
    const auto& v = get("fill_gaps");
    if (v == "forward") return GapPolicy::forward_fill;
    if (v == "reject") return GapPolicy::reject;
    return boolean("fill_gaps") ? GapPolicy::forward_fill : GapPolicy::reject;
}

EwmaParams RunConfig::ewma() const {
    EwmaParams p{integer("ewma_tau"), integer("ewma_terms")};
    p.validate();
    return p;
}

BarrierConfig RunConfig::barrier() const {
    BarrierConfig c{number("f_upper"), number("f_lower"), integer("v_max"), integer("min_trend_days")};
    c.validate();
    return c;
}

OptimizationGrid RunConfig::grid() const {
    OptimizationGrid g;
    g.f_upper = number_list("grid_f_upper");
    g.f_lower = number_list("grid_f_lower");
    for (double v : number_list("grid_v_max")) {
        if (v != std::floor(v)) throw ConfigError("grid_v_max must hold whole days");
        g.v_max.push_back(static_cast<int>(v));
    }
    g.min_trend_days = integer("min_trend_days");
    g.validate();
    return g;
}

OptimizeOptions RunConfig::optimize_options() const {
    return {integer("interval_months"), sharpe(), threads()};
}

SharpeParams RunConfig::sharpe() const {
    SharpeParams p{number("risk_free"), integer("days_per_year")};
    p.validate();
    return p;
}

PromptBuildOptions RunConfig::prompt_options() const {
    PromptBuildOptions o;
    o.mode = parse_prompt_mode(get("prompt_mode"));
    o.rsi_period = integer("rsi_period");
    o.rsi_thresholds = {number("rsi_lower"), number("rsi_upper")};
    o.roc_period = integer("roc_period");
    o.roc_window = integer("roc_window");
    o.roc_k = number("roc_k");
    o.interval_months = integer("interval_months");
    return o;
}

SignalMethod RunConfig::signal_method() const { return parse_signal_method(get("signal_method")); }

MeanThresholds RunConfig::mean_thresholds() const {
    MeanThresholds t{number("t_bearish"), number("t_bullish"), std::nullopt};
    t.validate();
    return t;
}

MeanThresholdOptions RunConfig::mean_threshold_options() const {
    MeanThresholdOptions o;
    o.grid = {number("mean_grid_min"), number("mean_grid_max"), number("mean_grid_step")};
    o.interval_months = integer("interval_months");
    o.sharpe = sharpe();
    return o;
}

StrategyConfig RunConfig::strategy(StrategyKind kind) const {
    StrategyConfig s;
    s.kind = kind;
    if (kind == StrategyKind::tbl) s.barriers = barrier();
    s.base_fraction = number("base_fraction");
    s.fee_rate = number("fee_rate");
    s.confidence_sizing = boolean("confidence_sizing");
    s.validate();
    return s;
}

GbmParams RunConfig::gbm() const {
    GbmParams p;
    p.seed = unsigned_integer("seed");
    p.drift = number("synth_drift");
    p.volatility = number("synth_vol");
    p.days = integer("synth_days");
    p.start_price = number("synth_start_price");
    try {
        p.start_day = Day::parse(get("synth_start_day"));
    } catch (const DataError& e) {
        throw ConfigError(fmt::format("synth_start_day: {}", e.what()));
    }
    p.validate();
    return p;
}

SyntheticClassifierParams RunConfig::classifier() const {
    SyntheticClassifierParams p;
    p.seed = unsigned_integer("seed") + 1;
    p.accuracy = number("synth_accuracy");
    p.tweets_per_day = integer("synth_tweets_per_day");
    p.error_model = parse_error_model(get("synth_error_model"));
    p.validate();
    return p;
}

}  // namespace trendlab::cli
