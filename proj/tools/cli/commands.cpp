#include "cli/commands.hpp"

#include "cli/manifest.hpp"
#include "trendlab/errors.hpp"
#include "trendlab/evaluation.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

namespace trendlab::cli {

namespace {

using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

fs::path prepare_out_dir(const RunConfig& config) {
    const auto dir = config.out_dir();
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw DataError(fmt::format("cannot create output directory {}", dir.string()));
    }
    return dir;
}

fs::path write_artifact(const fs::path& path, const std::function<void(std::ostream&)>& writer,
                        Manifest& manifest) {
    {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw DataError(fmt::format("cannot write {}", path.string()));
        writer(out);
        out.flush();
        if (!out) throw DataError(fmt::format("write failed for {}", path.string()));
    }
    manifest.output(path);
    return path;
}

std::ifstream open_input(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(fmt::format("cannot read {}", path.string()));
    return in;
}

ordered_json parse_json(const std::string& text) { return ordered_json::parse(text); }

ordered_json label_counts(std::span<const TrendLabel> labels) {
    std::array<std::size_t, 3> counts{};
    for (auto l : labels) ++counts[index_of(l)];
    ordered_json j;
    for (auto l : kAllLabels) j[std::string(to_string(l))] = counts[index_of(l)];
    return j;
}

ordered_json confusion_json(const ConfusionMatrix& cm) {
    ordered_json rows = ordered_json::array();
    for (const auto& row : cm.counts) rows.push_back(row);
    return rows;
}

std::optional<BarrierSchedule> load_schedule(const RunConfig& config, Manifest& manifest) {
    if (!config.has_path("params")) return std::nullopt;
    const auto path = config.input("params");
    manifest.input("params", path);
    auto in = open_input(path);
    auto periods = read_params_csv(in, config.integer("min_trend_days"));
    if (periods.empty()) throw DataError(fmt::format("{} holds no parameter rows", path.string()));
    return BarrierSchedule(std::move(periods));
}

PriceSeries load_prices(const RunConfig& config, Manifest& manifest) {
    const auto path = config.input("ohlcv");
    manifest.input("ohlcv", path);
    return load_ohlcv(path, config.gap_policy());
}

LabelSeries compute_labels(const RunConfig& config, const PriceSeries& prices, Manifest& manifest) {
    const auto vols = ewma_volatility(log_returns(prices), config.ewma());
    LabelSeries series;
    if (auto schedule = load_schedule(config, manifest)) {
        series = label_series(prices, vols, schedule->provider());
    } else {
        series = label_series(prices, vols, config.barrier());
    }
    if (series.empty()) throw DataError("no labeling window fits the price history");
    return series;
}

std::vector<Prediction> load_predictions(const RunConfig& config, Manifest& manifest) {
    const auto path = config.input("predictions");
    manifest.input("predictions", path);
    auto in = open_input(path);
    auto raw = read_predictions_jsonl(in);
    if (raw.empty()) throw DataError(fmt::format("{} holds no predictions", path.string()));
    return ensemble_folds(raw);
}

ordered_json evaluate_signal_file(const fs::path& path, const DailyLabels& labels) {
    auto in = open_input(path);
    const auto series = read_signals_csv(in);
    std::vector<TrendLabel> truth;
    std::vector<TrendLabel> predicted;
    for (const auto& day : series.days()) {
        if (day.empty) continue;
        if (const auto label = labels.at(day.day)) {
            truth.push_back(*label);
            predicted.push_back(day.signal);
        }
    }
    ordered_json j;
    j["method"] = to_string(series.method());
    j["days"] = truth.size();
    if (truth.empty()) return j;
    const auto cm = confusion(truth, predicted);
    j["confusion"] = confusion_json(cm);
    j["ovr"] = parse_json(metrics_to_json(ovr_metrics(cm)));
    for (auto focus : {TrendLabel::bullish, TrendLabel::bearish}) {
        const auto key = focus == TrendLabel::bullish ? "ovo_bullish" : "ovo_bearish";
        try {
            j[key] = parse_json(metrics_to_json(ovo_metrics(truth, predicted, focus)));
        } catch (const DataError&) {
            j[key] = nullptr;
        }
    }
    return j;
}

std::vector<StrategyKind> strategies_from(const RunConfig& config) {
    const auto& name = config.get("strategy");
    if (name == "all") {
        return {StrategyKind::tbl, StrategyKind::in_out_long, StrategyKind::in_out_short,
                StrategyKind::buy_hold, StrategyKind::sell_hold};
    }
    return {parse_strategy_kind(name)};
}

RunConfig with(RunConfig config, const std::string& key, const std::string& value) {
    config.set(key, value);
    return config;
}

void write_synthetic_tweets(const RunConfig& config, const PriceSeries& prices, Manifest& manifest) {
    const auto tweets = gen_tweets(prices.range(), config.integer("synth_tweets_per_day"),
                                   config.unsigned_integer("seed") + 2);
    write_artifact(config.out_dir() / "tweets.jsonl",
                   [&](std::ostream& out) { write_tweets_jsonl(out, tweets); }, manifest);
}

std::size_t write_synthetic_predictions(const RunConfig& config, const DailyLabels& labels,
                                        Manifest& manifest) {
    const auto preds = gen_predictions(labels, config.classifier());
    write_artifact(config.out_dir() / "predictions.jsonl",
                   [&](std::ostream& out) { write_predictions_jsonl(out, preds); }, manifest);
    return preds.size();
}

DailyLabels load_daily_labels(const RunConfig& config, Manifest& manifest) {
    const auto path = config.input("labels");
    manifest.input("labels", path);
    auto in = open_input(path);
    return read_daily_labels_csv(in);
}

}  // namespace

ordered_json stage_label(const RunConfig& config) {
    if (!config.has_path("params")) config.barrier();
    config.ewma();
    Manifest manifest("label");
    const auto prices = load_prices(config, manifest);
    const auto dir = prepare_out_dir(config);
    const auto series = compute_labels(config, prices, manifest);
    const auto daily = daily_labels(series);
    write_artifact(dir / "windows.csv", [&](std::ostream& out) { write_windows_csv(out, series); },
                   manifest);
    write_artifact(dir / "labels.csv", [&](std::ostream& out) { write_daily_labels_csv(out, daily); },
                   manifest);
    ordered_json summary;
    summary["windows"] = series.size();
    summary["labeled_days"] = daily.size();
    summary["first_day"] = daily.first_day().iso();
    summary["last_day"] = daily.last_day().iso();
    summary["daily_label_counts"] = label_counts(daily.labels());
    manifest.extra()["summary"] = summary;
    manifest.write(config);
    return summary;
}

ordered_json stage_optimize(const RunConfig& config) {
    const auto grid = config.grid();
    const auto options = config.optimize_options();
    const auto ewma = config.ewma();
    Manifest manifest("optimize");
    const auto prices = load_prices(config, manifest);
    const auto dir = prepare_out_dir(config);
    const auto vols = ewma_volatility(log_returns(prices), ewma);
    const auto periods = optimize_barriers(prices, vols, grid, options);
    write_artifact(dir / "params.csv", [&](std::ostream& out) { write_params_csv(out, periods); },
                   manifest);
    ordered_json summary;
    summary["grid_points"] = grid.size();
    summary["intervals"] = periods.size();
    ordered_json chosen = ordered_json::array();
    for (const auto& p : periods) {
        chosen.push_back({{"interval_start", p.interval.first.iso()},
                          {"interval_end", p.interval.last.iso()},
                          {"f_upper", p.config.f_upper},
                          {"f_lower", p.config.f_lower},
                          {"v_max", p.config.v_max},
                          {"sharpe", p.sharpe}});
    }
    summary["periods"] = chosen;
    manifest.extra()["summary"] = summary;
    manifest.write(config);
    return summary;
}

ordered_json stage_prompts(const RunConfig& config) {
    const auto options = config.prompt_options();
    if (!config.has_path("windows") && !config.has_path("params")) config.barrier();
    Manifest manifest("prompts");
    const auto prices = load_prices(config, manifest);
    const auto tweets_path = config.input("tweets");
    manifest.input("tweets", tweets_path);
    const auto dir = prepare_out_dir(config);

    LabelSeries labels;
    if (config.has_path("windows")) {
        const auto path = config.input("windows");
        manifest.input("windows", path);
        auto in = open_input(path);
        labels = read_windows_csv(in);
    } else {
        labels = compute_labels(config, prices, manifest);
    }
    auto in = open_input(tweets_path);
    const auto tweets = read_tweets_jsonl(in);
    const auto result = build_prompt_dataset(tweets, prices, labels, FilterRuleset::defaults(), options);
    if (result.records.empty()) {
        throw DataError(fmt::format("no prompt could be built from {} tweets ({} dropped, {} unlabeled, "
                                    "{} without context)",
                                    tweets.size(), result.dropped, result.unlabeled, result.no_context));
    }
    const auto path = dir / "prompts.jsonl";
    export_dataset(result.records, path);
    manifest.output(path);

    std::vector<TrendLabel> record_labels;
    for (const auto& r : result.records) record_labels.push_back(r.label);
    ordered_json summary;
    summary["mode"] = to_string(options.mode);
    summary["tweets"] = tweets.size();
    summary["records"] = result.records.size();
    summary["dropped"] = result.dropped;
    summary["unlabeled"] = result.unlabeled;
    summary["no_context"] = result.no_context;
    summary["label_counts"] = label_counts(record_labels);
    manifest.extra()["summary"] = summary;
    manifest.write(config);
    return summary;
}

ordered_json stage_aggregate(const RunConfig& config) {
    const auto method = config.signal_method();
    const auto fallback = config.mean_thresholds();
    const bool optimize = method == SignalMethod::mean && config.boolean("mean_optimize");
    const auto threshold_options = config.mean_threshold_options();
    const int window = config.integer("confidence_window");
    const auto ewma = config.ewma();
    Manifest manifest("aggregate_" + std::string(to_string(method)));
    const auto prices = load_prices(config, manifest);
    const auto all = load_predictions(config, manifest);
    const auto dir = prepare_out_dir(config);

    std::vector<Prediction> preds;
    for (const auto& p : all) {
        if (prices.contains(p.day)) preds.push_back(p);
    }
    const std::size_t outside = all.size() - preds.size();
    if (preds.empty()) throw DataError("no prediction falls inside the price history");

    std::vector<MeanThresholds> periods;
    ordered_json chosen = ordered_json::array();
    if (optimize) {
        const auto vols = ewma_volatility(log_returns(prices), ewma);
        const auto choices = optimize_mean_thresholds(preds, prices, vols, threshold_options);
        write_artifact(dir / "thresholds.csv",
                       [&](std::ostream& out) { write_thresholds_csv(out, choices); }, manifest);
        for (const auto& c : choices) {
            periods.push_back(c.thresholds);
            chosen.push_back({{"interval_start", c.thresholds.valid->first.iso()},
                              {"interval_end", c.thresholds.valid->last.iso()},
                              {"t_bearish", c.thresholds.t_bearish},
                              {"t_bullish", c.thresholds.t_bullish},
                              {"sharpe", c.sharpe}});
        }
    }
    const ThresholdSchedule schedule(fallback, periods);
    const auto raw = build_signal_series(preds, prices.range(), method, schedule);
    const auto series = normalize_confidence(raw, window);
    const auto file = fmt::format("signals_{}.csv", to_string(method));
    write_artifact(dir / file, [&](std::ostream& out) { write_signals_csv(out, series); }, manifest);

    std::vector<TrendLabel> signals;
    std::size_t empty = 0;
    for (const auto& d : series.days()) {
        signals.push_back(d.signal);
        empty += d.empty;
    }
    ordered_json summary;
    summary["method"] = to_string(method);
    summary["predictions"] = preds.size();
    summary["outside_price_range"] = outside;
    summary["days"] = series.size();
    summary["empty_days"] = empty;
    summary["signal_counts"] = label_counts(signals);
    if (optimize) summary["thresholds"] = chosen;
    manifest.extra()["summary"] = summary;
    manifest.write(config);
    return summary;
}

ordered_json stage_evaluate(const RunConfig& config) {
    Manifest manifest("evaluate");
    const auto preds = load_predictions(config, manifest);
    const auto labels = load_daily_labels(config, manifest);
    const auto dir = prepare_out_dir(config);

    std::vector<TrendLabel> truth;
    std::vector<TrendLabel> predicted;
    std::vector<std::array<double, 3>> probs;
    bool all_probs = true;
    for (const auto& p : preds) {
        const auto label = labels.at(p.day);
        if (!label) continue;
        truth.push_back(*label);
        predicted.push_back(p.predicted);
        if (p.probs) {
            probs.push_back(*p.probs);
        } else {
            all_probs = false;
        }
    }
    if (truth.empty()) throw DataError("no prediction falls on a labeled day");

    ordered_json tweets;
    tweets["samples"] = truth.size();
    tweets["unlabeled"] = preds.size() - truth.size();
    const auto cm = confusion(truth, predicted);
    tweets["confusion"] = confusion_json(cm);
    std::optional<double> ce;
    if (all_probs) ce = cross_entropy(probs, truth);
    tweets["ovr"] = parse_json(metrics_to_json(ovr_metrics(cm), ce));
    for (auto focus : {TrendLabel::bullish, TrendLabel::bearish}) {
        const auto key = focus == TrendLabel::bullish ? "ovo_bullish" : "ovo_bearish";
        try {
            tweets[key] = parse_json(metrics_to_json(ovo_metrics(truth, predicted, focus)));
        } catch (const DataError&) {
            tweets[key] = nullptr;
        }
    }
    ordered_json report;
    report["tweets"] = tweets;
    if (config.has_path("signals")) {
        const auto path = config.input("signals");
        manifest.input("signals", path);
        report["signals"] = evaluate_signal_file(path, labels);
    }
    write_artifact(dir / "metrics.json", [&](std::ostream& out) { out << report.dump(2) << '\n'; },
                   manifest);
    manifest.write(config);
    return report;
}

ordered_json stage_backtest(const RunConfig& config) {
    const auto kinds = strategies_from(config);
    const auto sharpe = config.sharpe();
    std::map<StrategyKind, StrategyConfig> strategies;
    for (auto kind : kinds) {
        if (kind == StrategyKind::buy_hold || kind == StrategyKind::sell_hold) continue;
        strategies[kind] = config.strategy(kind);
        // with a walk-forward journal, days before its first block get no barriers
        if (kind == StrategyKind::tbl && config.has_path("params")) strategies[kind].barriers.reset();
    }
    const auto ewma = config.ewma();
    Manifest manifest("backtest");
    const auto prices = load_prices(config, manifest);
    const auto signals_path = config.input("signals");
    manifest.input("signals", signals_path);
    const auto schedule = load_schedule(config, manifest);
    const auto dir = prepare_out_dir(config);
    auto in = open_input(signals_path);
    const auto signals = read_signals_csv(in);
    const auto vols = ewma_volatility(log_returns(prices), ewma);
    const BarrierProvider provider = schedule ? schedule->provider() : BarrierProvider{};

    ordered_json report;
    report["signal_method"] = to_string(signals.method());
    for (auto kind : kinds) {
        BacktestResult result;
        switch (kind) {
            case StrategyKind::tbl:
                result = run_tbl(signals, prices, vols, strategies.at(kind), schedule ? &provider : nullptr);
                break;
            case StrategyKind::in_out_long:
            case StrategyKind::in_out_short:
                result = run_in_out(signals, prices, strategies.at(kind));
                break;
            case StrategyKind::buy_hold:
                result = run_hold(prices, Side::long_side);
                break;
            case StrategyKind::sell_hold:
                result = run_hold(prices, Side::short_side);
                break;
        }
        const auto name = std::string(to_string(kind));
        write_artifact(dir / fmt::format("trades_{}.csv", name),
                       [&](std::ostream& out) { write_trades_csv(out, result.trades); }, manifest);
        write_artifact(dir / fmt::format("equity_{}.csv", name),
                       [&](std::ostream& out) { write_equity_csv(out, result.equity); }, manifest);
        auto perf = parse_json(report_to_json(performance(result.trades, result.equity, sharpe)));
        perf["warnings"] = result.warnings.size();
        report["strategies"][name] = perf;
    }
    write_artifact(dir / "backtest.json", [&](std::ostream& out) { out << report.dump(2) << '\n'; },
                   manifest);
    manifest.write(config);
    return report;
}

ordered_json stage_synth(const RunConfig& config) {
    const auto gbm = config.gbm();
    const bool with_predictions = config.has_path("labels");
    if (with_predictions) config.classifier();
    Manifest manifest("synth");
    const auto dir = prepare_out_dir(config);
    const auto prices = gen_gbm(gbm);
    write_artifact(dir / "ohlcv.csv", [&](std::ostream& out) { write_ohlcv(out, prices); }, manifest);
    write_synthetic_tweets(config, prices, manifest);
    ordered_json summary;
    summary["days"] = prices.size();
    summary["first_day"] = prices.first_day().iso();
    summary["last_day"] = prices.last_day().iso();
    summary["high_low_convention"] = kHighLowConvention;
    if (with_predictions) {
        const auto labels = load_daily_labels(config, manifest);
        summary["predictions"] = write_synthetic_predictions(config, labels, manifest);
    }
    manifest.extra()["summary"] = summary;
    manifest.write(config);
    return summary;
}

ordered_json stage_pipeline(const RunConfig& config) {
    RunConfig c = config;
    const auto dir = prepare_out_dir(c);
    const auto in_dir = [&](const char* name) { return (dir / name).string(); };
    // Validate everything that can be validated before the first artifact is written.
    c.grid();
    c.optimize_options();
    c.prompt_options();
    c.mean_thresholds();
    c.mean_threshold_options();
    c.classifier();
    for (auto kind : strategies_from(c)) {
        if (kind != StrategyKind::buy_hold && kind != StrategyKind::sell_hold) c.strategy(kind);
    }
    for (const auto* key : {"ohlcv", "tweets", "predictions"}) {
        if (c.has_path(key)) c.input(key);
    }

    ordered_json report;
    report["config_hash"] = c.hash();
    if (!c.has_path("ohlcv")) {
        report["synth"] = stage_synth(with(c, "labels", ""));
        c.set("ohlcv", in_dir("ohlcv.csv"));
        if (!c.has_path("tweets")) c.set("tweets", in_dir("tweets.jsonl"));
    } else if (!c.has_path("tweets")) {
        Manifest manifest("synth_tweets");
        write_synthetic_tweets(c, load_prices(c, manifest), manifest);
        manifest.write(c);
        c.set("tweets", in_dir("tweets.jsonl"));
    }

    report["optimize"] = stage_optimize(c);
    c.set("params", in_dir("params.csv"));
    report["label"] = stage_label(c);
    c.set("windows", in_dir("windows.csv"));
    c.set("labels", in_dir("labels.csv"));
    report["prompts"] = stage_prompts(c);

    if (!c.has_path("predictions")) {
        Manifest manifest("synth_predictions");
        const auto labels = load_daily_labels(c, manifest);
        report["synthetic_predictions"] = write_synthetic_predictions(c, labels, manifest);
        manifest.write(c);
        c.set("predictions", in_dir("predictions.jsonl"));
    }

    for (auto method : {SignalMethod::majority, SignalMethod::mean}) {
        const auto name = std::string(to_string(method));
        report["aggregate"][name] = stage_aggregate(with(c, "signal_method", name));
    }
    c.set("signals", in_dir(fmt::format("signals_{}.csv", to_string(c.signal_method())).c_str()));
    report["evaluate"] = stage_evaluate(c);
    {
        Manifest scratch("evaluate_signals");
        const auto labels = load_daily_labels(c, scratch);
        for (auto method : {SignalMethod::majority, SignalMethod::mean}) {
            const auto name = std::string(to_string(method));
            report["evaluate"]["signals_" + name] =
                evaluate_signal_file(dir / fmt::format("signals_{}.csv", name), labels);
        }
    }
    report["backtest"] = stage_backtest(c);

    Manifest manifest("pipeline");
    write_artifact(dir / "report.json", [&](std::ostream& out) { out << report.dump(2) << '\n'; },
                   manifest);
    manifest.write(c);
    return report;
}

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Market-derived trend labels, prompt datasets, daily signals and backtests.", "trendlab"};
    app.require_subcommand(1, 1);

    using Stage = ordered_json (*)(const RunConfig&);
    const std::vector<std::tuple<std::string, std::string, Stage>> stages{
        {"label", "label a price history with volatility barriers", &stage_label},
        {"optimize", "grid-search barrier parameters per calendar block", &stage_optimize},
        {"prompts", "preprocess tweets and render the prompt dataset", &stage_prompts},
        {"aggregate", "aggregate per-tweet predictions into daily signals", &stage_aggregate},
        {"evaluate", "classification metrics against daily labels", &stage_evaluate},
        {"backtest", "run trading strategies on daily signals", &stage_backtest},
        {"synth", "generate synthetic prices, tweets and predictions", &stage_synth},
        {"pipeline", "run every stage on one config", &stage_pipeline},
    };

    std::string config_path;
    bool print_config = false;
    std::map<std::string, std::string> flags;
    std::map<const CLI::App*, Stage> dispatch;
    for (const auto& [name, help, fn] : stages) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "key=value config file (flags override it)");
        sub->add_flag("--print-config", print_config, "print the effective config and exit");
        for (const auto& key : config_keys()) {
            sub->add_option(flag_for(key.name), flags[key.name], key.help);
        }
        dispatch[sub] = fn;
    }

    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        const auto parsed = app.get_subcommands();
        out << (parsed.empty() ? app.help() : parsed.front()->help());
        return 0;
    } catch (const CLI::ParseError& e) {
        const auto parsed = app.get_subcommands();
        err << "error: " << e.what() << "\n\n" << (parsed.empty() ? app.help() : parsed.front()->help());
        return 1;
    }

    const CLI::App* sub = app.get_subcommands().front();
    try {
        RunConfig config;
        if (!config_path.empty()) config.load_file(config_path);
        for (const auto& key : config_keys()) {
            if (sub->get_option(flag_for(key.name))->count() > 0) config.set(key.name, flags[key.name]);
        }
        if (print_config) {
            out << config.render();
            return 0;
        }
        const auto summary = dispatch.at(sub)(config);
        out << summary.dump(2) << '\n';
        return 0;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << "\n";
        return 2;
    } catch (const InvariantError& e) {
        err << "internal error: " << e.what() << "\n";
        return 3;
    } catch (const nlohmann::json::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace trendlab::cli
