#pragma once

#include "trendlab/backtest.hpp"
#include "trendlab/labeling.hpp"
#include "trendlab/market_data.hpp"
#include "trendlab/optimizer.hpp"
#include "trendlab/signals.hpp"
#include "trendlab/synthetic.hpp"
#include "trendlab/text_pipeline.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace trendlab::cli {

enum class KeyKind { path, parameter };

struct ConfigKey {
    std::string name;
    std::string default_value;
    std::string help;
    KeyKind kind = KeyKind::parameter;
};

/// Every recognised key, in print order.
const std::vector<ConfigKey>& config_keys();

/// "f_upper" -> "--f-upper"
std::string flag_for(const std::string& key);

class RunConfig {
public:
    RunConfig();

    /// key=value lines; '#' starts a comment. Unknown keys are a ConfigError naming the line.
    void load_file(const std::filesystem::path& path);
    void set(const std::string& key, const std::string& value);
    const std::string& get(const std::string& key) const;

    bool has_path(const std::string& key) const { return !get(key).empty(); }
    std::filesystem::path path(const std::string& key) const;
    /// Like path() but the file must exist.
    std::filesystem::path input(const std::string& key) const;
    std::filesystem::path out_dir() const { return path("out_dir"); }

    double number(const std::string& key) const;
    int integer(const std::string& key) const;
    std::uint64_t unsigned_integer(const std::string& key) const;
    bool boolean(const std::string& key) const;
    std::vector<double> number_list(const std::string& key) const;

    std::string render() const;
    /// FNV-1a over the non-path keys, hex.
    std::string hash() const;
    std::map<std::string, std::string> parameters() const;

    unsigned threads() const;
    GapPolicy gap_policy() const;
    EwmaParams ewma() const;
    BarrierConfig barrier() const;
    OptimizationGrid grid() const;
    OptimizeOptions optimize_options() const;
    SharpeParams sharpe() const;
    PromptBuildOptions prompt_options() const;
    SignalMethod signal_method() const;
    MeanThresholds mean_thresholds() const;
    MeanThresholdOptions mean_threshold_options() const;
    StrategyConfig strategy(StrategyKind kind) const;
    GbmParams gbm() const;
    SyntheticClassifierParams classifier() const;

private:
    std::map<std::string, std::string> values_;
};

}  // namespace trendlab::cli
