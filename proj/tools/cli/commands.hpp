#pragma once

#include "cli/run_config.hpp"

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace trendlab::cli {

/// Parses `args` (args[0] is the program name), runs one subcommand and maps errors to
/// exit codes: 1 config, 2 data, 3 internal invariant.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Stages write their artifacts and manifest into out_dir and return a summary.
nlohmann::ordered_json stage_label(const RunConfig& config);
nlohmann::ordered_json stage_optimize(const RunConfig& config);
nlohmann::ordered_json stage_prompts(const RunConfig& config);
nlohmann::ordered_json stage_aggregate(const RunConfig& config);
nlohmann::ordered_json stage_evaluate(const RunConfig& config);
nlohmann::ordered_json stage_backtest(const RunConfig& config);
nlohmann::ordered_json stage_synth(const RunConfig& config);
nlohmann::ordered_json stage_pipeline(const RunConfig& config);

}  // namespace trendlab::cli
