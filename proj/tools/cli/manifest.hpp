#pragma once

#include "cli/run_config.hpp"

#include <filesystem>
#include <string>

#include <json.hpp>

namespace trendlab::cli {

std::string fnv1a_file(const std::filesystem::path& path);

/// Run record written next to a stage's artifacts. Only `timestamp` varies between
/// identical runs; files are recorded by name and content hash.
class Manifest {
public:
    explicit Manifest(std::string stage) : stage_(std::move(stage)) {}

    void input(const std::string& name, const std::filesystem::path& path);
    void output(const std::filesystem::path& path);
    nlohmann::ordered_json& extra() { return extra_; }

    std::filesystem::path write(const RunConfig& config) const;

private:
    std::string stage_;
    nlohmann::ordered_json inputs_ = nlohmann::ordered_json::object();
    nlohmann::ordered_json outputs_ = nlohmann::ordered_json::array();
    nlohmann::ordered_json extra_ = nlohmann::ordered_json::object();
};

}  // namespace trendlab::cli
