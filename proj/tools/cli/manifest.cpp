#include "cli/manifest.hpp"

#include "trendlab/errors.hpp"
#include "trendlab/synthetic.hpp"

#include <chrono>
#include <fstream>
#include <iterator>

#include <fmt/chrono.h>
#include <fmt/format.h>

#ifndef TRENDLAB_VERSION
#define TRENDLAB_VERSION "unknown"
#endif

namespace trendlab::cli {

std::string fnv1a_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(fmt::format("cannot read {}", path.string()));
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (auto it = std::istreambuf_iterator<char>(in); it != std::istreambuf_iterator<char>(); ++it) {
        h ^= static_cast<unsigned char>(*it);
        h *= 0x100000001b3ULL;
    }
    return fmt::format("{:016x}", h);
}

void Manifest::input(const std::string& name, const std::filesystem::path& path) {
    inputs_[name] = {{"file", path.filename().string()}, {"fnv1a", fnv1a_file(path)}};
}

void Manifest::output(const std::filesystem::path& path) {
    outputs_.push_back({{"file", path.filename().string()}, {"fnv1a", fnv1a_file(path)}});
}

std::filesystem::path Manifest::write(const RunConfig& config) const {
    nlohmann::ordered_json j;
    j["stage"] = stage_;
    j["version"] = TRENDLAB_VERSION;
    j["config_hash"] = config.hash();
    j["seed"] = config.unsigned_integer("seed");
    j["rng_algorithm"] = kRngAlgorithm;
    j["parameters"] = config.parameters();
    j["inputs"] = inputs_;
    j["outputs"] = outputs_;
    for (const auto& [key, value] : extra_.items()) j[key] = value;
    j["timestamp"] = fmt::format("{:%Y-%m-%dT%H:%M:%SZ}",
                                 std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now()));

    const auto path = config.out_dir() / (stage_ + ".manifest.json");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError(fmt::format("cannot write {}", path.string()));
    out << j.dump(2) << '\n';
    return path;
}

}  // namespace trendlab::cli
