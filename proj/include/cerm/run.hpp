#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace cerm {

// A single reproducible run: one command, one seed, all inputs by path.
// Loaded from a JSON config file; CLI flags override individual fields.
struct RunConfig {
    std::string command;
    std::filesystem::path out = "out";
    std::uint64_t seed = 42;
    long long horizon = 50;
    std::uint64_t paths = 100000;
    std::string mode = "full"; // or "centered"
    int threads = 0;

    struct Inputs {
        std::filesystem::path params;
        std::filesystem::path history;
        std::filesystem::path scenarios;
        std::filesystem::path study;
        std::filesystem::path portfolio;
        std::filesystem::path micro; // optional per-period micro-correlations
    } inputs;

    std::vector<long long> snapshots;
    bool store_paths = false;
    std::filesystem::path dump;
};

RunConfig load_run_config(const std::filesystem::path& path);

// Canonical serialization of the effective configuration; hashed into every
// artifact for audit. Deterministic for identical configs.
std::string config_canonical_json(const RunConfig& config);
std::string config_hash(const RunConfig& config);

// Executes the configured command, writing artifacts under config.out.
// Wall-clock timestamps go only to the run.log sidecar so that repeated runs
// are byte-identical. Throws ConfigError / DataError / ModelError.
void run(const RunConfig& config);

} // namespace cerm
