#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "config.hpp"

namespace renfk::cli {

enum class RunStatus { ok, verification_failed, error };

struct StageTiming {
    std::string name;
    double seconds = 0.0;
};

struct OutputFile {
    std::string name;
    std::uintmax_t bytes = 0;
    std::string fnv1a;
};

struct RunManifest {
    std::string config_hash;
    std::string version;
    std::string started_utc;
    std::string finished_utc;
    double wall_clock_seconds = 0.0;
    std::vector<StageTiming> stages;
    std::vector<OutputFile> files;
    RunStatus status = RunStatus::ok;
    std::string message;

    /// 0 ok, 1 operational error, 2 verification failure.
    int exit_code() const noexcept;
    nlohmann::json to_json() const;
};

std::string_view to_string(RunStatus status);

const char* tool_version() noexcept;

/// Runs one experiment and writes its outputs plus manifest.json into
/// cfg.out_dir. Operational failures are reported through the manifest
/// (status error) rather than thrown, except an unwritable output directory.
RunManifest run_experiment(const ExperimentConfig& cfg);

}  // namespace renfk::cli
