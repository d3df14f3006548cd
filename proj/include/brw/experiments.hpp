#pragma once

#include <string>
#include <utility>
#include <vector>

#include "brw/config.hpp"

namespace brw::cli {

// exit codes shared by the binary and the replay checker
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitCapExhausted = 3;
inline constexpr int kExitReplayMismatch = 4;

struct RunResult {
    int exit_code = kExitOk;
    std::string error;  // human-readable diagnostic for nonzero exits
    int cap_hits = 0;
    // deterministic artifacts, in emission order: (filename, content)
    std::vector<std::pair<std::string, std::string>> artifacts;
};

// Pure computation: no filesystem access. summary.json is included in the
// artifact list; the manifest is not (it carries timestamps).
RunResult run_experiment(const ExperimentConfig& cfg);

// Runs the experiment and writes artifacts + manifest.txt atomically into
// cfg.out. Returns the process exit code.
int execute_and_write(const ExperimentConfig& cfg, const std::string& config_path);

// Hypothesis diagnostics; "pass: ..." / "warn: ..." lines. Never fails.
std::vector<std::string> validate_config(const ExperimentConfig& cfg);

// Re-runs the experiment recorded in a manifest and byte-compares each
// artifact against the files on disk. Returns kExitOk or kExitReplayMismatch.
int replay(const std::string& manifest_path, const Overrides& ov = {});

}  // namespace brw::cli
