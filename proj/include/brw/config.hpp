#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "brw/env.hpp"
#include "brw/model.hpp"

namespace brw::cli {

using json = nlohmann::json;

inline constexpr const char* kToolVersion = "0.1.0";

// Parsed and validated experiment description. The raw JSON is kept for
// hashing and round-tripping; model/environment are built eagerly so every
// parameter is validated before any computation starts.
struct ExperimentConfig {
    std::string kind;
    json raw;

    model::ReproductionLaw model;
    env::EnvironmentSpec environment;
    json params;  // experiment-specific block, keys validated per kind

    std::uint64_t seed = 1;
    std::string out = "out";
    int threads = 1;
    std::uint64_t cap = 10'000'000;
};

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<int> threads;
    std::optional<std::uint64_t> cap;
};

// Throws std::invalid_argument naming the offending key on any problem,
// including keys that are not recognized.
ExperimentConfig parse_config(const std::string& text, const Overrides& ov = {});

model::ReproductionLaw build_model(const json& j);
env::EnvironmentSpec build_environment(const json& j);

std::string canonical_dump(const json& raw);   // sorted keys, stable spacing
std::uint64_t config_hash(const json& raw);    // FNV-1a of the canonical dump

}  // namespace brw::cli
