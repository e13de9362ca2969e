#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "multirat/baselines.hpp"
#include "multirat/env.hpp"
#include "multirat/marl.hpp"

// Experiment configuration: sectioned "key = value" text with units in key
// names. Lists are comma separated.
namespace multirat::harness {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct EvalConfig {
    int episodes = 10;
    std::uint64_t seed = 1000;
    int max_steps = 100000;
};

struct ExperimentConfig {
    env::Scenario scenario;
    // Worst-case settings used when normalization constants are not given.
    double norm_min_bw_fraction = 0.02;
    double norm_weak_fading_mag_sq = 0.1;
    marl::NetworkConfig network;
    marl::TrainConfig train;
    EvalConfig eval;
    baselines::BaselineConfig baselines;
};

ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

// Canonical text form; parse_config(serialize_config(c)) reproduces c.
std::string serialize_config(const ExperimentConfig& config);

// CRC-32 of the canonical text.
std::uint32_t config_hash(const ExperimentConfig& config);

}  // namespace multirat::harness
