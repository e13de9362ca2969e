#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "multirat/metrics.hpp"

// CLI subcommands. Each returns a process exit status and logs diagnostics
// instead of throwing.
namespace multirat::harness {

struct CommandOptions {
    std::filesystem::path config;
    std::filesystem::path out_dir = ".";
    std::filesystem::path checkpoint;
    std::optional<std::uint64_t> seed;
    std::string policy;
    bool allow_config_mismatch = false;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

inline constexpr const char* kTrainingCsvHeader = "episode,team,agent,reward,critic_loss,noise_scale";
inline constexpr const char* kCompareCsvHeader = "policy,seed,metric,value";
inline constexpr const char* kSummaryCsvHeader = "policy,reward,lifetime_hours,energy_j,latency_s,cost,distortion";
inline constexpr const char* kLearnedPolicyName = "learned";

int cmd_train(const CommandOptions& options);
int cmd_eval(const CommandOptions& options);
int cmd_baseline(const CommandOptions& options);
int cmd_compare(const CommandOptions& options);

// The six comparison axes of one episode, in summary-column order.
std::vector<std::pair<std::string, double>> comparison_axes(const metrics::EpisodeMetrics& m);

}  // namespace multirat::harness
