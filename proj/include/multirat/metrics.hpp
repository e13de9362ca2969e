#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "multirat/env.hpp"

// Episode-level performance metrics shared by the learned policy and the
// baselines, plus the rollout driver that produces them.
namespace multirat::metrics {

struct EpisodeMetrics {
    int episode = 0;
    std::uint64_t seed = 0;
    int steps = 0;
    std::vector<double> pen_rewards;  // cumulative per PEN
    std::vector<double> ran_rewards;  // cumulative per RAN
    std::vector<int> lifetime_steps;
    std::vector<double> lifetime_hours;
    // Means over alive PEN-steps.
    double mean_energy_j = 0.0;
    double mean_latency_s = 0.0;
    double mean_cost = 0.0;
    double mean_distortion = 0.0;
    double mean_ratio = 0.0;
    // Seizure-window sub-means.
    int seizure_steps = 0;
    double seizure_mean_latency_s = 0.0;
    double seizure_mean_distortion = 0.0;
    double seizure_mean_ratio = 0.0;
    double seizure_mean_norm_latency = 0.0;
    int normal_steps = 0;
    double normal_mean_ratio = 0.0;
    double normal_mean_norm_latency = 0.0;
    int violations = 0;

    double mean_pen_reward() const;
    double mean_ran_reward() const;
    double mean_lifetime_steps() const;
    double mean_lifetime_hours() const;
};

struct JointAction {
    std::vector<env::PenAction> pens;
    std::vector<env::RanAction> rans;
};

struct Observations {
    std::vector<env::PenObservation> pens;
    std::vector<env::RanObservation> rans;
};

using JointPolicy = std::function<JointAction(const env::Environment&, const Observations&)>;

// Runs one episode until every PEN is depleted or max_steps is reached.
EpisodeMetrics run_episode(env::Environment& environment, const JointPolicy& policy, std::uint64_t seed,
                           int max_steps, int episode_index);

// Seed of evaluation episode k.
std::uint64_t episode_seed(std::uint64_t base, int episode);

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream);

inline constexpr const char* kEvalCsvHeader =
    "policy,episode,seed,steps,mean_pen_reward,mean_ran_reward,mean_lifetime_steps,mean_lifetime_hours,"
    "mean_energy_j,mean_latency_s,mean_cost,mean_distortion,mean_ratio,seizure_steps,"
    "seizure_mean_latency_s,seizure_mean_distortion,seizure_mean_ratio,normal_mean_ratio,"
    "seizure_mean_norm_latency,normal_mean_norm_latency,violations";

std::string eval_csv_row(const std::string& policy, const EpisodeMetrics& m);

void write_eval_csv(const std::filesystem::path& path,
                    const std::vector<std::pair<std::string, std::vector<EpisodeMetrics>>>& runs);

// Shortest round-trip decimal form of a double.
std::string format_double(double value);

}  // namespace multirat::metrics
