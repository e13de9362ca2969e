#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "multirat/compression.hpp"
#include "multirat/radio.hpp"

// Episodic partially observable Markov game between patient edge nodes (PENs)
// and radio access networks (RANs).
namespace multirat::env {

using Rng = std::mt19937_64;

struct NormalWeights {
    double energy = 0.25;
    double cost = 0.25;
    double latency = 0.25;
    double distortion = 0.25;
};

struct SeizureWeights {
    double latency = 0.5;
    double distortion = 0.5;
};

struct PenProfile {
    int id = 0;
    double raw_bits_per_step = 1e6;
    double battery_capacity_j = 1.0;
    double seizure_prob = 0.1;
    NormalWeights weights_normal;
    SeizureWeights weights_seizure;

    void validate() const;
};

// Max-normalization constants for the observed metrics.
struct Normalization {
    double energy_j = 1.0;
    double cost = 1.0;
    double latency_s = 1.0;
};

struct Scenario {
    std::vector<radio::RanProfile> rans;
    std::vector<PenProfile> pens;
    radio::ChannelParams channel;
    compression::DistortionModel distortion;
    Normalization normalization;
    double step_duration_s = 10.0;
    double resource_share_s = 0.02;
    double seizure_mean_duration_steps = 10.0;
    double connection_threshold = 1e-3;
    double ratio_init = 0.5;
    double fading_mean_sq = 1.0;

    int num_pens() const { return static_cast<int>(pens.size()); }
    int num_rans() const { return static_cast<int>(rans.size()); }
    double ratio_max() const { return distortion.ratio_max; }
    int pen_obs_width() const { return 3 * num_rans() + 3; }
    int pen_action_width() const { return num_rans() + 1; }
    int ran_obs_width() const { return num_pens(); }
    int ran_action_width() const { return num_pens(); }

    void validate() const;
};

// Worst-case bounds: uncompressed payload over the least favourable RAN at the
// given bandwidth fraction and fading level.
Normalization derive_normalization(const Scenario& scenario, double min_bw_fraction,
                                   double weak_fading_mag_sq);

struct PenObservation {
    std::vector<double> norm_energy;
    std::vector<double> norm_cost;
    std::vector<double> norm_latency;
    double norm_distortion = 0.0;
    double seizure = 0.0;
    double norm_battery = 0.0;

    // [energy(M), cost(M), latency(M), distortion, seizure, battery]
    std::vector<double> flatten() const;
};

struct RanObservation {
    std::vector<double> pen_connected;
};

struct PenAction {
    std::vector<double> utilization;
    double ratio = 0.0;
};

struct RanAction {
    std::vector<double> bw_fractions;
};

struct ClampCounters {
    std::int64_t energy = 0;
    std::int64_t cost = 0;
    std::int64_t latency = 0;
    std::int64_t distortion = 0;
};

struct WorldState {
    std::int64_t step = 0;
    std::vector<double> battery_j;
    std::vector<bool> seizure_active;
    std::vector<int> seizure_remaining;
    Eigen::MatrixXd fading_mag_sq;      // N x M
    Eigen::MatrixXd last_bw_fractions;  // N x M, theta_ij
    Eigen::MatrixXd last_utilization;   // N x M, P_ij
    std::vector<double> last_ratios;
    std::vector<bool> pens_alive;
    ClampCounters clamps;
};

// Raw and normalized metrics of one link for one step.
struct LinkOutcome {
    bool active = false;
    bool zero_bandwidth = false;
    bool over_capacity = false;
    double bits = 0.0;
    double phy_rate_bps = 0.0;
    double service_rate_bps = 0.0;
    double airtime_s = 0.0;
    double energy_j = 0.0;
    double latency_s = 0.0;
    double cost = 0.0;
    double norm_energy = 0.0;
    double norm_cost = 0.0;
    double norm_latency = 0.0;
    int clamp_energy = 0;
    int clamp_cost = 0;
    int clamp_latency = 0;
};

struct PenOutcome {
    std::vector<LinkOutcome> links;
    double compressed_bits = 0.0;
    double distortion = 0.0;
    bool distortion_clamped = false;
    double total_energy_j = 0.0;
    std::vector<std::string> violations;
    // Sum of capacity overruns (airtime / share - 1) plus a large charge per
    // zero-bandwidth link; 0 when the decision is feasible.
    double violation_amount = 0.0;
};

inline constexpr const char* kViolationZeroBandwidth = "zero-bandwidth-link";
inline constexpr const char* kViolationCapacity = "capacity";

// Evaluates every link of one PEN. bw_fractions[j] and fading[j] refer to RAN j.
PenOutcome evaluate_pen(const Scenario& scenario, int pen, const PenAction& action,
                        std::span<const double> bw_fractions, std::span<const double> fading);

// Per-PEN contribution to the weighted-sum objective (the quantity the reward's
// first two terms reward), with seizure-dependent weights.
double pen_objective(const Scenario& scenario, int pen, bool seizure, const PenAction& action,
                     const PenOutcome& outcome);

struct RewardInputs {
    std::span<const double> utilization;
    std::span<const double> norm_energy;
    std::span<const double> norm_cost;
    std::span<const double> norm_latency;
    double norm_distortion = 0.0;
    double norm_battery = 0.0;
};

double pen_reward(const NormalWeights& normal, const SeizureWeights& seizure_weights, bool seizure,
                  const RewardInputs& metrics, bool violated);

double ran_reward(std::span<const double> pen_connected, std::span<const double> pen_rewards,
                  bool feasible);

struct BatteryUpdate {
    double level_j = 0.0;
    double normalized = 0.0;
};

BatteryUpdate update_battery(double previous_j, double step_energy_j, double capacity_j);

void advance_seizure(WorldState& state, const Scenario& scenario, Rng& rng);

struct PenStepInfo {
    bool alive = false;
    bool seizure = false;
    double ratio = 0.0;
    double bits = 0.0;
    double energy_j = 0.0;
    double latency_s = 0.0;  // completion time: max over active links
    double cost = 0.0;
    double distortion = 0.0;
    double norm_latency_sum = 0.0;
};

struct StepResult {
    std::vector<PenObservation> pen_obs;
    std::vector<RanObservation> ran_obs;
    std::vector<double> pen_rewards;
    std::vector<double> ran_rewards;
    std::vector<bool> pen_done;
    bool done = false;
    std::vector<std::vector<std::string>> violations;
    std::vector<PenStepInfo> info;
};

struct ResetResult {
    std::vector<PenObservation> pen_obs;
    std::vector<RanObservation> ran_obs;
};

// Owns the world state and its random streams. Single writer.
class Environment {
public:
    explicit Environment(Scenario scenario);

    ResetResult reset(std::uint64_t seed);
    StepResult step(std::span<const PenAction> pen_actions, std::span<const RanAction> ran_actions);

    const WorldState& state() const { return state_; }
    WorldState& mutable_state() { return state_; }
    const Scenario& scenario() const { return scenario_; }

private:
    void draw_fading(Eigen::MatrixXd& out);
    PenObservation observe(int pen, const PenOutcome& outcome, double norm_battery) const;
    std::vector<RanObservation> observe_rans(const Eigen::MatrixXd& utilization) const;

    Scenario scenario_;
    WorldState state_;
    Rng fading_rng_;
    Rng seizure_rng_;
};

}  // namespace multirat::env
