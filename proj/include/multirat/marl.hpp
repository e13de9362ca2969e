#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "multirat/env.hpp"
#include "multirat/metrics.hpp"
#include "multirat/nn.hpp"

// Team-based multi-agent DDPG: a PEN team and a RAN team, each with per-agent
// actors and per-agent centralized critics over the team's joint (obs, action).
namespace multirat::marl {

using Rng = std::mt19937_64;

// Row offsets of each agent's slice inside the team's joint vectors.
struct TeamLayout {
    std::vector<int> obs_widths;
    std::vector<int> action_widths;
    std::vector<int> obs_offsets;
    std::vector<int> action_offsets;
    int joint_obs_width = 0;
    int joint_action_width = 0;

    static TeamLayout uniform(int agents, int obs_width, int action_width);
    int agents() const { return static_cast<int>(obs_widths.size()); }
    int critic_input_width() const { return joint_obs_width + joint_action_width; }
};

struct Experience {
    std::vector<double> joint_obs;
    std::vector<double> joint_action;
    std::vector<double> joint_next_obs;
    std::vector<double> rewards;
    std::vector<double> done_flags;
};

// One sample per column.
struct Batch {
    nn::Matrix obs;
    nn::Matrix actions;
    nn::Matrix next_obs;
    nn::Matrix rewards;  // agents x B
    nn::Matrix done;     // agents x B
    int size() const { return static_cast<int>(obs.cols()); }
};

class ReplayBuffer {
public:
    ReplayBuffer() = default;
    ReplayBuffer(std::size_t capacity, const TeamLayout& layout);

    void push(const Experience& e);
    std::size_t size() const { return size_; }
    std::size_t capacity() const { return capacity_; }
    std::size_t cursor() const { return cursor_; }

    // Uniform without replacement. Throws if size() < batch_size.
    Batch sample(std::size_t batch_size, Rng& rng) const;
    Batch gather(std::span<const std::size_t> slots) const;

private:
    std::size_t capacity_ = 0;
    std::size_t size_ = 0;
    std::size_t cursor_ = 0;
    int agents_ = 0;
    nn::Matrix obs_, actions_, next_obs_, rewards_, done_;
};

struct Agent {
    nn::MlpNet actor;
    nn::MlpNet critic;
};

struct Team {
    std::string name;
    TeamLayout layout;
    std::vector<Agent> agents;
    ReplayBuffer buffer;
};

struct NetworkConfig {
    std::vector<int> hidden_layers{64, 64};
    nn::Activation activation = nn::Activation::relu;

    void validate() const;
};

nn::MlpSpec pen_actor_spec(const env::Scenario& scenario, const NetworkConfig& net);
nn::MlpSpec ran_actor_spec(const env::Scenario& scenario, const NetworkConfig& net);
nn::MlpSpec critic_spec(const TeamLayout& layout, const NetworkConfig& net);

Team make_pen_team(const env::Scenario& scenario, const NetworkConfig& net, std::size_t buffer_capacity,
                   std::uint64_t seed);
Team make_ran_team(const env::Scenario& scenario, const NetworkConfig& net, std::size_t buffer_capacity,
                   std::uint64_t seed);

struct TrainConfig {
    int episodes = 6000;
    int steps_per_episode = 200;
    std::size_t buffer_capacity = 10000;
    std::size_t batch_size = 128;
    double gamma = 0.95;
    int train_interval = 1;
    int updates_per_train = 1;
    double soft_epsilon = 0.01;
    int warmup_episodes = 0;
    // Std of the Gaussian added to head pre-activations; decays linearly from
    // noise_start to noise_end over noise_decay_episodes after warmup.
    double noise_start = 1.0;
    double noise_end = 0.05;
    int noise_decay_episodes = 1000;
    double grad_clip_norm = 1.0;
    nn::AdamConfig actor_adam{1e-4};
    nn::AdamConfig critic_adam{3e-4};
    std::uint64_t seed = 1;

    void validate() const;
    double noise_scale(int episode) const;
};

struct Exploration {
    double scale = 0.0;
    // Ignore the actors and squash pure Gaussian pre-activations instead.
    bool random_policy = false;
};

// Each agent acts on its own observation only.
std::vector<std::vector<double>> act(const Team& team, const std::vector<std::vector<double>>& per_agent_obs,
                                     Exploration noise, Rng& rng);

// Stacks per-agent slices of a joint matrix.
nn::Matrix slice_rows(const nn::Matrix& joint, int offset, int width);

// Joint next action from every target actor on o'.
nn::Matrix target_joint_actions(const Team& team, const nn::Matrix& next_obs);

// y = r + gamma (1 - d) Q'(o', a').
nn::Vector td_target(const Team& team, int agent, const Batch& batch, double gamma);

double critic_loss(const nn::MlpNet& critic, const Batch& batch, const nn::Vector& targets);

// Gradient of the MSBE w.r.t. critic parameters.
nn::Vector critic_loss_gradient(const nn::MlpNet& critic, const Batch& batch, const nn::Vector& targets);

// Batch mean of Q_agent(o, a) with the agent's slice replaced by its online
// actor output.
double actor_objective(const Team& team, int agent, const Batch& batch);
nn::Vector actor_objective_gradient(const Team& team, int agent, const Batch& batch);

// One Adam descent step; returns the loss before the step.
double update_critic(Agent& agent, const Batch& batch, const nn::Vector& targets, const TrainConfig& cfg);
void update_actor(Team& team, int agent, const Batch& batch, const TrainConfig& cfg);

// Sampled update of every agent in the team (critic, actor, then targets).
// Returns per-agent critic loss.
std::vector<double> update_team(Team& team, const TrainConfig& cfg, Rng& rng);

struct TrainingLogRow {
    int episode = 0;
    std::string team;
    int agent = 0;
    double reward = 0.0;
    double critic_loss = 0.0;  // NaN when no update happened in the episode
    double noise_scale = 0.0;
};

struct TrainResult {
    Team pens;
    Team rans;
    std::vector<TrainingLogRow> log;
    std::string rng_state;
};

using EpisodeCallback = std::function<void(int episode, const std::vector<TrainingLogRow>& rows)>;

TrainResult train(const env::Scenario& scenario, const TrainConfig& cfg, const NetworkConfig& net,
                  const EpisodeCallback& on_episode = {});

// Noise-free actor-only rollouts; episode k uses seed + k.
std::vector<metrics::EpisodeMetrics> evaluate(const Team& pens, const Team& rans, const env::Scenario& scenario,
                                              int episodes, std::uint64_t seed, int max_steps);

// Converts flat actor outputs to environment actions.
env::PenAction to_pen_action(std::span<const double> output);
env::RanAction to_ran_action(std::span<const double> output);

}  // namespace multirat::marl
