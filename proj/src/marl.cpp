#include "multirat/marl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace multirat::marl {

using nn::Matrix;
using nn::Vector;

TeamLayout TeamLayout::uniform(int agents, int obs_width, int action_width) {
    if (agents <= 0 || obs_width <= 0 || action_width <= 0)
        throw std::invalid_argument("team layout: agents and widths must be positive");
    TeamLayout l;
    for (int k = 0; k < agents; ++k) {
        l.obs_widths.push_back(obs_width);
        l.action_widths.push_back(action_width);
        l.obs_offsets.push_back(l.joint_obs_width);
        l.action_offsets.push_back(l.joint_action_width);
        l.joint_obs_width += obs_width;
        l.joint_action_width += action_width;
    }
    return l;
}

// ---- replay buffer ----

ReplayBuffer::ReplayBuffer(std::size_t capacity, const TeamLayout& layout)
    : capacity_(capacity), agents_(layout.agents()) {
    if (capacity == 0) throw std::invalid_argument("replay buffer: capacity must be positive");
    const auto cap = static_cast<Eigen::Index>(capacity);
    obs_ = Matrix::Zero(layout.joint_obs_width, cap);
    actions_ = Matrix::Zero(layout.joint_action_width, cap);
    next_obs_ = Matrix::Zero(layout.joint_obs_width, cap);
    rewards_ = Matrix::Zero(agents_, cap);
    done_ = Matrix::Zero(agents_, cap);
}

void ReplayBuffer::push(const Experience& e) {
    if (static_cast<Eigen::Index>(e.joint_obs.size()) != obs_.rows() ||
        static_cast<Eigen::Index>(e.joint_next_obs.size()) != obs_.rows() ||
        static_cast<Eigen::Index>(e.joint_action.size()) != actions_.rows() ||
        static_cast<int>(e.rewards.size()) != agents_ || static_cast<int>(e.done_flags.size()) != agents_)
        throw std::invalid_argument("replay buffer: experience widths do not match the team layout");
    const auto c = static_cast<Eigen::Index>(cursor_);
    auto put = [c](Matrix& m, const std::vector<double>& v) {
        m.col(c) = Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
    };
    put(obs_, e.joint_obs);
    put(actions_, e.joint_action);
    put(next_obs_, e.joint_next_obs);
    put(rewards_, e.rewards);
    put(done_, e.done_flags);
    cursor_ = (cursor_ + 1) % capacity_;
    size_ = std::min(size_ + 1, capacity_);
}

Batch ReplayBuffer::gather(std::span<const std::size_t> slots) const {
    const auto b = static_cast<Eigen::Index>(slots.size());
    Batch batch{Matrix(obs_.rows(), b), Matrix(actions_.rows(), b), Matrix(obs_.rows(), b), Matrix(agents_, b),
                Matrix(agents_, b)};
    for (Eigen::Index k = 0; k < b; ++k) {
        const std::size_t s = slots[k];
        if (s >= size_) throw std::out_of_range("replay buffer: slot not filled");
        const auto c = static_cast<Eigen::Index>(s);
        batch.obs.col(k) = obs_.col(c);
        batch.actions.col(k) = actions_.col(c);
        batch.next_obs.col(k) = next_obs_.col(c);
        batch.rewards.col(k) = rewards_.col(c);
        batch.done.col(k) = done_.col(c);
    }
    return batch;
}

Batch ReplayBuffer::sample(std::size_t batch_size, Rng& rng) const {
    if (batch_size == 0 || size_ < batch_size)
        throw std::logic_error("replay buffer: not enough experiences to sample a batch");
    // Partial Fisher-Yates over the filled slots.
    std::vector<std::size_t> pool(size_);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t k = 0; k < batch_size; ++k) {
        std::uniform_int_distribution<std::size_t> pick(k, size_ - 1);
        std::swap(pool[k], pool[pick(rng)]);
    }
    return gather(std::span<const std::size_t>(pool.data(), batch_size));
}

// ---- networks ----

void NetworkConfig::validate() const {
    if (hidden_layers.empty()) throw std::invalid_argument("network.hidden_layers: at least one hidden layer");
    for (int h : hidden_layers)
        if (h <= 0) throw std::invalid_argument("network.hidden_layers: sizes must be positive");
}

namespace {

std::vector<int> layers(int in, const NetworkConfig& net, int out) {
    std::vector<int> sizes{in};
    sizes.insert(sizes.end(), net.hidden_layers.begin(), net.hidden_layers.end());
    sizes.push_back(out);
    return sizes;
}

Team make_team(std::string name, const TeamLayout& layout, const nn::MlpSpec& actor, const NetworkConfig& net,
               std::size_t buffer_capacity, std::uint64_t seed) {
    Team team;
    team.name = std::move(name);
    team.layout = layout;
    const auto critic = critic_spec(layout, net);
    for (int k = 0; k < layout.agents(); ++k) {
        team.agents.push_back(Agent{nn::MlpNet::init(actor, metrics::mix_seed(seed, 2 * k)),
                                    nn::MlpNet::init(critic, metrics::mix_seed(seed, 2 * k + 1))});
    }
    team.buffer = ReplayBuffer(buffer_capacity, layout);
    return team;
}

}  // namespace

nn::MlpSpec pen_actor_spec(const env::Scenario& scenario, const NetworkConfig& net) {
    nn::MlpSpec spec;
    spec.layer_sizes = layers(scenario.pen_obs_width(), net, scenario.pen_action_width());
    spec.hidden_activation = net.activation;
    spec.heads = {{scenario.num_rans(), nn::HeadActivation::simplex}, {1, nn::HeadActivation::unit_interval}};
    spec.interval_max = scenario.ratio_max();
    return spec;
}

nn::MlpSpec ran_actor_spec(const env::Scenario& scenario, const NetworkConfig& net) {
    nn::MlpSpec spec;
    spec.layer_sizes = layers(scenario.ran_obs_width(), net, scenario.ran_action_width());
    spec.hidden_activation = net.activation;
    spec.heads = {{scenario.num_pens(), nn::HeadActivation::simplex}};
    return spec;
}

nn::MlpSpec critic_spec(const TeamLayout& layout, const NetworkConfig& net) {
    nn::MlpSpec spec;
    spec.layer_sizes = layers(layout.critic_input_width(), net, 1);
    spec.hidden_activation = net.activation;
    spec.heads = {{1, nn::HeadActivation::linear}};
    return spec;
}

Team make_pen_team(const env::Scenario& scenario, const NetworkConfig& net, std::size_t buffer_capacity,
                   std::uint64_t seed) {
    net.validate();
    const auto layout = TeamLayout::uniform(scenario.num_pens(), scenario.pen_obs_width(), scenario.pen_action_width());
    return make_team("pen", layout, pen_actor_spec(scenario, net), net, buffer_capacity, seed);
}

Team make_ran_team(const env::Scenario& scenario, const NetworkConfig& net, std::size_t buffer_capacity,
                   std::uint64_t seed) {
    net.validate();
    const auto layout = TeamLayout::uniform(scenario.num_rans(), scenario.ran_obs_width(), scenario.ran_action_width());
    return make_team("ran", layout, ran_actor_spec(scenario, net), net, buffer_capacity, seed);
}

// ---- config ----

void TrainConfig::validate() const {
    if (episodes <= 0) throw std::invalid_argument("train.episodes: must be positive");
    if (steps_per_episode <= 0) throw std::invalid_argument("train.steps_per_episode: must be positive");
    if (!(gamma >= 0.0)) throw std::invalid_argument("train.gamma: discount factor must be >= 0");
    if (!(gamma < 1.0)) throw std::invalid_argument("train.gamma: discount factor must be < 1");
    if (batch_size == 0) throw std::invalid_argument("train.batch_size: must be positive");
    if (batch_size > buffer_capacity)
        throw std::invalid_argument("train.batch_size: must not exceed the replay buffer capacity");
    if (train_interval <= 0) throw std::invalid_argument("train.train_interval: must be positive");
    if (updates_per_train <= 0) throw std::invalid_argument("train.updates_per_train: must be positive");
    if (!(soft_epsilon > 0.0 && soft_epsilon <= 1.0))
        throw std::invalid_argument("train.soft_update: must lie in (0, 1]");
    if (warmup_episodes < 0) throw std::invalid_argument("train.warmup_episodes: must be >= 0");
    if (!(noise_start >= 0.0) || !(noise_end >= 0.0))
        throw std::invalid_argument("train.noise: scales must be >= 0");
    if (noise_decay_episodes < 0) throw std::invalid_argument("train.noise_decay_episodes: must be >= 0");
    if (!(grad_clip_norm > 0.0)) throw std::invalid_argument("train.grad_clip_norm: must be positive");
    actor_adam.validate();
    critic_adam.validate();
}

double TrainConfig::noise_scale(int episode) const {
    if (episode < warmup_episodes) return noise_start;
    const int since = episode - warmup_episodes;
    if (noise_decay_episodes == 0 || since >= noise_decay_episodes) return noise_end;
    const double frac = static_cast<double>(since) / noise_decay_episodes;
    return noise_start + (noise_end - noise_start) * frac;
}

// ---- acting ----

std::vector<std::vector<double>> act(const Team& team, const std::vector<std::vector<double>>& per_agent_obs,
                                     Exploration noise, Rng& rng) {
    if (static_cast<int>(per_agent_obs.size()) != team.layout.agents())
        throw std::invalid_argument("act: expected one observation per agent");
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<std::vector<double>> out;
    out.reserve(per_agent_obs.size());
    for (int k = 0; k < team.layout.agents(); ++k) {
        const auto& obs = per_agent_obs[k];
        if (static_cast<int>(obs.size()) != team.layout.obs_widths[k])
            throw std::invalid_argument("act: observation width mismatch for agent " + std::to_string(k));
        const auto& actor = team.agents[k].actor;
        const Matrix x = Eigen::Map<const Matrix>(obs.data(), static_cast<Eigen::Index>(obs.size()), 1);
        Matrix y;
        if (noise.random_policy || noise.scale > 0.0) {
            Matrix eps(actor.spec().output_width(), 1);
            for (Eigen::Index r = 0; r < eps.rows(); ++r) eps(r, 0) = noise.scale * gauss(rng);
            if (noise.random_policy) {
                y = eps;
                nn::squash_heads(actor.spec(), y);
            } else {
                y = actor.forward(x, nn::ParamSet::online, &eps);
            }
        } else {
            y = actor.forward(x);
        }
        out.emplace_back(y.data(), y.data() + y.size());
    }
    return out;
}

env::PenAction to_pen_action(std::span<const double> output) {
    if (output.size() < 2) throw std::invalid_argument("pen action: output too short");
    env::PenAction a;
    a.utilization.assign(output.begin(), output.end() - 1);
    a.ratio = output.back();
    return a;
}

env::RanAction to_ran_action(std::span<const double> output) {
    return env::RanAction{std::vector<double>(output.begin(), output.end())};
}

// ---- learning ----

Matrix slice_rows(const Matrix& joint, int offset, int width) { return joint.middleRows(offset, width); }

Matrix target_joint_actions(const Team& team, const Matrix& next_obs) {
    const auto& l = team.layout;
    Matrix joint(l.joint_action_width, next_obs.cols());
    for (int k = 0; k < l.agents(); ++k) {
        joint.middleRows(l.action_offsets[k], l.action_widths[k]) = team.agents[k].actor.forward(
            slice_rows(next_obs, l.obs_offsets[k], l.obs_widths[k]), nn::ParamSet::target);
    }
    return joint;
}

namespace {

Matrix critic_input(const Matrix& obs, const Matrix& actions) {
    Matrix in(obs.rows() + actions.rows(), obs.cols());
    in.topRows(obs.rows()) = obs;
    in.bottomRows(actions.rows()) = actions;
    return in;
}

Vector td_target_with(const Team& team, int agent, const Batch& batch, const Matrix& next_actions, double gamma) {
    const Matrix q = team.agents[agent].critic.forward(critic_input(batch.next_obs, next_actions),
                                                       nn::ParamSet::target);
    const auto r = batch.rewards.row(agent).transpose().array();
    const auto d = batch.done.row(agent).transpose().array();
    return (r + gamma * (1.0 - d) * q.row(0).transpose().array()).matrix();
}

// Joint batch action with the agent's own slice from its online actor.
struct ActorPass {
    nn::ForwardTrace actor_trace;
    Matrix joint_actions;
};

ActorPass actor_pass(const Team& team, int agent, const Batch& batch) {
    const auto& l = team.layout;
    ActorPass p;
    p.actor_trace = team.agents[agent].actor.trace(slice_rows(batch.obs, l.obs_offsets[agent], l.obs_widths[agent]));
    p.joint_actions = batch.actions;
    p.joint_actions.middleRows(l.action_offsets[agent], l.action_widths[agent]) = p.actor_trace.output;
    return p;
}

void check_agent(const Team& team, int agent) {
    if (agent < 0 || agent >= team.layout.agents()) throw std::out_of_range("agent index out of range");
}

}  // namespace

Vector td_target(const Team& team, int agent, const Batch& batch, double gamma) {
    check_agent(team, agent);
    return td_target_with(team, agent, batch, target_joint_actions(team, batch.next_obs), gamma);
}

double critic_loss(const nn::MlpNet& critic, const Batch& batch, const Vector& targets) {
    const Matrix q = critic.forward(critic_input(batch.obs, batch.actions));
    return (q.row(0).transpose() - targets).squaredNorm() / static_cast<double>(batch.size());
}

Vector critic_loss_gradient(const nn::MlpNet& critic, const Batch& batch, const Vector& targets) {
    const auto tr = critic.trace(critic_input(batch.obs, batch.actions));
    const Matrix upstream = (2.0 / batch.size()) * (tr.output.row(0) - targets.transpose());
    return critic.backward(tr, upstream).params;
}

double actor_objective(const Team& team, int agent, const Batch& batch) {
    check_agent(team, agent);
    const auto p = actor_pass(team, agent, batch);
    const Matrix q = team.agents[agent].critic.forward(critic_input(batch.obs, p.joint_actions));
    return q.mean();
}

Vector actor_objective_gradient(const Team& team, int agent, const Batch& batch) {
    check_agent(team, agent);
    const auto& l = team.layout;
    const auto p = actor_pass(team, agent, batch);
    const auto& critic = team.agents[agent].critic;
    const auto ctr = critic.trace(critic_input(batch.obs, p.joint_actions));
    const Matrix ones = Matrix::Constant(1, batch.size(), 1.0 / batch.size());
    const auto cg = critic.backward(ctr, ones);
    const Matrix da = cg.input.middleRows(l.joint_obs_width + l.action_offsets[agent], l.action_widths[agent]);
    return team.agents[agent].actor.backward(p.actor_trace, da).params;
}

double update_critic(Agent& agent, const Batch& batch, const Vector& targets, const TrainConfig& cfg) {
    const auto tr = agent.critic.trace(critic_input(batch.obs, batch.actions));
    const Vector err = tr.output.row(0).transpose() - targets;
    const double loss = err.squaredNorm() / batch.size();
    Vector g = agent.critic.backward(tr, (2.0 / batch.size()) * err.transpose()).params;
    nn::clip_global_norm(g, cfg.grad_clip_norm);
    agent.critic.adam_step(g, cfg.critic_adam, nn::Direction::descend);
    return loss;
}

void update_actor(Team& team, int agent, const Batch& batch, const TrainConfig& cfg) {
    Vector g = actor_objective_gradient(team, agent, batch);
    nn::clip_global_norm(g, cfg.grad_clip_norm);
    team.agents[agent].actor.adam_step(g, cfg.actor_adam, nn::Direction::ascend);
}

std::vector<double> update_team(Team& team, const TrainConfig& cfg, Rng& rng) {
    if (team.buffer.size() < cfg.batch_size) return {};
    const Batch batch = team.buffer.sample(cfg.batch_size, rng);
    const Matrix next_actions = target_joint_actions(team, batch.next_obs);
    std::vector<double> losses;
    for (int k = 0; k < team.layout.agents(); ++k) {
        const Vector y = td_target_with(team, k, batch, next_actions, cfg.gamma);
        losses.push_back(update_critic(team.agents[k], batch, y, cfg));
        update_actor(team, k, batch, cfg);
    }
    for (auto& a : team.agents) {
        a.actor.soft_update(cfg.soft_epsilon);
        a.critic.soft_update(cfg.soft_epsilon);
    }
    return losses;
}

// ---- loops ----

namespace {

std::vector<std::vector<double>> pen_obs_vectors(const std::vector<env::PenObservation>& obs) {
    std::vector<std::vector<double>> out;
    out.reserve(obs.size());
    for (const auto& o : obs) out.push_back(o.flatten());
    return out;
}

std::vector<std::vector<double>> ran_obs_vectors(const std::vector<env::RanObservation>& obs) {
    std::vector<std::vector<double>> out;
    out.reserve(obs.size());
    for (const auto& o : obs) out.push_back(o.pen_connected);
    return out;
}

std::vector<double> concat(const std::vector<std::vector<double>>& parts) {
    std::vector<double> out;
    for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
}

std::vector<env::PenAction> pen_actions(const std::vector<std::vector<double>>& raw) {
    std::vector<env::PenAction> out;
    for (const auto& r : raw) out.push_back(to_pen_action(r));
    return out;
}

std::vector<env::RanAction> ran_actions(const std::vector<std::vector<double>>& raw) {
    std::vector<env::RanAction> out;
    for (const auto& r : raw) out.push_back(to_ran_action(r));
    return out;
}

constexpr std::uint64_t kPenTeamStream = 0x70656e;
constexpr std::uint64_t kRanTeamStream = 0x72616e;
constexpr std::uint64_t kTrainerStream = 0x747261;
constexpr std::uint64_t kEpisodeStream = 0x657069;

}  // namespace

TrainResult train(const env::Scenario& scenario, const TrainConfig& cfg, const NetworkConfig& net,
                  const EpisodeCallback& on_episode) {
    scenario.validate();
    cfg.validate();
    TrainResult result;
    result.pens = make_pen_team(scenario, net, cfg.buffer_capacity, metrics::mix_seed(cfg.seed, kPenTeamStream));
    result.rans = make_ran_team(scenario, net, cfg.buffer_capacity, metrics::mix_seed(cfg.seed, kRanTeamStream));
    Team& pens = result.pens;
    Team& rans = result.rans;
    Rng rng(metrics::mix_seed(cfg.seed, kTrainerStream));
    env::Environment environment(scenario);
    const int n = scenario.num_pens();
    const int m = scenario.num_rans();
    std::int64_t total_steps = 0;

    for (int ep = 0; ep < cfg.episodes; ++ep) {
        try {
            const Exploration noise{cfg.noise_scale(ep), ep < cfg.warmup_episodes};
            auto reset = environment.reset(metrics::mix_seed(cfg.seed, kEpisodeStream + static_cast<std::uint64_t>(ep)));
            auto pen_obs = pen_obs_vectors(reset.pen_obs);
            auto ran_obs = ran_obs_vectors(reset.ran_obs);
            std::vector<double> pen_return(n, 0.0), ran_return(m, 0.0);
            std::vector<double> pen_loss(n, 0.0), ran_loss(m, 0.0);
            int pen_updates = 0, ran_updates = 0;

            for (int t = 0; t < cfg.steps_per_episode; ++t) {
                const auto pa = act(pens, pen_obs, noise, rng);
                const auto ra = act(rans, ran_obs, noise, rng);
                const auto step = environment.step(pen_actions(pa), ran_actions(ra));
                auto next_pen = pen_obs_vectors(step.pen_obs);
                auto next_ran = ran_obs_vectors(step.ran_obs);

                Experience pe{concat(pen_obs), concat(pa), concat(next_pen), step.pen_rewards,
                              std::vector<double>(n, 0.0)};
                for (int i = 0; i < n; ++i) pe.done_flags[i] = (step.pen_done[i] || step.done) ? 1.0 : 0.0;
                Experience re{concat(ran_obs), concat(ra), concat(next_ran), step.ran_rewards,
                              std::vector<double>(m, step.done ? 1.0 : 0.0)};
                pens.buffer.push(pe);
                rans.buffer.push(re);

                for (int i = 0; i < n; ++i) pen_return[i] += step.pen_rewards[i];
                for (int j = 0; j < m; ++j) ran_return[j] += step.ran_rewards[j];

                ++total_steps;
                if (total_steps % cfg.train_interval == 0) {
                    for (int u = 0; u < cfg.updates_per_train; ++u) {
                        const auto pl = update_team(pens, cfg, rng);
                        if (!pl.empty()) {
                            for (int i = 0; i < n; ++i) pen_loss[i] += pl[i];
                            ++pen_updates;
                        }
                        const auto rl = update_team(rans, cfg, rng);
                        if (!rl.empty()) {
                            for (int j = 0; j < m; ++j) ran_loss[j] += rl[j];
                            ++ran_updates;
                        }
                    }
                }

                pen_obs = std::move(next_pen);
                ran_obs = std::move(next_ran);
                if (step.done) break;
            }

            const double nan = std::numeric_limits<double>::quiet_NaN();
            std::vector<TrainingLogRow> rows;
            for (int i = 0; i < n; ++i)
                rows.push_back({ep, pens.name, i, pen_return[i], pen_updates ? pen_loss[i] / pen_updates : nan,
                                noise.scale});
            for (int j = 0; j < m; ++j)
                rows.push_back({ep, rans.name, j, ran_return[j], ran_updates ? ran_loss[j] / ran_updates : nan,
                                noise.scale});
            if (on_episode) on_episode(ep, rows);
            result.log.insert(result.log.end(), rows.begin(), rows.end());
        } catch (const std::exception& e) {
            throw std::runtime_error("training failed in episode " + std::to_string(ep) + ": " + e.what());
        }
    }
    std::ostringstream os;
    os << rng;
    result.rng_state = os.str();
    return result;
}

std::vector<metrics::EpisodeMetrics> evaluate(const Team& pens, const Team& rans, const env::Scenario& scenario,
                                              int episodes, std::uint64_t seed, int max_steps) {
    if (episodes <= 0 || max_steps <= 0) throw std::invalid_argument("evaluate: episodes and max_steps must be positive");
    env::Environment environment(scenario);
    // Only the actors are consulted here.
    const metrics::JointPolicy policy = [&](const env::Environment&, const metrics::Observations& obs) {
        metrics::JointAction a;
        for (std::size_t i = 0; i < obs.pens.size(); ++i)
            a.pens.push_back(to_pen_action(pens.agents[i].actor.forward(obs.pens[i].flatten())));
        for (std::size_t j = 0; j < obs.rans.size(); ++j)
            a.rans.push_back(to_ran_action(rans.agents[j].actor.forward(obs.rans[j].pen_connected)));
        return a;
    };
    std::vector<metrics::EpisodeMetrics> out;
    for (int k = 0; k < episodes; ++k) {
        const auto s = metrics::episode_seed(seed, k);
        out.push_back(metrics::run_episode(environment, policy, s, max_steps, k));
    }
    return out;
}

}  // namespace multirat::marl
