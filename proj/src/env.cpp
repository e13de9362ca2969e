#include "multirat/env.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace multirat::env {

namespace {

constexpr double kSimplexTolerance = 1e-6;
constexpr double kWeightSumTolerance = 1e-9;
// Charged per zero-bandwidth link in the violation amount.
constexpr double kZeroBandwidthCharge = 1e3;
// Relative slack on the resource-share test so exact boundary cases stay feasible.
constexpr double kCapacitySlack = 1e-9;

bool in_unit(double x) { return x >= 0.0 && x <= 1.0; }

double clamp_unit(double value, int& clamp_events) {
    if (value > 1.0) {
        ++clamp_events;
        return 1.0;
    }
    if (value < 0.0) {
        ++clamp_events;
        return 0.0;
    }
    return value;
}

void check_simplex(std::span<const double> values, const std::string& what) {
    double sum = 0.0;
    for (double v : values) {
        if (!(v >= -kSimplexTolerance)) throw std::invalid_argument(what + ": negative or non-finite entry");
        sum += v;
    }
    if (std::abs(sum - 1.0) > kSimplexTolerance) throw std::invalid_argument(what + ": entries must sum to 1");
}

}  // namespace

void PenProfile::validate() const {
    const std::string who = "pen " + std::to_string(id);
    if (!(raw_bits_per_step >= 0.0)) throw std::invalid_argument(who + ": raw bits must be >= 0");
    if (!(battery_capacity_j > 0.0)) throw std::invalid_argument(who + ": battery capacity must be > 0");
    if (!in_unit(seizure_prob)) throw std::invalid_argument(who + ": seizure probability must lie in [0, 1]");
    const auto& w = weights_normal;
    if (!in_unit(w.energy) || !in_unit(w.cost) || !in_unit(w.latency) || !in_unit(w.distortion))
        throw std::invalid_argument(who + ": normal weights must lie in [0, 1]");
    if (std::abs(w.energy + w.cost + w.latency + w.distortion - 1.0) > kWeightSumTolerance)
        throw std::invalid_argument(who + ": normal weights must sum to 1");
    if (!in_unit(weights_seizure.latency) || !in_unit(weights_seizure.distortion))
        throw std::invalid_argument(who + ": seizure weights must lie in [0, 1]");
}

void Scenario::validate() const {
    if (pens.empty()) throw std::invalid_argument("scenario: at least one PEN required");
    if (rans.empty()) throw std::invalid_argument("scenario: at least one RAN required");
    for (const auto& r : rans) r.validate();
    for (const auto& p : pens) p.validate();
    channel.validate();
    distortion.validate();
    if (!(normalization.energy_j > 0.0 && normalization.cost > 0.0 && normalization.latency_s > 0.0))
        throw std::invalid_argument("scenario: normalization constants must be > 0");
    if (!(step_duration_s > 0.0)) throw std::invalid_argument("scenario: step duration must be > 0");
    if (!(resource_share_s > 0.0)) throw std::invalid_argument("scenario: resource share must be > 0");
    if (!(seizure_mean_duration_steps >= 1.0))
        throw std::invalid_argument("scenario: mean seizure duration must be >= 1 step");
    if (!(connection_threshold >= 0.0 && connection_threshold < 1.0))
        throw std::invalid_argument("scenario: connection threshold must lie in [0, 1)");
    if (!(ratio_init >= 0.0 && ratio_init <= ratio_max()))
        throw std::invalid_argument("scenario: initial ratio must lie in [0, ratio_max]");
    if (!(fading_mean_sq > 0.0)) throw std::invalid_argument("scenario: fading mean must be > 0");
}

Normalization derive_normalization(const Scenario& scenario, double min_bw_fraction,
                                   double weak_fading_mag_sq) {
    double max_bits = 0.0;
    for (const auto& p : scenario.pens) max_bits = std::max(max_bits, p.raw_bits_per_step);
    Normalization norm{0.0, 0.0, 0.0};
    const double gain = radio::channel_gain(scenario.channel, weak_fading_mag_sq);
    for (const auto& ran : scenario.rans) {
        const double phy = radio::shannon_rate(ran, scenario.channel, min_bw_fraction, gain);
        const double service = radio::link_rate(ran, scenario.channel, min_bw_fraction, gain);
        norm.energy_j = std::max(
            norm.energy_j, radio::link_energy(ran, scenario.channel, max_bits, min_bw_fraction, gain, phy));
        norm.cost = std::max(norm.cost, radio::link_cost(ran, max_bits));
        norm.latency_s = std::max(norm.latency_s, radio::link_latency(ran, max_bits, service));
    }
    return norm;
}

std::vector<double> PenObservation::flatten() const {
    std::vector<double> out;
    out.reserve(norm_energy.size() * 3 + 3);
    out.insert(out.end(), norm_energy.begin(), norm_energy.end());
    out.insert(out.end(), norm_cost.begin(), norm_cost.end());
    out.insert(out.end(), norm_latency.begin(), norm_latency.end());
    out.push_back(norm_distortion);
    out.push_back(seizure);
    out.push_back(norm_battery);
    return out;
}

PenOutcome evaluate_pen(const Scenario& scenario, int pen, const PenAction& action,
                        std::span<const double> bw_fractions, std::span<const double> fading) {
    const int m = scenario.num_rans();
    const auto& profile = scenario.pens.at(pen);
    const auto& norm = scenario.normalization;
    PenOutcome out;
    out.links.resize(m);
    out.compressed_bits = compression::compressed_length(profile.raw_bits_per_step, action.ratio);
    const auto d = compression::distortion_checked(scenario.distortion, action.ratio);
    out.distortion = d.value;
    out.distortion_clamped = d.clamped;

    bool zero_bw = false;
    bool over = false;
    for (int j = 0; j < m; ++j) {
        auto& link = out.links[j];
        const double share = action.utilization[j];
        link.active = share > scenario.connection_threshold;
        if (!link.active) continue;
        const auto& ran = scenario.rans[j];
        link.bits = out.compressed_bits * share;
        const double theta = bw_fractions[j];
        const double gain = radio::channel_gain(scenario.channel, fading[j]);
        if (theta > 0.0 && gain > 0.0) {
            link.phy_rate_bps = radio::shannon_rate(ran, scenario.channel, theta, gain);
            link.service_rate_bps = radio::link_rate(ran, scenario.channel, theta, gain);
        }
        if (!(link.service_rate_bps > 0.0)) {
            // Nothing can be carried; the radio still pays its wake-up offset.
            link.zero_bandwidth = true;
            zero_bw = true;
            link.energy_j = ran.energy_offset_j;
            link.latency_s = norm.latency_s;
            link.airtime_s = std::numeric_limits<double>::infinity();
            link.norm_energy = link.norm_cost = link.norm_latency = 1.0;
            out.violation_amount += kZeroBandwidthCharge;
        } else {
            // The radio bursts at the physical-layer rate while the RAN delivers
            // at its (possibly capped) service rate.
            link.energy_j = radio::link_energy(ran, scenario.channel, link.bits, theta, gain, link.phy_rate_bps);
            link.latency_s = radio::link_latency(ran, link.bits, link.service_rate_bps);
            link.cost = radio::link_cost(ran, link.bits);
            link.airtime_s = link.bits / link.service_rate_bps;
            link.over_capacity = link.airtime_s > scenario.resource_share_s * (1.0 + kCapacitySlack);
            if (link.over_capacity) {
                over = true;
                out.violation_amount += link.airtime_s / scenario.resource_share_s - 1.0;
            }
            link.norm_energy = clamp_unit(link.energy_j / norm.energy_j, link.clamp_energy);
            link.norm_cost = clamp_unit(link.cost / norm.cost, link.clamp_cost);
            link.norm_latency = clamp_unit(link.latency_s / norm.latency_s, link.clamp_latency);
        }
        out.total_energy_j += link.energy_j;
    }
    if (zero_bw) out.violations.emplace_back(kViolationZeroBandwidth);
    if (over) out.violations.emplace_back(kViolationCapacity);
    return out;
}

double pen_objective(const Scenario& scenario, int pen, bool seizure, const PenAction& action,
                     const PenOutcome& outcome) {
    const auto& profile = scenario.pens.at(pen);
    double total = 0.0;
    for (std::size_t j = 0; j < outcome.links.size(); ++j) {
        const auto& link = outcome.links[j];
        if (!link.active) continue;
        const double share = action.utilization[j];
        if (seizure) {
            total += share * profile.weights_seizure.latency * link.norm_latency;
        } else {
            const auto& w = profile.weights_normal;
            total += share * (w.energy * link.norm_energy + w.cost * link.norm_cost + w.latency * link.norm_latency);
        }
    }
    const double delta = seizure ? profile.weights_seizure.distortion : profile.weights_normal.distortion;
    return total + delta * outcome.distortion;
}

double pen_reward(const NormalWeights& normal, const SeizureWeights& seizure_weights, bool seizure,
                  const RewardInputs& metrics, bool violated) {
    if (violated) return -1.0;
    if (seizure) {
        const double latency_sum = std::accumulate(metrics.norm_latency.begin(), metrics.norm_latency.end(), 0.0);
        return seizure_weights.latency * (1.0 - latency_sum) +
               seizure_weights.distortion * (0.1 - metrics.norm_distortion) + metrics.norm_battery;
    }
    double utility = 0.0;
    for (std::size_t j = 0; j < metrics.utilization.size(); ++j) {
        utility += metrics.utilization[j] * (normal.energy * metrics.norm_energy[j] +
                                             normal.cost * metrics.norm_cost[j] +
                                             normal.latency * metrics.norm_latency[j]);
    }
    return (1.0 - utility) + normal.distortion * (1.0 - metrics.norm_distortion) + metrics.norm_battery;
}

double ran_reward(std::span<const double> pen_connected, std::span<const double> pen_rewards,
                  bool feasible) {
    if (pen_connected.size() != pen_rewards.size())
        throw std::invalid_argument("ran_reward: vectors must have equal length");
    if (!feasible) return -1.0;
    double sum = 0.0;
    int count = 0;
    for (std::size_t i = 0; i < pen_connected.size(); ++i) {
        if (pen_connected[i] > 0.5) {
            sum += pen_rewards[i];
            ++count;
        }
    }
    return count == 0 ? 0.0 : sum / count;
}

BatteryUpdate update_battery(double previous_j, double step_energy_j, double capacity_j) {
    const double level = std::max(0.0, previous_j - step_energy_j);
    return {level, level / capacity_j};
}

void advance_seizure(WorldState& state, const Scenario& scenario, Rng& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::geometric_distribution<int> extra(1.0 / scenario.seizure_mean_duration_steps);
    // Every PEN consumes the same draws regardless of its status so that the
    // seizure sequence does not depend on the policy being evaluated.
    for (int i = 0; i < scenario.num_pens(); ++i) {
        const double onset_draw = unit(rng);
        const int duration = 1 + extra(rng);
        if (state.seizure_active[i]) {
            if (--state.seizure_remaining[i] <= 0) {
                state.seizure_active[i] = false;
                state.seizure_remaining[i] = 0;
            }
        } else if (onset_draw < scenario.pens[i].seizure_prob) {
            state.seizure_active[i] = true;
            state.seizure_remaining[i] = duration;
        }
    }
}

Environment::Environment(Scenario scenario) : scenario_(std::move(scenario)) { scenario_.validate(); }

void Environment::draw_fading(Eigen::MatrixXd& out) {
    std::exponential_distribution<double> power(1.0 / scenario_.fading_mean_sq);
    out.resize(scenario_.num_pens(), scenario_.num_rans());
    for (int i = 0; i < out.rows(); ++i)
        for (int j = 0; j < out.cols(); ++j) out(i, j) = power(fading_rng_);
}

PenObservation Environment::observe(int pen, const PenOutcome& outcome, double norm_battery) const {
    const int m = scenario_.num_rans();
    PenObservation obs;
    obs.norm_energy.assign(m, 0.0);
    obs.norm_cost.assign(m, 0.0);
    obs.norm_latency.assign(m, 0.0);
    if (!state_.pens_alive[pen] && norm_battery <= 0.0) return obs;
    for (int j = 0; j < m; ++j) {
        obs.norm_energy[j] = outcome.links[j].norm_energy;
        obs.norm_cost[j] = outcome.links[j].norm_cost;
        obs.norm_latency[j] = outcome.links[j].norm_latency;
    }
    obs.norm_distortion = outcome.distortion;
    obs.seizure = state_.seizure_active[pen] ? 1.0 : 0.0;
    obs.norm_battery = norm_battery;
    return obs;
}

std::vector<RanObservation> Environment::observe_rans(const Eigen::MatrixXd& utilization) const {
    const int n = scenario_.num_pens();
    const int m = scenario_.num_rans();
    std::vector<RanObservation> out(m);
    for (int j = 0; j < m; ++j) {
        out[j].pen_connected.assign(n, 0.0);
        for (int i = 0; i < n; ++i)
            if (state_.pens_alive[i] && utilization(i, j) > scenario_.connection_threshold)
                out[j].pen_connected[i] = 1.0;
    }
    return out;
}

ResetResult Environment::reset(std::uint64_t seed) {
    const int n = scenario_.num_pens();
    const int m = scenario_.num_rans();
    std::seed_seq fading_seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 1u};
    std::seed_seq seizure_seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 2u};
    fading_rng_.seed(fading_seq);
    seizure_rng_.seed(seizure_seq);

    state_ = WorldState{};
    state_.battery_j.resize(n);
    for (int i = 0; i < n; ++i) state_.battery_j[i] = scenario_.pens[i].battery_capacity_j;
    state_.seizure_active.assign(n, false);
    state_.seizure_remaining.assign(n, 0);
    state_.pens_alive.assign(n, true);
    state_.last_utilization = Eigen::MatrixXd::Constant(n, m, 1.0 / m);
    state_.last_bw_fractions = Eigen::MatrixXd::Constant(n, m, 1.0 / n);
    state_.last_ratios.assign(n, scenario_.ratio_init);

    // Placeholder observation as if the uniform default decision had been
    // played on an independent channel draw.
    Eigen::MatrixXd placeholder_fading;
    draw_fading(placeholder_fading);
    draw_fading(state_.fading_mag_sq);

    ResetResult result;
    result.pen_obs.reserve(n);
    for (int i = 0; i < n; ++i) {
        PenAction action{std::vector<double>(m, 1.0 / m), scenario_.ratio_init};
        std::vector<double> bw(m, 1.0 / n);
        std::vector<double> fading(m);
        for (int j = 0; j < m; ++j) fading[j] = placeholder_fading(i, j);
        const auto outcome = evaluate_pen(scenario_, i, action, bw, fading);
        result.pen_obs.push_back(observe(i, outcome, 1.0));
    }
    result.ran_obs = observe_rans(state_.last_utilization);
    return result;
}

StepResult Environment::step(std::span<const PenAction> pen_actions, std::span<const RanAction> ran_actions) {
    const int n = scenario_.num_pens();
    const int m = scenario_.num_rans();
    if (static_cast<int>(pen_actions.size()) != n)
        throw std::invalid_argument("step: expected " + std::to_string(n) + " PEN actions");
    if (static_cast<int>(ran_actions.size()) != m)
        throw std::invalid_argument("step: expected " + std::to_string(m) + " RAN actions");
    Eigen::MatrixXd utilization(n, m);
    Eigen::MatrixXd bw(n, m);
    for (int i = 0; i < n; ++i) {
        const auto& a = pen_actions[i];
        if (static_cast<int>(a.utilization.size()) != m)
            throw std::invalid_argument("step: PEN action utilization must have width " + std::to_string(m));
        check_simplex(a.utilization, "PEN " + std::to_string(i) + " utilization");
        if (!(a.ratio >= 0.0 && a.ratio <= scenario_.ratio_max()))
            throw std::invalid_argument("step: compression ratio outside [0, ratio_max]");
        for (int j = 0; j < m; ++j) utilization(i, j) = std::max(0.0, a.utilization[j]);
    }
    for (int j = 0; j < m; ++j) {
        const auto& a = ran_actions[j];
        if (static_cast<int>(a.bw_fractions.size()) != n)
            throw std::invalid_argument("step: RAN action must have width " + std::to_string(n));
        check_simplex(a.bw_fractions, "RAN " + std::to_string(j) + " bandwidth");
        for (int i = 0; i < n; ++i) bw(i, j) = std::max(0.0, a.bw_fractions[i]);
    }

    StepResult result;
    result.pen_rewards.assign(n, 0.0);
    result.ran_rewards.assign(m, 0.0);
    result.pen_done.assign(n, false);
    result.violations.resize(n);
    result.info.resize(n);
    std::vector<PenOutcome> outcomes(n);
    std::vector<double> norm_battery(n, 0.0);
    std::vector<bool> alive_before = state_.pens_alive;

    for (int i = 0; i < n; ++i) {
        auto& info = result.info[i];
        if (!alive_before[i]) {
            outcomes[i].links.resize(m);
            continue;
        }
        std::vector<double> bw_row(m);
        std::vector<double> fading_row(m);
        for (int j = 0; j < m; ++j) {
            bw_row[j] = bw(i, j);
            fading_row[j] = state_.fading_mag_sq(i, j);
        }
        PenAction action{std::vector<double>(m), pen_actions[i].ratio};
        for (int j = 0; j < m; ++j) action.utilization[j] = utilization(i, j);
        auto& outcome = outcomes[i] = evaluate_pen(scenario_, i, action, bw_row, fading_row);

        const auto battery = update_battery(state_.battery_j[i], outcome.total_energy_j,
                                            scenario_.pens[i].battery_capacity_j);
        state_.battery_j[i] = battery.level_j;
        norm_battery[i] = battery.normalized;

        std::vector<double> e(m), c(m), l(m);
        for (int j = 0; j < m; ++j) {
            const auto& link = outcome.links[j];
            e[j] = link.norm_energy;
            c[j] = link.norm_cost;
            l[j] = link.norm_latency;
            state_.clamps.energy += link.clamp_energy;
            state_.clamps.cost += link.clamp_cost;
            state_.clamps.latency += link.clamp_latency;
        }
        if (outcome.distortion_clamped) ++state_.clamps.distortion;

        const bool seizure = state_.seizure_active[i];
        const RewardInputs inputs{action.utilization, e, c, l, outcome.distortion, battery.normalized};
        result.violations[i] = outcome.violations;
        result.pen_rewards[i] = pen_reward(scenario_.pens[i].weights_normal, scenario_.pens[i].weights_seizure,
                                           seizure, inputs, !outcome.violations.empty());

        info.alive = true;
        info.seizure = seizure;
        info.ratio = action.ratio;
        info.bits = outcome.compressed_bits;
        info.energy_j = outcome.total_energy_j;
        info.distortion = outcome.distortion;
        for (int j = 0; j < m; ++j) {
            const auto& link = outcome.links[j];
            if (!link.active) continue;
            info.latency_s = std::max(info.latency_s, link.latency_s);
            info.cost += link.cost;
            info.norm_latency_sum += link.norm_latency;
        }

        if (battery.level_j <= 0.0) state_.pens_alive[i] = false;
        result.pen_done[i] = !state_.pens_alive[i];
    }

    for (int j = 0; j < m; ++j) {
        std::vector<double> connected(n, 0.0);
        bool feasible = true;
        for (int i = 0; i < n; ++i) {
            if (!alive_before[i] || !(utilization(i, j) > scenario_.connection_threshold)) continue;
            connected[i] = 1.0;
            const auto& link = outcomes[i].links[j];
            if (link.zero_bandwidth || link.over_capacity) feasible = false;
        }
        result.ran_rewards[j] = ran_reward(connected, result.pen_rewards, feasible);
    }

    // Dead PENs carry no decision forward.
    for (int i = 0; i < n; ++i) {
        if (!alive_before[i]) {
            utilization.row(i).setZero();
            bw.row(i).setZero();
        }
    }
    state_.last_utilization = utilization;
    state_.last_bw_fractions = bw;
    for (int i = 0; i < n; ++i)
        if (alive_before[i]) state_.last_ratios[i] = pen_actions[i].ratio;
    ++state_.step;

    advance_seizure(state_, scenario_, seizure_rng_);
    draw_fading(state_.fading_mag_sq);

    result.pen_obs.reserve(n);
    for (int i = 0; i < n; ++i) {
        if (!state_.pens_alive[i]) {
            PenObservation zero;
            zero.norm_energy.assign(m, 0.0);
            zero.norm_cost.assign(m, 0.0);
            zero.norm_latency.assign(m, 0.0);
            result.pen_obs.push_back(std::move(zero));
        } else {
            result.pen_obs.push_back(observe(i, outcomes[i], norm_battery[i]));
        }
    }
    result.ran_obs = observe_rans(utilization);
    result.done = std::none_of(state_.pens_alive.begin(), state_.pens_alive.end(), [](bool a) { return a; });
    return result;
}

}  // namespace multirat::env
