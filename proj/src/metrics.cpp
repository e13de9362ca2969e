#include "multirat/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace multirat::metrics {

namespace {

double mean_of(const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double safe_div(double sum, int count) { return count > 0 ? sum / count : 0.0; }

}  // namespace

double EpisodeMetrics::mean_pen_reward() const { return mean_of(pen_rewards); }
double EpisodeMetrics::mean_ran_reward() const { return mean_of(ran_rewards); }
double EpisodeMetrics::mean_lifetime_hours() const { return mean_of(lifetime_hours); }
double EpisodeMetrics::mean_lifetime_steps() const {
    std::vector<double> v(lifetime_steps.begin(), lifetime_steps.end());
    return mean_of(v);
}

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream) {
    // splitmix64 finalizer over the combined words
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t episode_seed(std::uint64_t base, int episode) { return base + static_cast<std::uint64_t>(episode); }

EpisodeMetrics run_episode(env::Environment& environment, const JointPolicy& policy, std::uint64_t seed,
                           int max_steps, int episode_index) {
    const auto& scenario = environment.scenario();
    const int n = scenario.num_pens();
    const int m = scenario.num_rans();
    auto reset = environment.reset(seed);
    Observations obs{std::move(reset.pen_obs), std::move(reset.ran_obs)};

    EpisodeMetrics out;
    out.episode = episode_index;
    out.seed = seed;
    out.pen_rewards.assign(n, 0.0);
    out.ran_rewards.assign(m, 0.0);
    out.lifetime_steps.assign(n, 0);

    double energy = 0.0, latency = 0.0, cost = 0.0, distortion = 0.0, ratio = 0.0;
    double s_latency = 0.0, s_distortion = 0.0, s_ratio = 0.0, s_norm_latency = 0.0;
    double n_ratio = 0.0, n_norm_latency = 0.0;
    int alive_steps = 0;

    for (int t = 0; t < max_steps; ++t) {
        const auto action = policy(environment, obs);
        auto result = environment.step(action.pens, action.rans);
        ++out.steps;
        for (int i = 0; i < n; ++i) {
            out.pen_rewards[i] += result.pen_rewards[i];
            const auto& info = result.info[i];
            if (!info.alive) continue;
            ++out.lifetime_steps[i];
            ++alive_steps;
            energy += info.energy_j;
            latency += info.latency_s;
            cost += info.cost;
            distortion += info.distortion;
            ratio += info.ratio;
            if (!result.violations[i].empty()) ++out.violations;
            if (info.seizure) {
                ++out.seizure_steps;
                s_latency += info.latency_s;
                s_distortion += info.distortion;
                s_ratio += info.ratio;
                s_norm_latency += info.norm_latency_sum;
            } else {
                ++out.normal_steps;
                n_ratio += info.ratio;
                n_norm_latency += info.norm_latency_sum;
            }
        }
        for (int j = 0; j < m; ++j) out.ran_rewards[j] += result.ran_rewards[j];
        obs.pens = std::move(result.pen_obs);
        obs.rans = std::move(result.ran_obs);
        if (result.done) break;
    }

    out.lifetime_hours.resize(n);
    for (int i = 0; i < n; ++i)
        out.lifetime_hours[i] = out.lifetime_steps[i] * scenario.step_duration_s / 3600.0;
    out.mean_energy_j = safe_div(energy, alive_steps);
    out.mean_latency_s = safe_div(latency, alive_steps);
    out.mean_cost = safe_div(cost, alive_steps);
    out.mean_distortion = safe_div(distortion, alive_steps);
    out.mean_ratio = safe_div(ratio, alive_steps);
    out.seizure_mean_latency_s = safe_div(s_latency, out.seizure_steps);
    out.seizure_mean_distortion = safe_div(s_distortion, out.seizure_steps);
    out.seizure_mean_ratio = safe_div(s_ratio, out.seizure_steps);
    out.seizure_mean_norm_latency = safe_div(s_norm_latency, out.seizure_steps);
    out.normal_mean_ratio = safe_div(n_ratio, out.normal_steps);
    out.normal_mean_norm_latency = safe_div(n_norm_latency, out.normal_steps);
    return out;
}

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    if (res.ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
    return {buf, res.ptr};
}

std::string eval_csv_row(const std::string& policy, const EpisodeMetrics& m) {
    std::string row = policy;
    auto add = [&row](const std::string& v) {
        row += ',';
        row += v;
    };
    add(std::to_string(m.episode));
    add(std::to_string(m.seed));
    add(std::to_string(m.steps));
    add(format_double(m.mean_pen_reward()));
    add(format_double(m.mean_ran_reward()));
    add(format_double(m.mean_lifetime_steps()));
    add(format_double(m.mean_lifetime_hours()));
    add(format_double(m.mean_energy_j));
    add(format_double(m.mean_latency_s));
    add(format_double(m.mean_cost));
    add(format_double(m.mean_distortion));
    add(format_double(m.mean_ratio));
    add(std::to_string(m.seizure_steps));
    add(format_double(m.seizure_mean_latency_s));
    add(format_double(m.seizure_mean_distortion));
    add(format_double(m.seizure_mean_ratio));
    add(format_double(m.normal_mean_ratio));
    add(format_double(m.seizure_mean_norm_latency));
    add(format_double(m.normal_mean_norm_latency));
    add(std::to_string(m.violations));
    return row;
}

void write_eval_csv(const std::filesystem::path& path,
                    const std::vector<std::pair<std::string, std::vector<EpisodeMetrics>>>& runs) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << kEvalCsvHeader << '\n';
    for (const auto& [policy, episodes] : runs)
        for (const auto& m : episodes) out << eval_csv_row(policy, m) << '\n';
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace multirat::metrics
