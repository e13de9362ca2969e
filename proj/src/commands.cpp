#include "multirat/commands.hpp"

#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "multirat/baselines.hpp"
#include "multirat/checkpoint.hpp"
#include "multirat/config.hpp"
#include "multirat/log.hpp"
#include "multirat/marl.hpp"

namespace multirat::harness {

namespace {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Loaded {
    ExperimentConfig config;
    std::uint32_t hash = 0;
};

Loaded load(const CommandOptions& o) {
    if (o.config.empty()) throw UsageError("--config is required");
    Loaded l;
    l.config = load_config(o.config);
    l.hash = config_hash(l.config);
    return l;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    return out;
}

std::string hex(std::uint32_t v) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%08x", v);
    return buf;
}

void write_manifest(const std::filesystem::path& out_dir, const std::string& command, const Loaded& l,
                    const std::vector<std::pair<std::string, std::string>>& extra) {
    auto out = open_out(out_dir / "manifest");
    out << "command = " << command << "\n"
        << "version = " << MULTIRAT_VERSION << "\n"
        << "config_hash = " << hex(l.hash) << "\n"
        << "train_seed = " << l.config.train.seed << "\n"
        << "eval_seed = " << l.config.eval.seed << "\n";
    for (const auto& [k, v] : extra) out << k << " = " << v << "\n";
    // Canonical config alongside, so the run can be repeated from the output directory.
    auto cfg = open_out(out_dir / "config.cfg");
    cfg << serialize_config(l.config);
}

template <typename Body>
int guarded(const char* name, Body&& body) {
    try {
        init_logging();
        body();
        return kExitOk;
    } catch (const UsageError& e) {
        log_error(std::string(name) + ": " + e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        log_error(std::string(name) + ": " + e.what());
        return kExitFailure;
    }
}

void prepare_out(const std::filesystem::path& dir) { std::filesystem::create_directories(dir); }

std::pair<marl::Team, marl::Team> load_teams(const CommandOptions& o, const Loaded& l) {
    if (o.checkpoint.empty()) throw UsageError("--checkpoint is required");
    const auto ckpt = load_checkpoint(o.checkpoint);
    auto pens = marl::make_pen_team(l.config.scenario, l.config.network, 1, 0);
    auto rans = marl::make_ran_team(l.config.scenario, l.config.network, 1, 0);
    apply_checkpoint(ckpt, l.hash, o.allow_config_mismatch, pens, rans);
    return {std::move(pens), std::move(rans)};
}

std::vector<metrics::EpisodeMetrics> run_learned(const Loaded& l, const marl::Team& pens, const marl::Team& rans) {
    return marl::evaluate(pens, rans, l.config.scenario, l.config.eval.episodes, l.config.eval.seed,
                          l.config.eval.max_steps);
}

std::vector<metrics::EpisodeMetrics> run_tag(const Loaded& l, baselines::PolicyTag tag) {
    return baselines::run_baseline(tag, l.config.scenario, l.config.baselines, l.config.eval.episodes,
                                   l.config.eval.seed, l.config.eval.max_steps);
}

void log_summary(const std::string& policy, const std::vector<metrics::EpisodeMetrics>& runs) {
    double reward = 0.0, hours = 0.0;
    for (const auto& m : runs) {
        reward += m.mean_pen_reward();
        hours += m.mean_lifetime_hours();
    }
    const double n = static_cast<double>(runs.size());
    std::ostringstream os;
    os << policy << ": mean reward " << reward / n << ", mean lifetime " << hours / n << " h";
    log_info(os.str());
}

}  // namespace

std::vector<std::pair<std::string, double>> comparison_axes(const metrics::EpisodeMetrics& m) {
    return {{"reward", m.mean_pen_reward()}, {"lifetime_hours", m.mean_lifetime_hours()},
            {"energy_j", m.mean_energy_j},   {"latency_s", m.mean_latency_s},
            {"cost", m.mean_cost},           {"distortion", m.mean_distortion}};
}

int cmd_train(const CommandOptions& o) {
    return guarded("train", [&] {
        auto l = load(o);
        if (o.seed) l.config.train.seed = *o.seed;
        prepare_out(o.out_dir);
        auto csv = open_out(o.out_dir / "training.csv");
        csv << kTrainingCsvHeader << "\n";
        const int every = std::max(1, l.config.train.episodes / 20);
        auto result = marl::train(l.config.scenario, l.config.train, l.config.network,
                                  [&](int ep, const std::vector<marl::TrainingLogRow>& rows) {
                                      double pen_sum = 0.0;
                                      int pen_count = 0;
                                      for (const auto& r : rows) {
                                          csv << r.episode << ',' << r.team << ',' << r.agent << ','
                                              << metrics::format_double(r.reward) << ','
                                              << metrics::format_double(r.critic_loss) << ','
                                              << metrics::format_double(r.noise_scale) << '\n';
                                          if (r.team == "pen") {
                                              pen_sum += r.reward;
                                              ++pen_count;
                                          }
                                      }
                                      if ((ep + 1) % every == 0) {
                                          std::ostringstream os;
                                          os << "episode " << ep + 1 << "/" << l.config.train.episodes
                                             << " mean PEN return " << pen_sum / std::max(1, pen_count);
                                          log_info(os.str());
                                      }
                                  });
        csv.flush();
        if (!csv) throw std::runtime_error("failed writing training.csv");
        save_checkpoint(o.out_dir / "checkpoint",
                        make_checkpoint(result.pens, result.rans, l.hash, result.rng_state));
        write_manifest(o.out_dir, "train", l, {{"episodes", std::to_string(l.config.train.episodes)}});
        log_info("wrote " + (o.out_dir / "training.csv").string() + " and checkpoint");
    });
}

int cmd_eval(const CommandOptions& o) {
    return guarded("eval", [&] {
        auto l = load(o);
        if (o.seed) l.config.eval.seed = *o.seed;
        const auto [pens, rans] = load_teams(o, l);
        prepare_out(o.out_dir);
        const auto runs = run_learned(l, pens, rans);
        metrics::write_eval_csv(o.out_dir / "eval.csv", {{kLearnedPolicyName, runs}});
        write_manifest(o.out_dir, "eval", l, {{"checkpoint", o.checkpoint.string()}});
        log_summary(kLearnedPolicyName, runs);
    });
}

int cmd_baseline(const CommandOptions& o) {
    return guarded("baseline", [&] {
        baselines::PolicyTag tag;
        try {
            tag = baselines::parse_policy_tag(o.policy);
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
        auto l = load(o);
        if (o.seed) l.config.eval.seed = *o.seed;
        prepare_out(o.out_dir);
        const auto runs = run_tag(l, tag);
        metrics::write_eval_csv(o.out_dir / "eval.csv", {{o.policy, runs}});
        write_manifest(o.out_dir, "baseline", l, {{"policy", o.policy}});
        log_summary(o.policy, runs);
    });
}

int cmd_compare(const CommandOptions& o) {
    return guarded("compare", [&] {
        auto l = load(o);
        if (o.seed) l.config.eval.seed = *o.seed;
        const auto [pens, rans] = load_teams(o, l);
        prepare_out(o.out_dir);
        std::vector<std::pair<std::string, std::vector<metrics::EpisodeMetrics>>> runs;
        runs.emplace_back(kLearnedPolicyName, run_learned(l, pens, rans));
        for (auto tag : {baselines::PolicyTag::heuristic, baselines::PolicyTag::aansc, baselines::PolicyTag::onsra})
            runs.emplace_back(baselines::to_string(tag), run_tag(l, tag));
        metrics::write_eval_csv(o.out_dir / "eval.csv", runs);

        auto compare = open_out(o.out_dir / "compare.csv");
        compare << kCompareCsvHeader << "\n";
        auto summary = open_out(o.out_dir / "summary.csv");
        summary << kSummaryCsvHeader << "\n";
        for (const auto& [policy, episodes] : runs) {
            std::vector<std::pair<std::string, double>> totals;
            for (const auto& m : episodes) {
                const auto axes = comparison_axes(m);
                if (totals.empty()) {
                    totals = axes;
                    for (auto& t : totals) t.second = 0.0;
                }
                for (std::size_t k = 0; k < axes.size(); ++k) {
                    compare << policy << ',' << m.seed << ',' << axes[k].first << ','
                            << metrics::format_double(axes[k].second) << '\n';
                    totals[k].second += axes[k].second;
                }
            }
            summary << policy;
            for (const auto& t : totals)
                summary << ',' << metrics::format_double(t.second / static_cast<double>(episodes.size()));
            summary << '\n';
            log_summary(policy, episodes);
        }
        compare.flush();
        summary.flush();
        if (!compare || !summary) throw std::runtime_error("failed writing comparison outputs");
        write_manifest(o.out_dir, "compare", l, {{"checkpoint", o.checkpoint.string()}});
    });
}

}  // namespace multirat::harness
