#include "multirat/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace multirat::baselines {

void GridSpec::validate() const {
    if (utilization_resolution < 2) throw std::invalid_argument("baselines.utilization_resolution: must be >= 2");
    if (ratio_resolution < 2) throw std::invalid_argument("baselines.ratio_resolution: must be >= 2");
}

void BaselineConfig::validate() const {
    grid.validate();
    if (onsra_max_rounds < 1) throw std::invalid_argument("baselines.onsra_max_rounds: must be >= 1");
    if (!(onsra_tol >= 0.0)) throw std::invalid_argument("baselines.onsra_tol: must be >= 0");
    if (recompute_every_steps < 0) throw std::invalid_argument("baselines.recompute_every_steps: must be >= 0");
    if (!(planning_fading_mag_sq > 0.0))
        throw std::invalid_argument("baselines.planning_fading_mag_sq: must be positive");
}

PlanningContext PlanningContext::nominal(const env::Scenario& scenario, double fading_mag_sq) {
    PlanningContext ctx;
    ctx.scenario = &scenario;
    ctx.fading_mag_sq = Eigen::MatrixXd::Constant(scenario.num_pens(), scenario.num_rans(), fading_mag_sq);
    ctx.seizure.assign(scenario.num_pens(), false);
    ctx.alive.assign(scenario.num_pens(), true);
    return ctx;
}

std::vector<std::vector<double>> simplex_grid(int parts, int resolution) {
    if (parts < 1 || resolution < 2) throw std::invalid_argument("simplex grid: need parts >= 1 and resolution >= 2");
    const int units = resolution - 1;
    std::vector<std::vector<double>> out;
    std::vector<int> counts(parts, 0);
    // Lexicographic order: earlier coordinates vary slowest.
    std::function<void(int, int)> rec = [&](int k, int left) {
        if (k == parts - 1) {
            counts[k] = left;
            std::vector<double> p(parts);
            for (int c = 0; c < parts; ++c) p[c] = static_cast<double>(counts[c]) / units;
            out.push_back(std::move(p));
            return;
        }
        for (int u = 0; u <= left; ++u) {
            counts[k] = u;
            rec(k + 1, left - u);
        }
    };
    rec(0, units);
    return out;
}

std::vector<double> ratio_grid(double ratio_max, int resolution) {
    if (resolution < 2) throw std::invalid_argument("ratio grid: resolution must be >= 2");
    std::vector<double> g(resolution);
    for (int k = 0; k < resolution; ++k) g[k] = ratio_max * k / (resolution - 1);
    return g;
}

std::vector<double> project_to_simplex(std::span<const double> v) {
    if (v.empty()) throw std::invalid_argument("simplex projection: empty vector");
    std::vector<double> u(v.begin(), v.end());
    std::sort(u.begin(), u.end(), std::greater<>());
    double cumulative = 0.0, tau = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        cumulative += u[k];
        const double t = (cumulative - 1.0) / static_cast<double>(k + 1);
        if (u[k] - t > 0.0) tau = t;
    }
    std::vector<double> out(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) out[k] = std::max(v[k] - tau, 0.0);
    return out;
}

double pen_planning_objective(const PlanningContext& ctx, int pen, std::span<const double> utilization, double ratio,
                              std::span<const double> bw_row) {
    const auto& sc = *ctx.scenario;
    const env::PenAction action{std::vector<double>(utilization.begin(), utilization.end()), ratio};
    std::vector<double> fading(sc.num_rans());
    for (int j = 0; j < sc.num_rans(); ++j) fading[j] = ctx.fading_mag_sq(pen, j);
    const auto outcome = env::evaluate_pen(sc, pen, action, bw_row, fading);
    return env::pen_objective(sc, pen, ctx.seizure[pen], action, outcome) +
           kViolationPenalty * outcome.violation_amount;
}

namespace {

std::vector<double> row_of(const Eigen::MatrixXd& m, int i) {
    std::vector<double> r(m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j) r[j] = m(i, j);
    return r;
}

bool pen_feasible(const PlanningContext& ctx, int pen, std::span<const double> utilization, double ratio,
                  std::span<const double> bw_row) {
    const auto& sc = *ctx.scenario;
    const env::PenAction action{std::vector<double>(utilization.begin(), utilization.end()), ratio};
    std::vector<double> fading(sc.num_rans());
    for (int j = 0; j < sc.num_rans(); ++j) fading[j] = ctx.fading_mag_sq(pen, j);
    return env::evaluate_pen(sc, pen, action, bw_row, fading).violation_amount == 0.0;
}

BaselineDecision equal_shares(const PlanningContext& ctx) {
    const auto& sc = *ctx.scenario;
    const int n = sc.num_pens(), m = sc.num_rans();
    BaselineDecision d;
    d.bw_fractions = Eigen::MatrixXd::Constant(n, m, 1.0 / n);
    d.utilization = Eigen::MatrixXd::Constant(n, m, 1.0 / m);
    d.ratios.assign(n, 0.0);
    d.flagged.assign(n, false);
    return d;
}

void check_context(const PlanningContext& ctx) {
    if (!ctx.scenario) throw std::invalid_argument("planning context: no scenario");
    const auto& sc = *ctx.scenario;
    if (ctx.fading_mag_sq.rows() != sc.num_pens() || ctx.fading_mag_sq.cols() != sc.num_rans() ||
        static_cast<int>(ctx.seizure.size()) != sc.num_pens() || static_cast<int>(ctx.alive.size()) != sc.num_pens())
        throw std::invalid_argument("planning context: shape mismatch with scenario");
}

}  // namespace

double global_objective(const PlanningContext& ctx, const BaselineDecision& d) {
    double total = 0.0;
    for (int i = 0; i < ctx.scenario->num_pens(); ++i) {
        if (!ctx.alive[i]) continue;
        total += pen_planning_objective(ctx, i, row_of(d.utilization, i), d.ratios[i], row_of(d.bw_fractions, i));
    }
    return total;
}

PenSearchResult search_pen(const PlanningContext& ctx, int pen, std::span<const double> bw_row, const GridSpec& grid) {
    check_context(ctx);
    grid.validate();
    const auto& sc = *ctx.scenario;
    const auto shares = simplex_grid(sc.num_rans(), grid.utilization_resolution);
    const auto ratios = ratio_grid(sc.ratio_max(), grid.ratio_resolution);
    PenSearchResult best;
    best.objective = std::numeric_limits<double>::infinity();
    for (double kappa : ratios) {
        for (const auto& p : shares) {
            const double f = pen_planning_objective(ctx, pen, p, kappa, bw_row);
            if (f < best.objective) {
                best.objective = f;
                best.utilization = p;
                best.ratio = kappa;
            }
        }
    }
    best.feasible = pen_feasible(ctx, pen, best.utilization, best.ratio, bw_row);
    return best;
}

BaselineDecision heuristic_policy(const PlanningContext& ctx, const GridSpec& grid) {
    check_context(ctx);
    grid.validate();
    const auto& sc = *ctx.scenario;
    auto d = equal_shares(ctx);
    const auto ratios = ratio_grid(sc.ratio_max(), grid.ratio_resolution);
    for (int i = 0; i < sc.num_pens(); ++i) {
        const auto p = row_of(d.utilization, i);
        const auto bw = row_of(d.bw_fractions, i);
        d.ratios[i] = sc.ratio_max();
        d.flagged[i] = true;
        for (double kappa : ratios) {
            if (pen_feasible(ctx, i, p, kappa, bw)) {
                d.ratios[i] = kappa;
                d.flagged[i] = false;
                break;
            }
        }
    }
    return d;
}

BaselineDecision aansc_policy(const PlanningContext& ctx, const GridSpec& grid) {
    check_context(ctx);
    auto d = equal_shares(ctx);
    for (int i = 0; i < ctx.scenario->num_pens(); ++i) {
        const auto r = search_pen(ctx, i, row_of(d.bw_fractions, i), grid);
        for (std::size_t j = 0; j < r.utilization.size(); ++j) d.utilization(i, j) = r.utilization[j];
        d.ratios[i] = r.ratio;
        d.flagged[i] = !r.feasible;
    }
    return d;
}

namespace {

// Projected gradient descent on one RAN's bandwidth column. Only moves that
// lower the global objective are accepted.
double optimize_column(const PlanningContext& ctx, BaselineDecision& d, int ran, double current, double tol) {
    const int n = ctx.scenario->num_pens();
    constexpr double kFdStep = 1e-6;
    constexpr int kMaxIterations = 50;
    for (int it = 0; it < kMaxIterations; ++it) {
        std::vector<double> col(n), grad(n, 0.0);
        for (int i = 0; i < n; ++i) col[i] = d.bw_fractions(i, ran);
        for (int i = 0; i < n; ++i) {
            if (!ctx.alive[i]) continue;
            const double lo = std::max(0.0, col[i] - kFdStep);
            const double hi = std::min(1.0, col[i] + kFdStep);
            const auto bw = row_of(d.bw_fractions, i);
            auto eval_at = [&](double value) {
                auto b = bw;
                b[ran] = value;
                return pen_planning_objective(ctx, i, row_of(d.utilization, i), d.ratios[i], b);
            };
            grad[i] = (eval_at(hi) - eval_at(lo)) / (hi - lo);
            if (!std::isfinite(grad[i])) throw std::domain_error("non-finite objective gradient");
        }
        bool moved = false;
        for (double step = 1.0; step > 1e-12; step *= 0.5) {
            std::vector<double> trial(n);
            for (int i = 0; i < n; ++i) trial[i] = col[i] - step * grad[i];
            const auto projected = project_to_simplex(trial);
            BaselineDecision cand = d;
            for (int i = 0; i < n; ++i) cand.bw_fractions(i, ran) = projected[i];
            const double f = global_objective(ctx, cand);
            if (f < current) {
                const double gain = current - f;
                d = std::move(cand);
                current = f;
                moved = gain > tol;
                break;
            }
        }
        if (!moved) break;
    }
    return current;
}

}  // namespace

OnsraResult onsra_policy(const PlanningContext& ctx, const GridSpec& grid, int max_rounds, double tol) {
    check_context(ctx);
    if (max_rounds < 1) throw std::invalid_argument("onsra: max_rounds must be >= 1");
    const auto& sc = *ctx.scenario;
    OnsraResult res;
    res.decision = aansc_policy(ctx, grid);
    double current = global_objective(ctx, res.decision);
    if (!std::isfinite(current)) throw std::domain_error("onsra: non-finite objective at initialization");
    res.objective_trace.push_back(current);
    for (int round = 1; round <= max_rounds; ++round) {
        const double before = current;
        try {
            for (int j = 0; j < sc.num_rans(); ++j) current = optimize_column(ctx, res.decision, j, current, tol);
            for (int i = 0; i < sc.num_pens(); ++i) {
                if (!ctx.alive[i]) continue;
                const auto bw = row_of(res.decision.bw_fractions, i);
                const auto r = search_pen(ctx, i, bw, grid);
                const double old_f =
                    pen_planning_objective(ctx, i, row_of(res.decision.utilization, i), res.decision.ratios[i], bw);
                if (r.objective < old_f) {
                    for (std::size_t j = 0; j < r.utilization.size(); ++j)
                        res.decision.utilization(i, j) = r.utilization[j];
                    res.decision.ratios[i] = r.ratio;
                }
                res.decision.flagged[i] =
                    !pen_feasible(ctx, i, row_of(res.decision.utilization, i), res.decision.ratios[i], bw);
            }
            current = global_objective(ctx, res.decision);
        } catch (const std::exception& e) {
            throw std::runtime_error("onsra round " + std::to_string(round) + ": " + e.what());
        }
        if (!std::isfinite(current))
            throw std::domain_error("onsra round " + std::to_string(round) + ": non-finite objective");
        res.objective_trace.push_back(current);
        res.rounds = round;
        if (before - current < tol) break;
    }
    return res;
}

PolicyTag parse_policy_tag(const std::string& tag) {
    if (tag == "heuristic") return PolicyTag::heuristic;
    if (tag == "aansc") return PolicyTag::aansc;
    if (tag == "onsra") return PolicyTag::onsra;
    throw std::invalid_argument("unknown policy '" + tag + "'; valid tags: " + kValidPolicyTags);
}

std::string to_string(PolicyTag tag) {
    switch (tag) {
        case PolicyTag::heuristic: return "heuristic";
        case PolicyTag::aansc: return "aansc";
        case PolicyTag::onsra: return "onsra";
    }
    return "?";
}

BaselineDecision decide(PolicyTag tag, const PlanningContext& ctx, const BaselineConfig& cfg) {
    switch (tag) {
        case PolicyTag::heuristic: return heuristic_policy(ctx, cfg.grid);
        case PolicyTag::aansc: return aansc_policy(ctx, cfg.grid);
        case PolicyTag::onsra: return onsra_policy(ctx, cfg.grid, cfg.onsra_max_rounds, cfg.onsra_tol).decision;
    }
    throw std::logic_error("unhandled policy tag");
}

std::vector<metrics::EpisodeMetrics> run_baseline(PolicyTag tag, const env::Scenario& scenario,
                                                  const BaselineConfig& cfg, int episodes, std::uint64_t seed,
                                                  int max_steps) {
    cfg.validate();
    if (episodes <= 0 || max_steps <= 0)
        throw std::invalid_argument("run_baseline: episodes and max_steps must be positive");
    env::Environment environment(scenario);
    const int n = scenario.num_pens(), m = scenario.num_rans();

    std::vector<metrics::EpisodeMetrics> out;
    for (int k = 0; k < episodes; ++k) {
        BaselineDecision cached;
        std::vector<bool> seen_seizure, seen_alive;
        int since = 0;
        bool have = false;
        const metrics::JointPolicy policy = [&](const env::Environment& e, const metrics::Observations&) {
            const auto& st = e.state();
            const bool periodic = cfg.recompute_every_steps > 0 && since >= cfg.recompute_every_steps;
            if (!have || periodic || st.seizure_active != seen_seizure || st.pens_alive != seen_alive) {
                auto ctx = PlanningContext::nominal(scenario, cfg.planning_fading_mag_sq);
                if (cfg.fading_aware) ctx.fading_mag_sq = st.fading_mag_sq;
                ctx.seizure = st.seizure_active;
                ctx.alive = st.pens_alive;
                cached = decide(tag, ctx, cfg);
                seen_seizure = st.seizure_active;
                seen_alive = st.pens_alive;
                since = 0;
                have = true;
            }
            ++since;
            metrics::JointAction a;
            for (int i = 0; i < n; ++i) a.pens.push_back({row_of(cached.utilization, i), cached.ratios[i]});
            for (int j = 0; j < m; ++j) {
                env::RanAction r;
                for (int i = 0; i < n; ++i) r.bw_fractions.push_back(cached.bw_fractions(i, j));
                a.rans.push_back(std::move(r));
            }
            return a;
        };
        out.push_back(metrics::run_episode(environment, policy, metrics::episode_seed(seed, k), max_steps, k));
    }
    return out;
}

}  // namespace multirat::baselines
