#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "multirat/env.hpp"
#include "multirat/metrics.hpp"

// Comparison policies: equal-share heuristic, a per-PEN exhaustive optimizer
// (AANSC-style) and an alternating RAN/PEN optimizer (ONSRA-style).
namespace multirat::baselines {

struct GridSpec {
    int utilization_resolution = 11;  // points per simplex edge
    int ratio_resolution = 21;        // points on [0, ratio_max]

    void validate() const;
};

struct BaselineDecision {
    Eigen::MatrixXd bw_fractions;  // N x M
    Eigen::MatrixXd utilization;   // N x M
    std::vector<double> ratios;
    std::vector<bool> flagged;  // no feasible grid point for this PEN
};

// What the optimizers plan against.
struct PlanningContext {
    const env::Scenario* scenario = nullptr;
    Eigen::MatrixXd fading_mag_sq;  // N x M
    std::vector<bool> seizure;
    std::vector<bool> alive;

    static PlanningContext nominal(const env::Scenario& scenario, double fading_mag_sq = 1.0);
};

// Charge per unit of constraint violation added to the planning objective.
inline constexpr double kViolationPenalty = 1e6;

// All compositions of (resolution - 1) units over `parts` cells, as fractions.
std::vector<std::vector<double>> simplex_grid(int parts, int resolution);
std::vector<double> ratio_grid(double ratio_max, int resolution);

// Euclidean projection onto the probability simplex.
std::vector<double> project_to_simplex(std::span<const double> v);

// Penalized per-PEN objective at the given decision.
double pen_planning_objective(const PlanningContext& ctx, int pen, std::span<const double> utilization, double ratio,
                              std::span<const double> bw_row);
// Sum over alive PENs.
double global_objective(const PlanningContext& ctx, const BaselineDecision& d);

struct PenSearchResult {
    std::vector<double> utilization;
    double ratio = 0.0;
    double objective = 0.0;
    bool feasible = false;
};

// Exhaustive (P grid x kappa grid) search for one PEN at fixed bandwidth.
PenSearchResult search_pen(const PlanningContext& ctx, int pen, std::span<const double> bw_row, const GridSpec& grid);

BaselineDecision heuristic_policy(const PlanningContext& ctx, const GridSpec& grid);
BaselineDecision aansc_policy(const PlanningContext& ctx, const GridSpec& grid);

struct OnsraResult {
    BaselineDecision decision;
    std::vector<double> objective_trace;  // after initialization, then per round
    int rounds = 0;
};

OnsraResult onsra_policy(const PlanningContext& ctx, const GridSpec& grid, int max_rounds, double tol);

enum class PolicyTag { heuristic, aansc, onsra };

PolicyTag parse_policy_tag(const std::string& tag);
std::string to_string(PolicyTag tag);
inline constexpr const char* kValidPolicyTags = "heuristic|aansc|onsra";

struct BaselineConfig {
    GridSpec grid;
    int onsra_max_rounds = 50;
    double onsra_tol = 1e-9;
    // 0 = recompute on seizure or liveness changes only.
    int recompute_every_steps = 0;
    bool fading_aware = false;
    double planning_fading_mag_sq = 1.0;

    void validate() const;
};

BaselineDecision decide(PolicyTag tag, const PlanningContext& ctx, const BaselineConfig& cfg);

std::vector<metrics::EpisodeMetrics> run_baseline(PolicyTag tag, const env::Scenario& scenario,
                                                  const BaselineConfig& cfg, int episodes, std::uint64_t seed,
                                                  int max_steps);

}  // namespace multirat::baselines
