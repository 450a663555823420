#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "mabrrt/bandit.hpp"
#include "mabrrt/clustering.hpp"
#include "mabrrt/tree.hpp"
#include "mabrrt/world.hpp"

namespace mabrrt {

struct PlannerConfig {
    long total_iterations = 1000;  // K
    int n_propagations = 100;      // N_p rollouts for cluster-arm extensions
    double max_prop_duration = 0.2;  // T_p, durations drawn from (0, T_p]
    bool goal_bias_only = false;     // true -> AO-RRT baseline
    int cluster_sample_attempts = 10;  // attempt bound in cluster sampling
    // Perturbation half-width for cluster candidates; unset derives
    // delta2 / 2 per cluster.
    std::optional<double> perturbation_width;
    BanditPolicy policy = BanditPolicy::kKfManb;
    KfManbConfig kf;
    ClusteringConfig clustering;
    double goal_bias = 0.05;   // AO-RRT goal-sampling probability
    int max_arm_retries = 20;  // arm selections before the uniform fallback
    std::uint64_t rng_seed = 0;
};

struct PlanResult {
    std::optional<Path> best_path;
    double best_cost = std::numeric_limits<double>::infinity();
    std::vector<std::pair<long, double>> cost_trace;  // (iteration, best cost)
    int runs_completed = 0;
    double mean_iter_seconds = 0.0;
    double max_iter_seconds = 0.0;
};

/// Per-iteration record stream for diagnostics and the CLI sink.
struct IterationRecord {
    long iteration = 0;
    int arm = -1;  // 0-based; -1 when the iteration produced no transition
    double reward = 0.0;
    double best_cost = std::numeric_limits<double>::infinity();
};

struct PlannerHooks {
    std::function<void(const IterationRecord&)> on_iteration;
    // After every re-clustering: (cluster count N, arm count M).
    std::function<void(int, int)> on_recluster;
    // Every bandit arm selection, in order (includes retries).
    std::function<void(int)> on_arm_selected;
    // Per-cluster dump after a clustering pass.
    std::function<void(const ClusterSet&)> on_clusters;
};

struct Extension {
    State x_c;
    Control u;
    double d = 0.0;
};

/// Candidate (parent, target) pair drawn from a cluster, or nullopt when no
/// candidate met the distance gates.
std::optional<std::pair<NodeId, State>> sample_cluster(
    const Cluster& cluster, const TransitionDatabase& db, const SearchTree& tree,
    const Scenario& scenario, const PlannerConfig& config, Rng& rng);

/// Forward-propagation extension. Arms 1 and 2 (indices 0/1) draw a single
/// random control and duration; cluster arms draw n_propagations rollouts and
/// keep the valid child closest to x_trg (ties to the lowest draw index).
/// Returns nullopt when every rollout is invalid.
std::optional<Extension> sample_to(const State& x_p, const State& x_trg,
                                   int arm_index, const Scenario& scenario,
                                   const PlannerConfig& config, Rng& rng);

struct SampleOutcome {
    std::optional<Transition> transition;
    NodeId parent = kNoNode;
    int arm = 0;  // 0-based arm index the extension was attempted under
};

/// One bandit-driven sampling round: selects arms until a (parent, target)
/// pair is found (failed cluster draws feed reward 0 back immediately),
/// then extends via sample_to. Guarantees progress by falling back to the
/// uniform arm after max_arm_retries selections. The caller owes the
/// bandit exactly one update for the returned outcome.
SampleOutcome sample_and_propagate(const ClusterSet& clusters,
                                   const TransitionDatabase& db,
                                   const SearchTree& tree, ArmSet& arms,
                                   const Scenario& scenario,
                                   const PlannerConfig& config, Rng& rng);

/// MAB-RRT meta-planner: repeated RRT runs; on every solution the run's
/// transitions join the database, the database is re-clustered, and the
/// bandit restarts over (uniform, goal, clusters...) arms.
PlanResult mab_rrt(const Scenario& scenario, const PlannerConfig& config,
                   const PlannerHooks* hooks = nullptr);

/// AO-RRT baseline: the same meta loop with a fixed goal-bias sampler and
/// no clustering or bandit.
PlanResult ao_rrt(const Scenario& scenario, const PlannerConfig& config,
                  const PlannerHooks* hooks = nullptr);

}  // namespace mabrrt
