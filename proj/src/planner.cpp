#include "mabrrt/planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace mabrrt {

namespace {

// Reusable rollout buffers; one set per thread keeps the hot loop
// allocation-free.
struct RolloutScratch {
    Control u;
    State xc;
    std::vector<double> flat;                    // u | d | x_c per candidate
    std::vector<std::pair<double, int>> order;   // (dist^2, draw index)
};

thread_local RolloutScratch scratch;

bool child_valid(const State& x_p, const State& x_c, const Scenario& scenario) {
    return is_valid(x_c, scenario) && segment_valid(x_p, x_c, scenario);
}

}  // namespace

std::optional<Extension> sample_to(const State& x_p, const State& x_trg,
                                   int arm_index, const Scenario& scenario,
                                   const PlannerConfig& config, Rng& rng) {
    const Box& ub = scenario.control_bounds();
    const int cdim = scenario.control_dim();
    const int dim = scenario.dim();

    if (arm_index <= 1) {
        // Uniform / goal arms: one random control for a random duration.
        Control u = ub.sample(rng);
        const double d = rng.uniform_open0(config.max_prop_duration);
        auto x_c = propagate(x_p, u, d, scenario);
        if (!x_c || !child_valid(x_p, *x_c, scenario)) return std::nullopt;
        return Extension{std::move(*x_c), std::move(u), d};
    }

    // Cluster arms: N_p rollouts, keep the valid child closest to the target.
    auto& s = scratch;
    const int np = config.n_propagations;
    const int stride = cdim + 1 + dim;
    s.flat.resize(static_cast<std::size_t>(np) * stride);
    s.order.clear();
    if (s.u.size() != static_cast<Eigen::Index>(cdim)) s.u.resize(cdim);
    if (s.xc.size() != static_cast<Eigen::Index>(dim)) s.xc.resize(dim);

    for (int i = 0; i < np; ++i) {
        for (int c = 0; c < cdim; ++c) s.u[c] = rng.uniform(ub.lo[c], ub.hi[c]);
        const double d = rng.uniform_open0(config.max_prop_duration);
        scenario.dynamics()(x_p, s.u, d, s.xc);
        if (!scenario.state_bounds().contains(s.xc)) continue;
        double* row = &s.flat[static_cast<std::size_t>(i) * stride];
        for (int c = 0; c < cdim; ++c) row[c] = s.u[c];
        row[cdim] = d;
        for (int c = 0; c < dim; ++c) row[cdim + 1 + c] = s.xc[c];
        s.order.emplace_back((s.xc - x_trg).squaredNorm(), i);
    }
    // Checking validity in ascending-distance order returns exactly the
    // valid candidate minimizing the distance, without checking them all.
    std::sort(s.order.begin(), s.order.end());
    for (const auto& [d2, i] : s.order) {
        (void)d2;
        const double* row = &s.flat[static_cast<std::size_t>(i) * stride];
        Eigen::Map<const Eigen::VectorXd> xc(row + cdim + 1, dim);
        if (!child_valid(x_p, xc, scenario)) continue;
        Extension ext;
        ext.u = Eigen::Map<const Eigen::VectorXd>(row, cdim);
        ext.d = row[cdim];
        ext.x_c = xc;
        return ext;
    }
    return std::nullopt;
}

std::optional<std::pair<NodeId, State>> sample_cluster(
    const Cluster& cluster, const TransitionDatabase& db, const SearchTree& tree,
    const Scenario& scenario, const PlannerConfig& config, Rng& rng) {
    (void)scenario;
    const double w = config.perturbation_width.value_or(0.5 * cluster.delta2);
    const int dim = static_cast<int>(tree.state(0).size());

    std::optional<std::pair<NodeId, State>> provisional;
    State cand_p(dim), cand_trg(dim);
    for (int attempt = 0; attempt < config.cluster_sample_attempts; ++attempt) {
        const int pick = rng.uniform_int(0, static_cast<int>(cluster.members.size()) - 1);
        const Transition& tau_c = db[cluster.members[pick]];
        for (int i = 0; i < dim; ++i) cand_p[i] = tau_c.x_p[i] + rng.uniform(-w, w);
        for (int i = 0; i < dim; ++i) cand_trg[i] = tau_c.x_trg[i] + rng.uniform(-w, w);

        // (i) skip regions the tree has already covered
        const NodeId near_trg = tree.nearest(cand_trg);
        if ((cand_trg - tree.state(near_trg)).norm() < cluster.delta1) continue;

        const NodeId near_p = tree.nearest(cand_p);
        const double dp = (cand_p - tree.state(near_p)).norm();
        // (ii) the candidate's parent is reachable from the tree
        if (dp < cluster.delta2) return std::make_pair(near_p, cand_trg);
        // (iii) grow toward the cluster so (ii) can hold later
        if (dp < cluster.delta3) provisional = std::make_pair(near_p, cand_p);
    }
    return provisional;
}

SampleOutcome sample_and_propagate(const ClusterSet& clusters,
                                   const TransitionDatabase& db,
                                   const SearchTree& tree, ArmSet& arms,
                                   const Scenario& scenario,
                                   const PlannerConfig& config, Rng& rng) {
    for (int attempt = 0; attempt < config.max_arm_retries; ++attempt) {
        const int arm = arms.select_next_arm(rng);
        NodeId parent = kNoNode;
        State x_trg;
        if (arm == 0) {
            x_trg = scenario.state_bounds().sample(rng);
            parent = tree.nearest(x_trg);
        } else if (arm == 1) {
            x_trg = scenario.goal().sample(rng);
            parent = tree.nearest(x_trg);
        } else {
            auto pair = sample_cluster(clusters.clusters[arm - 2], db, tree,
                                       scenario, config, rng);
            if (!pair) {
                arms.update(0.0);  // discourage unreachable clusters
                continue;
            }
            parent = pair->first;
            x_trg = std::move(pair->second);
        }
        auto ext = sample_to(tree.state(parent), x_trg, arm, scenario, config, rng);
        if (!ext) return {std::nullopt, parent, arm};
        Transition tau{tree.state(parent), std::move(ext->u), ext->d,
                       std::move(ext->x_c), std::move(x_trg), 0.0};
        tau.reward = reward_of(tau, scenario.reward_field());
        return {std::move(tau), parent, arm};
    }

    // Retry bound hit: fall back to the uniform arm so the iteration makes
    // progress regardless of cluster reachability.
    arms.force_select(0);
    State x_trg = scenario.state_bounds().sample(rng);
    const NodeId parent = tree.nearest(x_trg);
    auto ext = sample_to(tree.state(parent), x_trg, 0, scenario, config, rng);
    if (!ext) return {std::nullopt, parent, 0};
    Transition tau{tree.state(parent), std::move(ext->u), ext->d,
                   std::move(ext->x_c), std::move(x_trg), 0.0};
    tau.reward = reward_of(tau, scenario.reward_field());
    return {std::move(tau), parent, 0};
}

namespace {

PlanResult run_meta_planner(const Scenario& scenario, const PlannerConfig& config,
                            const PlannerHooks* hooks, bool use_bandit) {
    Rng rng(config.rng_seed);
    SearchTree tree(scenario.start());
    TransitionDatabase db;
    ClusterSet clusters;
    std::optional<ArmSet> arms;
    if (use_bandit) arms.emplace(std::vector<double>{0.0, 0.0}, config.policy, config.kf);

    PlanResult result;
    double iter_seconds_sum = 0.0;

    for (long k = 1; k <= config.total_iterations; ++k) {
        const auto t0 = std::chrono::steady_clock::now();

        std::optional<Transition> tau;
        NodeId parent = kNoNode;
        int arm = -1;
        if (use_bandit) {
            auto outcome =
                sample_and_propagate(clusters, db, tree, *arms, scenario, config, rng);
            if (hooks && hooks->on_arm_selected) hooks->on_arm_selected(outcome.arm);
            arms->update(outcome.transition ? outcome.transition->reward : 0.0);
            tau = std::move(outcome.transition);
            parent = outcome.parent;
            arm = outcome.arm;
        } else {
            arm = rng.uniform01() < config.goal_bias ? 1 : 0;
            if (hooks && hooks->on_arm_selected) hooks->on_arm_selected(arm);
            State x_trg = (arm == 1 ? scenario.goal() : scenario.state_bounds()).sample(rng);
            parent = tree.nearest(x_trg);
            auto ext = sample_to(tree.state(parent), x_trg, arm, scenario, config, rng);
            if (ext) {
                Transition t{tree.state(parent), std::move(ext->u), ext->d,
                             std::move(ext->x_c), std::move(x_trg), 0.0};
                t.reward = reward_of(t, scenario.reward_field());
                tau = std::move(t);
            }
        }

        if (tau) {
            const NodeId node = tree.add(*tau, parent);
            if (scenario.goal().contains(tau->x_c)) {
                Path path = tree.retrace_path(node, scenario.reward_field());
                if (path.total_cost < result.best_cost) {
                    result.best_cost = path.total_cost;
                    result.best_path = path;
                    result.cost_trace.emplace_back(k, path.total_cost);
                }
                result.runs_completed += 1;
                if (use_bandit) {
                    tree.harvest_transitions(
                        const_cast<std::vector<Transition>&>(db.transitions()));
                    clusters = cluster_transitions(db, config.clustering, rng);
                    std::vector<double> rewards{0.0, 0.0};
                    for (const auto& c : clusters.clusters) rewards.push_back(c.avg_reward);
                    arms.emplace(rewards, config.policy, config.kf);
                    if (hooks && hooks->on_recluster)
                        hooks->on_recluster(clusters.size(), arms->size());
                    if (hooks && hooks->on_clusters) hooks->on_clusters(clusters);
                }
                tree.reset(scenario.start());
            }
        }

        const auto t1 = std::chrono::steady_clock::now();
        const double dt = std::chrono::duration<double>(t1 - t0).count();
        iter_seconds_sum += dt;
        result.max_iter_seconds = std::max(result.max_iter_seconds, dt);
        if (hooks && hooks->on_iteration) {
            hooks->on_iteration(
                {k, arm, tau ? tau->reward : 0.0, result.best_cost});
        }
    }

    if (config.total_iterations > 0)
        result.mean_iter_seconds =
            iter_seconds_sum / static_cast<double>(config.total_iterations);
    return result;
}

}  // namespace

PlanResult mab_rrt(const Scenario& scenario, const PlannerConfig& config,
                   const PlannerHooks* hooks) {
    return run_meta_planner(scenario, config, hooks, !config.goal_bias_only);
}

PlanResult ao_rrt(const Scenario& scenario, const PlannerConfig& config,
                  const PlannerHooks* hooks) {
    return run_meta_planner(scenario, config, hooks, false);
}

}  // namespace mabrrt
