#pragma once

#include <optional>
#include <vector>

#include "mabrrt/rng.hpp"
#include "mabrrt/world.hpp"

namespace mabrrt {

/// Transitions accumulated across RRT runs within one planning session.
/// Append-only; clustering operates on immutable snapshots of it.
class TransitionDatabase {
public:
    void add(Transition tau) { transitions_.push_back(std::move(tau)); }
    void merge(const std::vector<Transition>& batch) {
        transitions_.insert(transitions_.end(), batch.begin(), batch.end());
    }
    std::size_t size() const { return transitions_.size(); }
    bool empty() const { return transitions_.empty(); }
    const Transition& operator[](std::size_t i) const { return transitions_[i]; }
    const std::vector<Transition>& transitions() const { return transitions_; }
    void clear() { transitions_.clear(); }

private:
    std::vector<Transition> transitions_;
};

struct ClusteringConfig {
    double lambda = 5.0;  // reward weight in the clustering metric
    int n_min_lo = 2;     // minimum cluster size drawn uniformly from
    int n_min_hi = 5;     // [n_min_lo, n_min_hi] at every clustering pass
};

/// One transition cluster with its sampling statistics. delta2 is the median
/// leave-one-out nearest-neighbor distance between members (spatial part of
/// the metric only); delta1 = delta2 and delta3 = 2 * delta2 gate cluster
/// sampling against the current tree.
struct Cluster {
    std::vector<int> members;
    double avg_reward = 0.0;
    double delta1 = 0.0;
    double delta2 = 0.0;
    double delta3 = 0.0;
};

struct ClusterSet {
    std::vector<Cluster> clusters;
    int n_min_used = 0;

    int size() const { return static_cast<int>(clusters.size()); }
    bool empty() const { return clusters.empty(); }
};

/// d(t1, t2) = ||t1.x_p - t2.x_p|| + ||t1.x_c - t2.x_c|| + lambda * |rho1 - rho2|.
double transition_distance(const Transition& a, const Transition& b, double lambda);

/// Spatial part of the metric only: ||x_p - x_p'|| + ||x_c - x_c'||.
double transition_spatial_distance(const Transition& a, const Transition& b);

struct ClusterStats {
    double avg_reward = 0.0;
    double delta1 = 0.0;
    double delta2 = 0.0;
    double delta3 = 0.0;
};

/// Average reward and dispersion thresholds for a member set. Returns
/// nullopt for degenerate clusters (singletons or zero dispersion), which
/// are excluded from arm construction.
std::optional<ClusterStats> cluster_stats(const std::vector<int>& members,
                                          const TransitionDatabase& db);

/// Density-based clustering of the database under the transition metric:
/// mutual-reachability distances from core distances at k = N_min, an MST
/// hierarchy, a condensed tree with minimum cluster size N_min, and
/// stability-based flat extraction. N_min is drawn uniformly from the
/// configured range per call. Degenerate clusters are dropped. Databases
/// smaller than N_min yield zero clusters.
ClusterSet cluster_transitions(const TransitionDatabase& db,
                               const ClusteringConfig& config, Rng& rng);

}  // namespace mabrrt
