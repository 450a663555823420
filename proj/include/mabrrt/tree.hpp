#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mabrrt/world.hpp"

namespace mabrrt {

using NodeId = std::int32_t;
inline constexpr NodeId kNoNode = -1;

/// Rooted RRT search tree. Stores full transitions on the edges so a
/// finished run can be harvested into the transition database. Nearest
/// queries go through an incrementally built k-d index for dim <= 8 and a
/// linear scan otherwise; both break ties by lowest insertion index.
class SearchTree {
public:
    explicit SearchTree(State root_state);

    /// Drops all nodes and re-seeds the tree at root_state.
    void reset(State root_state);

    /// Appends a leaf holding tau.x_c under parent. tau.x_p must equal the
    /// parent node's state; a mismatch is a contract violation.
    NodeId add(const Transition& tau, NodeId parent);

    /// Node minimizing Euclidean distance to x, ties to lowest index.
    NodeId nearest(const State& x) const;

    /// Same query via exhaustive scan; used as the correctness oracle.
    NodeId nearest_linear(const State& x) const;

    /// Root-to-leaf transition sequence with total cost under field.
    /// The root itself retraces to an empty path.
    Path retrace_path(NodeId leaf, const RewardField& field) const;

    std::size_t size() const { return states_.size(); }
    const State& state(NodeId id) const { return states_[id]; }
    NodeId parent(NodeId id) const { return parents_[id]; }
    const Transition& incoming(NodeId id) const { return transitions_[id]; }
    NodeId root() const { return 0; }

    /// Copies every non-root incoming transition into out (database harvest).
    void harvest_transitions(std::vector<Transition>& out) const;

    /// Flat per-node records for debugging/visualization tooling.
    void dump(std::ostream& os) const;

private:
    struct KdNode {
        NodeId point = kNoNode;
        int split_dim = 0;
        std::int32_t left = -1;
        std::int32_t right = -1;
    };

    void kd_insert(NodeId id);
    void kd_search(std::int32_t kd_index, const State& x, double& best_d2,
                   NodeId& best) const;

    std::vector<State> states_;
    std::vector<NodeId> parents_;
    std::vector<Transition> transitions_;  // transitions_[0] is unused (root)
    std::vector<KdNode> kd_nodes_;
    int dim_ = 0;
    bool use_kd_ = true;
};

}  // namespace mabrrt
