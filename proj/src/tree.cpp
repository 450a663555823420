#include "mabrrt/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace mabrrt {

SearchTree::SearchTree(State root_state) { reset(std::move(root_state)); }

void SearchTree::reset(State root_state) {
    dim_ = static_cast<int>(root_state.size());
    use_kd_ = dim_ <= 8;
    states_.clear();
    parents_.clear();
    transitions_.clear();
    kd_nodes_.clear();
    states_.push_back(std::move(root_state));
    parents_.push_back(kNoNode);
    transitions_.emplace_back();
    if (use_kd_) kd_insert(0);
}

NodeId SearchTree::add(const Transition& tau, NodeId parent) {
    if (parent < 0 || parent >= static_cast<NodeId>(states_.size()))
        throw std::logic_error("SearchTree::add: invalid parent id");
    if ((tau.x_p - states_[parent]).norm() > 1e-9)
        throw std::logic_error("SearchTree::add: transition parent state does not match node");
    const NodeId id = static_cast<NodeId>(states_.size());
    states_.push_back(tau.x_c);
    parents_.push_back(parent);
    transitions_.push_back(tau);
    if (use_kd_) kd_insert(id);
    return id;
}

void SearchTree::kd_insert(NodeId id) {
    if (kd_nodes_.empty()) {
        kd_nodes_.push_back({id, 0, -1, -1});
        return;
    }
    std::int32_t cur = 0;
    for (;;) {
        KdNode& node = kd_nodes_[cur];
        const int d = node.split_dim;
        const bool go_left = states_[id][d] < states_[node.point][d];
        std::int32_t& child = go_left ? node.left : node.right;
        if (child < 0) {
            const std::int32_t fresh = static_cast<std::int32_t>(kd_nodes_.size());
            child = fresh;
            kd_nodes_.push_back({id, (d + 1) % dim_, -1, -1});
            return;
        }
        cur = child;
    }
}

void SearchTree::kd_search(std::int32_t kd_index, const State& x,
                           double& best_d2, NodeId& best) const {
    const KdNode& node = kd_nodes_[kd_index];
    const double d2 = (x - states_[node.point]).squaredNorm();
    if (d2 < best_d2 || (d2 == best_d2 && node.point < best)) {
        best_d2 = d2;
        best = node.point;
    }
    const double diff = x[node.split_dim] - states_[node.point][node.split_dim];
    const std::int32_t near = diff < 0.0 ? node.left : node.right;
    const std::int32_t far = diff < 0.0 ? node.right : node.left;
    if (near >= 0) kd_search(near, x, best_d2, best);
    if (far >= 0 && diff * diff <= best_d2) kd_search(far, x, best_d2, best);
}

NodeId SearchTree::nearest(const State& x) const {
    if (!use_kd_) return nearest_linear(x);
    double best_d2 = std::numeric_limits<double>::infinity();
    NodeId best = kNoNode;
    kd_search(0, x, best_d2, best);
    return best;
}

NodeId SearchTree::nearest_linear(const State& x) const {
    double best_d2 = std::numeric_limits<double>::infinity();
    NodeId best = kNoNode;
    for (NodeId i = 0; i < static_cast<NodeId>(states_.size()); ++i) {
        const double d2 = (x - states_[i]).squaredNorm();
        if (d2 < best_d2) {
            best_d2 = d2;
            best = i;
        }
    }
    return best;
}

Path SearchTree::retrace_path(NodeId leaf, const RewardField& field) const {
    if (leaf < 0 || leaf >= static_cast<NodeId>(states_.size()))
        throw std::logic_error("SearchTree::retrace_path: invalid leaf id");
    Path path;
    for (NodeId cur = leaf; cur != 0; cur = parents_[cur]) {
        path.transitions.push_back(transitions_[cur]);
    }
    std::reverse(path.transitions.begin(), path.transitions.end());
    path.total_cost = path_cost(path, field);
    return path;
}

void SearchTree::harvest_transitions(std::vector<Transition>& out) const {
    for (std::size_t i = 1; i < transitions_.size(); ++i) out.push_back(transitions_[i]);
}

void SearchTree::dump(std::ostream& os) const {
    for (std::size_t i = 0; i < states_.size(); ++i) {
        os << i << ' ' << parents_[i];
        for (int d = 0; d < dim_; ++d) os << ' ' << states_[i][d];
        os << ' ' << (i == 0 ? 0.0 : transitions_[i].reward) << '\n';
    }
}

}  // namespace mabrrt
