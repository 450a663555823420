#include "mabrrt/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace mabrrt {

double transition_distance(const Transition& a, const Transition& b, double lambda) {
    return (a.x_p - b.x_p).norm() + (a.x_c - b.x_c).norm() +
           lambda * std::abs(a.reward - b.reward);
}

double transition_spatial_distance(const Transition& a, const Transition& b) {
    return (a.x_p - b.x_p).norm() + (a.x_c - b.x_c).norm();
}

std::optional<ClusterStats> cluster_stats(const std::vector<int>& members,
                                          const TransitionDatabase& db) {
    if (members.empty())
        throw std::invalid_argument("cluster_stats: empty member set");
    if (members.size() < 2) return std::nullopt;

    ClusterStats stats;
    for (int m : members) stats.avg_reward += db[m].reward;
    stats.avg_reward /= static_cast<double>(members.size());

    // Leave-one-out nearest-neighbor distances, spatial metric only.
    std::vector<double> nn(members.size(), std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < members.size(); ++i) {
        for (std::size_t j = i + 1; j < members.size(); ++j) {
            const double d = transition_spatial_distance(db[members[i]], db[members[j]]);
            nn[i] = std::min(nn[i], d);
            nn[j] = std::min(nn[j], d);
        }
    }
    std::sort(nn.begin(), nn.end());
    const std::size_t n = nn.size();
    const double median =
        (n % 2 == 1) ? nn[n / 2] : 0.5 * (nn[n / 2 - 1] + nn[n / 2]);
    if (!(median > 0.0)) return std::nullopt;  // zero dispersion

    stats.delta1 = median;
    stats.delta2 = median;
    stats.delta3 = 2.0 * median;
    return stats;
}

namespace {

// Flat feature view of the database for cache-friendly distance evaluation.
struct FeatureView {
    std::vector<double> data;  // per point: x_p | x_c | reward
    int dim = 0;
    int stride = 0;
    double lambda = 0.0;

    explicit FeatureView(const TransitionDatabase& db, double lambda_in) {
        lambda = lambda_in;
        const int n = static_cast<int>(db.size());
        dim = n > 0 ? static_cast<int>(db[0].x_p.size()) : 0;
        stride = 2 * dim + 1;
        data.resize(static_cast<std::size_t>(n) * stride);
        for (int i = 0; i < n; ++i) {
            double* row = &data[static_cast<std::size_t>(i) * stride];
            for (int d = 0; d < dim; ++d) row[d] = db[i].x_p[d];
            for (int d = 0; d < dim; ++d) row[dim + d] = db[i].x_c[d];
            row[2 * dim] = db[i].reward;
        }
    }

    double distance(int i, int j) const {
        const double* a = &data[static_cast<std::size_t>(i) * stride];
        const double* b = &data[static_cast<std::size_t>(j) * stride];
        double sp = 0.0, sc = 0.0;
        for (int d = 0; d < dim; ++d) {
            const double dp = a[d] - b[d];
            sp += dp * dp;
            const double dc = a[dim + d] - b[dim + d];
            sc += dc * dc;
        }
        return std::sqrt(sp) + std::sqrt(sc) +
               lambda * std::abs(a[2 * dim] - b[2 * dim]);
    }
};

// Distance to the (n_min - 1)-th nearest other point, i.e. the n_min-th
// neighbor counting the point itself.
std::vector<double> core_distances(const FeatureView& fv, int n, int n_min) {
    const int k = n_min - 1;
    std::vector<double> core(n);
    std::vector<double> smallest;
    smallest.reserve(k);
    for (int i = 0; i < n; ++i) {
        smallest.clear();
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            const double d = fv.distance(i, j);
            if (static_cast<int>(smallest.size()) < k) {
                smallest.insert(
                    std::upper_bound(smallest.begin(), smallest.end(), d), d);
            } else if (d < smallest.back()) {
                smallest.pop_back();
                smallest.insert(
                    std::upper_bound(smallest.begin(), smallest.end(), d), d);
            }
        }
        core[i] = smallest.back();
    }
    return core;
}

struct MstEdge {
    int a = 0;
    int b = 0;
    double w = 0.0;
};

// Prim over the complete mutual-reachability graph, distances on the fly.
std::vector<MstEdge> mutual_reachability_mst(const FeatureView& fv, int n,
                                             const std::vector<double>& core) {
    std::vector<double> best(n, std::numeric_limits<double>::infinity());
    std::vector<int> from(n, 0);
    std::vector<bool> in_tree(n, false);
    std::vector<MstEdge> edges;
    edges.reserve(n - 1);
    int cur = 0;
    in_tree[0] = true;
    for (int step = 1; step < n; ++step) {
        for (int j = 0; j < n; ++j) {
            if (in_tree[j]) continue;
            const double mr = std::max({core[cur], core[j], fv.distance(cur, j)});
            if (mr < best[j]) {
                best[j] = mr;
                from[j] = cur;
            }
        }
        int next = -1;
        double next_w = std::numeric_limits<double>::infinity();
        for (int j = 0; j < n; ++j) {
            if (!in_tree[j] && best[j] < next_w) {
                next_w = best[j];
                next = j;
            }
        }
        edges.push_back({from[next], next, next_w});
        in_tree[next] = true;
        cur = next;
    }
    return edges;
}

// Single-linkage hierarchy. Leaves are 0..n-1; internal node n+t merges two
// components at edge weight w. Root is the last internal node.
struct DendroNode {
    int left = -1;
    int right = -1;
    double dist = 0.0;
    int size = 0;
};

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
};

std::vector<DendroNode> build_dendrogram(std::vector<MstEdge> edges, int n) {
    std::sort(edges.begin(), edges.end(), [](const MstEdge& x, const MstEdge& y) {
        if (x.w != y.w) return x.w < y.w;
        if (std::min(x.a, x.b) != std::min(y.a, y.b))
            return std::min(x.a, x.b) < std::min(y.a, y.b);
        return std::max(x.a, x.b) < std::max(y.a, y.b);
    });
    std::vector<DendroNode> nodes(2 * n - 1);
    for (int i = 0; i < n; ++i) nodes[i] = {-1, -1, 0.0, 1};
    UnionFind uf(2 * n - 1);
    std::vector<int> component_node(2 * n - 1);
    std::iota(component_node.begin(), component_node.end(), 0);
    int next_id = n;
    for (const auto& e : edges) {
        const int ra = uf.find(e.a);
        const int rb = uf.find(e.b);
        const int na = component_node[ra];
        const int nb = component_node[rb];
        nodes[next_id] = {na, nb, e.w, nodes[na].size + nodes[nb].size};
        uf.parent[ra] = next_id;
        uf.parent[rb] = next_id;
        component_node[next_id] = next_id;
        ++next_id;
    }
    return nodes;
}

struct CondCluster {
    int parent = -1;
    double lambda_birth = -1.0;  // < 0 until the first event fixes it
    int size_at_birth = 0;
    double stability = 0.0;
    std::vector<int> children;
    std::vector<std::pair<int, double>> fallers;  // (point, lambda_out)
};

void collect_leaves(const std::vector<DendroNode>& dendro, int node, int n,
                    std::vector<int>& out) {
    std::vector<int> stack{node};
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        if (v < n) {
            out.push_back(v);
        } else {
            stack.push_back(dendro[v].left);
            stack.push_back(dendro[v].right);
        }
    }
}

// Condensed tree: descending a cluster's chain, splits with both sides of
// size >= n_min spawn child clusters; smaller sides fall out as points; if
// both sides are too small the cluster dies and everything falls out there.
std::vector<CondCluster> condense(const std::vector<DendroNode>& dendro, int n,
                                  int n_min) {
    std::vector<CondCluster> cond;
    cond.push_back({});
    cond[0].size_at_birth = n;
    cond[0].lambda_birth = 0.0;  // the root exists from distance infinity
    std::vector<std::pair<int, int>> stack;  // (dendro node, condensed cluster)
    stack.emplace_back(static_cast<int>(dendro.size()) - 1, 0);
    std::vector<int> leaves;
    while (!stack.empty()) {
        const auto [v, c] = stack.back();
        stack.pop_back();
        const DendroNode& node = dendro[v];
        // Distance floor keeps lambda finite if the database ever holds
        // exact duplicates.
        const double lam = 1.0 / std::max(node.dist, 1e-12);
        const int l = node.left, r = node.right;
        const int sl = dendro[l].size, sr = dendro[r].size;
        const bool l_big = sl >= n_min, r_big = sr >= n_min;
        if (l_big && r_big) {
            for (int child_node : {l, r}) {
                const int id = static_cast<int>(cond.size());
                cond.push_back({});
                cond[id].parent = c;
                cond[id].lambda_birth = lam;
                cond[id].size_at_birth = dendro[child_node].size;
                cond[c].children.push_back(id);
                if (child_node >= n) {
                    stack.emplace_back(child_node, id);
                } else {
                    cond[id].fallers.emplace_back(child_node, lam);
                }
            }
        } else if (l_big || r_big) {
            const int keep = l_big ? l : r;
            const int drop = l_big ? r : l;
            leaves.clear();
            collect_leaves(dendro, drop, n, leaves);
            for (int p : leaves) cond[c].fallers.emplace_back(p, lam);
            if (keep >= n) {
                stack.emplace_back(keep, c);
            } else {
                cond[c].fallers.emplace_back(keep, lam);
            }
        } else {
            leaves.clear();
            collect_leaves(dendro, v, n, leaves);
            for (int p : leaves) cond[c].fallers.emplace_back(p, lam);
        }
    }
    for (auto& c : cond) {
        for (const auto& [p, lam] : c.fallers) {
            (void)p;
            c.stability += lam - c.lambda_birth;
        }
        for (int child : c.children) {
            c.stability +=
                (cond[child].lambda_birth - c.lambda_birth) * cond[child].size_at_birth;
        }
    }
    return cond;
}

// Excess-of-mass extraction; a parent needs strictly larger stability than
// the sum of its children's subtree stabilities to absorb them.
std::vector<std::vector<int>> extract_clusters(std::vector<CondCluster>& cond) {
    const int m = static_cast<int>(cond.size());
    std::vector<double> subtree(m, 0.0);
    std::vector<bool> selected(m, false);
    for (int c = m - 1; c >= 0; --c) {
        double child_sum = 0.0;
        for (int child : cond[c].children) child_sum += subtree[child];
        if (cond[c].children.empty() || cond[c].stability > child_sum) {
            selected[c] = true;
            subtree[c] = cond[c].stability;
        } else {
            subtree[c] = child_sum;
        }
    }
    // Keep only the shallowest selected cluster on each root-to-leaf chain.
    std::vector<int> owner(m, -1);  // selected ancestor-or-self
    for (int c = 0; c < m; ++c) {
        const int p = cond[c].parent;
        const int inherited = p >= 0 ? owner[p] : -1;
        owner[c] = inherited >= 0 ? inherited : (selected[c] ? c : -1);
    }
    std::vector<std::vector<int>> members(m);
    for (int c = 0; c < m; ++c) {
        if (owner[c] < 0) continue;  // points falling here are noise
        for (const auto& [p, lam] : cond[c].fallers) {
            (void)lam;
            members[owner[c]].push_back(p);
        }
    }
    std::vector<std::vector<int>> result;
    for (int c = 0; c < m; ++c) {
        if (owner[c] == c && !members[c].empty()) {
            std::sort(members[c].begin(), members[c].end());
            result.push_back(std::move(members[c]));
        }
    }
    return result;
}

}  // namespace

ClusterSet cluster_transitions(const TransitionDatabase& db,
                               const ClusteringConfig& config, Rng& rng) {
    if (config.n_min_lo < 2 || config.n_min_lo > config.n_min_hi)
        throw std::invalid_argument("cluster_transitions: need 2 <= n_min_lo <= n_min_hi");
    ClusterSet out;
    out.n_min_used = rng.uniform_int(config.n_min_lo, config.n_min_hi);
    const int n = static_cast<int>(db.size());
    if (n < out.n_min_used || n < 2) return out;

    FeatureView fv(db, config.lambda);
    const auto core = core_distances(fv, n, out.n_min_used);
    const auto mst = mutual_reachability_mst(fv, n, core);
    const auto dendro = build_dendrogram(mst, n);
    auto cond = condense(dendro, n, out.n_min_used);
    auto member_sets = extract_clusters(cond);

    // Deterministic ordering for stable arm indices.
    std::sort(member_sets.begin(), member_sets.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });

    for (auto& members : member_sets) {
        const auto stats = cluster_stats(members, db);
        if (!stats) continue;  // degenerate: delta thresholds would be unusable
        Cluster c;
        c.members = std::move(members);
        c.avg_reward = stats->avg_reward;
        c.delta1 = stats->delta1;
        c.delta2 = stats->delta2;
        c.delta3 = stats->delta3;
        out.clusters.push_back(std::move(c));
    }
    return out;
}

}  // namespace mabrrt
