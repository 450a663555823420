#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mabrrt/rng.hpp"

namespace mabrrt {

enum class BanditPolicy { kKfManb, kUcb1, kThompson };

std::string to_string(BanditPolicy policy);

/// KF-MANB constants. sigma_obs_sq damps how much a single observation moves
/// the selected arm; sigma_tr_sq inflates non-selected arms to keep them
/// explorable; eta scales the transition noise of the selected arm and is
/// adapted online from observed rewards.
struct KfManbConfig {
    double sigma_obs_sq = 1e-4;
    double sigma_tr_sq = 1e-4;
    double eta = 1e-10;       // initial value; adapted after every update
    double sigma_init = 0.2;  // initial per-arm std. dev.
};

struct ArmBelief {
    double mean = 0.0;
    double variance = 0.0;
    long pull_count = 0;
    double reward_sum = 0.0;
};

/// Per-arm belief state plus the selection/update rules for KF-MANB, UCB-1
/// and Thompson Sampling behind one interface. Selection must precede the
/// matching update; the pairing is enforced.
class ArmSet {
public:
    /// One arm per initial reward, each starting at variance sigma_init^2
    /// and zero pulls. Rewards must lie in [0, 1].
    ArmSet(const std::vector<double>& initial_rewards, BanditPolicy policy,
           KfManbConfig config = {});

    /// KF-MANB / TS: Thompson draw per arm, argmax wins (ties -> lowest
    /// index). UCB-1: unpulled arms first in index order, then the standard
    /// mean + sqrt(2 ln n / n_j) score. Records the selection.
    int select_next_arm(Rng& rng);

    /// Marks an arm as selected without consulting the policy. Used by the
    /// planner's uniform fallback so the subsequent update stays paired.
    void force_select(int arm);

    /// Feeds the realized reward of the last selected arm. r must be in
    /// [0, 1]; calling without a pending selection is a contract violation.
    void update(double r);

    int size() const { return static_cast<int>(arms_.size()); }
    const ArmBelief& arm(int i) const { return arms_[i]; }
    BanditPolicy policy() const { return policy_; }
    double eta() const { return eta_; }
    long total_pulls() const { return total_pulls_; }
    std::optional<int> last_selected() const { return last_selected_; }

    /// UCB-1 score of arm i given the current counts (exposed for tests).
    double ucb1_index(int i) const;

    /// Thompson-draw parameters (mean, stddev) for arm i under the active
    /// policy; selection draws from exactly these.
    std::pair<double, double> thompson_params(int i) const;

private:
    std::vector<ArmBelief> arms_;
    BanditPolicy policy_;
    KfManbConfig config_;
    double eta_;
    long total_pulls_ = 0;
    std::optional<int> last_selected_;
};

}  // namespace mabrrt
