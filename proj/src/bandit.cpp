#include "mabrrt/bandit.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace mabrrt {

std::string to_string(BanditPolicy policy) {
    switch (policy) {
        case BanditPolicy::kKfManb: return "kfmanb";
        case BanditPolicy::kUcb1: return "ucb1";
        case BanditPolicy::kThompson: return "ts";
    }
    return "unknown";
}

ArmSet::ArmSet(const std::vector<double>& initial_rewards, BanditPolicy policy,
               KfManbConfig config)
    : policy_(policy), config_(config), eta_(config.eta) {
    if (initial_rewards.empty())
        throw std::invalid_argument("ArmSet: need at least one initial reward");
    if (config_.sigma_obs_sq <= 0.0 || config_.sigma_tr_sq <= 0.0 ||
        config_.eta <= 0.0 || config_.sigma_init <= 0.0)
        throw std::invalid_argument("ArmSet: KF-MANB constants must be positive");
    arms_.reserve(initial_rewards.size());
    for (double r : initial_rewards) {
        if (r < 0.0 || r > 1.0)
            throw std::invalid_argument("ArmSet: initial reward outside [0,1]");
        ArmBelief b;
        b.mean = r;
        b.variance = config_.sigma_init * config_.sigma_init;
        arms_.push_back(b);
    }
}

std::pair<double, double> ArmSet::thompson_params(int i) const {
    const ArmBelief& a = arms_[i];
    if (policy_ == BanditPolicy::kThompson) {
        // Stationary Gaussian model: sample mean, variance shrinking with pulls.
        const double var =
            config_.sigma_init * config_.sigma_init / static_cast<double>(a.pull_count + 1);
        return {a.mean, std::sqrt(var)};
    }
    return {a.mean, std::sqrt(a.variance)};
}

double ArmSet::ucb1_index(int i) const {
    const ArmBelief& a = arms_[i];
    if (a.pull_count == 0) return std::numeric_limits<double>::infinity();
    return a.mean + std::sqrt(2.0 * std::log(static_cast<double>(total_pulls_)) /
                              static_cast<double>(a.pull_count));
}

int ArmSet::select_next_arm(Rng& rng) {
    int best = 0;
    if (policy_ == BanditPolicy::kUcb1) {
        for (int i = 0; i < size(); ++i) {
            if (arms_[i].pull_count == 0) {
                last_selected_ = i;
                return i;
            }
        }
        double best_score = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < size(); ++i) {
            const double score = ucb1_index(i);
            if (score > best_score) {
                best_score = score;
                best = i;
            }
        }
    } else {
        double best_draw = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < size(); ++i) {
            const auto [mean, sd] = thompson_params(i);
            const double y = rng.normal(mean, sd);
            if (y > best_draw) {
                best_draw = y;
                best = i;
            }
        }
    }
    last_selected_ = best;
    return best;
}

void ArmSet::force_select(int arm) {
    if (arm < 0 || arm >= size())
        throw std::invalid_argument("ArmSet::force_select: arm out of range");
    last_selected_ = arm;
}

void ArmSet::update(double r) {
    if (!last_selected_)
        throw std::logic_error("ArmSet::update: no arm selected");
    if (r < 0.0 || r > 1.0)
        throw std::invalid_argument("ArmSet::update: reward outside [0,1]");
    const int sel = *last_selected_;
    ArmBelief& a = arms_[sel];

    if (policy_ == BanditPolicy::kKfManb) {
        // Scalar Kalman step on the selected arm; the transition noise term
        // sigma_tr^2 * eta^2 inflates only here, while non-selected arms
        // inflate by bare sigma_tr^2 (the asymmetry is as published).
        const double inflated = a.variance + config_.sigma_tr_sq * eta_ * eta_;
        const double denom = inflated + config_.sigma_obs_sq;
        const double new_mean = (inflated * r + config_.sigma_obs_sq * a.mean) / denom;
        const double new_var = inflated * config_.sigma_obs_sq / denom;
        for (int i = 0; i < size(); ++i) {
            if (i != sel) arms_[i].variance += config_.sigma_tr_sq;
        }
        a.mean = new_mean;
        a.variance = new_var;
        eta_ = std::max(1e-10, 0.9 * eta_ + 0.1 * std::abs(r));
    }

    a.pull_count += 1;
    a.reward_sum += r;
    if (policy_ != BanditPolicy::kKfManb) {
        a.mean = a.reward_sum / static_cast<double>(a.pull_count);
    }
    total_pulls_ += 1;
    last_selected_.reset();
}

}  // namespace mabrrt
