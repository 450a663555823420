#pragma once

#include <Eigen/Core>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mabrrt/rng.hpp"

namespace mabrrt {

using State = Eigen::VectorXd;
using Control = Eigen::VectorXd;

/// Axis-aligned box. Used for state/control bounds, obstacles, goal regions
/// and reward regions alike.
struct Box {
    Eigen::VectorXd lo;
    Eigen::VectorXd hi;

    bool contains(const Eigen::VectorXd& x) const {
        return (x.array() >= lo.array()).all() && (x.array() <= hi.array()).all();
    }

    /// Euclidean distance from x to the closest point of the box (0 inside).
    double distance_to(const Eigen::VectorXd& x) const;

    double volume() const;

    Eigen::VectorXd sample(Rng& rng) const;
};

/// State-indexed scalar reward in [0, 1]. Regions are evaluated in list
/// order, first match wins; states outside every region take default_value.
struct RewardRegion {
    Box box;
    double value = 0.0;
};

struct RewardField {
    std::vector<RewardRegion> regions;
    double default_value = 0.0;

    double at(const State& x) const {
        for (const auto& r : regions) {
            if (r.box.contains(x)) return r.value;
        }
        return default_value;
    }

    /// Largest value the field can take anywhere (used as the A* heuristic peak).
    double max_value() const;
};

/// One tree extension: parent state, the control and duration that produced
/// the child, the child state, and the target the extension aimed at.
struct Transition {
    State x_p;
    Control u;
    double d = 0.0;
    State x_c;
    State x_trg;
    double reward = 0.0;
};

struct Path {
    std::vector<Transition> transitions;
    double total_cost = 0.0;
};

using DynamicsFn =
    std::function<void(const State& x, const Control& u, double d, State& out)>;

/// Planning problem instance: spaces, obstacles, goal, start, reward field.
/// Immutable after construction; operations on it are pure.
class Scenario {
public:
    Scenario(Box state_bounds, Box control_bounds, std::vector<Box> obstacles,
             Box goal, State start, RewardField reward,
             double edge_resolution = 0.01);

    int dim() const { return static_cast<int>(state_bounds_.lo.size()); }
    int control_dim() const { return static_cast<int>(control_bounds_.lo.size()); }

    const Box& state_bounds() const { return state_bounds_; }
    const Box& control_bounds() const { return control_bounds_; }
    const std::vector<Box>& obstacles() const { return obstacles_; }
    const Box& goal() const { return goal_; }
    const State& start() const { return start_; }
    const RewardField& reward_field() const { return reward_; }
    double edge_resolution() const { return edge_resolution_; }

    const DynamicsFn& dynamics() const { return dynamics_; }

    /// Replaces the default single-integrator dynamics.
    void set_dynamics(DynamicsFn fn) { dynamics_ = std::move(fn); }

private:
    Box state_bounds_;
    Box control_bounds_;
    std::vector<Box> obstacles_;
    Box goal_;
    State start_;
    RewardField reward_;
    double edge_resolution_;
    DynamicsFn dynamics_;
};

/// Integrates the dynamics from x under constant control u for duration d.
/// Returns nullopt when the result leaves the state bounds; callers treat
/// that as an invalid transition rather than clamping.
std::optional<State> propagate(const State& x, const Control& u, double d,
                               const Scenario& scenario);

/// True iff x is inside the state bounds and outside every obstacle.
/// Obstacles are closed: boundary contact is invalid.
bool is_valid(const State& x, const Scenario& scenario);

/// Dense check of the straight segment from x_p to x_c at spacing
/// <= resolution. Valid for piecewise-constant-control single-integrator
/// transitions, whose trajectories are straight segments.
bool segment_valid(const State& x_p, const State& x_c,
                   const Scenario& scenario, double resolution);

inline bool segment_valid(const State& x_p, const State& x_c,
                          const Scenario& scenario) {
    return segment_valid(x_p, x_c, scenario, scenario.edge_resolution());
}

/// rho(tau) = 0.5 * (rho_x(x_p) + rho_x(x_c)).
double reward_of(const Transition& tau, const RewardField& field);

/// c(sigma) = sum over tau of (1 - rho(tau)) * ||x_p - x_c||.
double path_cost(const Path& path, const RewardField& field);

/// Parses a scenario config (JSON, schema in the README) and validates the
/// scenario invariants. Throws std::runtime_error on parse errors or
/// invariant violations (e.g. start inside an obstacle).
Scenario load_scenario(const std::string& config_text);
Scenario load_scenario_file(const std::string& path);

}  // namespace mabrrt
