#include "mabrrt/world.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace mabrrt {

double Box::distance_to(const Eigen::VectorXd& x) const {
    double d2 = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        double d = 0.0;
        if (x[i] < lo[i]) d = lo[i] - x[i];
        else if (x[i] > hi[i]) d = x[i] - hi[i];
        d2 += d * d;
    }
    return std::sqrt(d2);
}

double Box::volume() const {
    double v = 1.0;
    for (Eigen::Index i = 0; i < lo.size(); ++i) v *= hi[i] - lo[i];
    return v;
}

Eigen::VectorXd Box::sample(Rng& rng) const {
    Eigen::VectorXd x(lo.size());
    for (Eigen::Index i = 0; i < lo.size(); ++i) x[i] = rng.uniform(lo[i], hi[i]);
    return x;
}

double RewardField::max_value() const {
    double m = default_value;
    for (const auto& r : regions) m = std::max(m, r.value);
    return m;
}

Scenario::Scenario(Box state_bounds, Box control_bounds,
                   std::vector<Box> obstacles, Box goal, State start,
                   RewardField reward, double edge_resolution)
    : state_bounds_(std::move(state_bounds)),
      control_bounds_(std::move(control_bounds)),
      obstacles_(std::move(obstacles)),
      goal_(std::move(goal)),
      start_(std::move(start)),
      reward_(std::move(reward)),
      edge_resolution_(edge_resolution) {
    if (start_.size() != state_bounds_.lo.size())
        throw std::runtime_error("scenario: start dimension mismatch");
    if (!(goal_.volume() > 0.0) || !state_bounds_.contains(goal_.lo) ||
        !state_bounds_.contains(goal_.hi))
        throw std::runtime_error("scenario: goal region must lie in X with positive volume");
    for (const auto& r : reward_.regions) {
        if (r.value < 0.0 || r.value > 1.0)
            throw std::runtime_error("scenario: reward region value outside [0,1]");
    }
    if (reward_.default_value < 0.0 || reward_.default_value > 1.0)
        throw std::runtime_error("scenario: reward default outside [0,1]");
    if (edge_resolution_ <= 0.0)
        throw std::runtime_error("scenario: edge resolution must be positive");
    // Exact integration for x' = u; general models plug in via set_dynamics.
    dynamics_ = [](const State& x, const Control& u, double d, State& out) {
        out = x + u * d;
    };
    if (!is_valid(start_, *this))
        throw std::runtime_error("scenario: start state is not in X_free");
}

std::optional<State> propagate(const State& x, const Control& u, double d,
                               const Scenario& scenario) {
    State out;
    scenario.dynamics()(x, u, d, out);
    if (!scenario.state_bounds().contains(out)) return std::nullopt;
    return out;
}

bool is_valid(const State& x, const Scenario& scenario) {
    if (!scenario.state_bounds().contains(x)) return false;
    for (const auto& obs : scenario.obstacles()) {
        if (obs.contains(x)) return false;
    }
    return true;
}

bool segment_valid(const State& x_p, const State& x_c,
                   const Scenario& scenario, double resolution) {
    const double len = (x_c - x_p).norm();
    const int steps = std::max(1, static_cast<int>(std::ceil(len / resolution)));
    State probe(x_p.size());
    for (int i = 0; i <= steps; ++i) {
        const double t = static_cast<double>(i) / steps;
        probe = x_p + t * (x_c - x_p);
        if (!is_valid(probe, scenario)) return false;
    }
    return true;
}

double reward_of(const Transition& tau, const RewardField& field) {
    return 0.5 * (field.at(tau.x_p) + field.at(tau.x_c));
}

double path_cost(const Path& path, const RewardField& field) {
    double c = 0.0;
    for (const auto& tau : path.transitions) {
        c += (1.0 - reward_of(tau, field)) * (tau.x_p - tau.x_c).norm();
    }
    return c;
}

namespace {

Eigen::VectorXd parse_vec(const nlohmann::json& j, std::size_t expected_dim,
                          const char* what) {
    if (!j.is_array() || j.size() != expected_dim)
        throw std::runtime_error(std::string("scenario config: bad vector for ") + what);
    Eigen::VectorXd v(expected_dim);
    for (std::size_t i = 0; i < expected_dim; ++i) v[i] = j[i].get<double>();
    return v;
}

Box parse_box(const nlohmann::json& j, std::size_t dim, const char* what) {
    if (!j.contains("lo") || !j.contains("hi"))
        throw std::runtime_error(std::string("scenario config: box missing lo/hi in ") + what);
    Box b{parse_vec(j["lo"], dim, what), parse_vec(j["hi"], dim, what)};
    if ((b.hi.array() < b.lo.array()).any())
        throw std::runtime_error(std::string("scenario config: box hi < lo in ") + what);
    return b;
}

}  // namespace

Scenario load_scenario(const std::string& config_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(config_text);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("scenario config: ") + e.what());
    }

    const auto dim = j.at("state_dim").get<std::size_t>();
    if (dim == 0) throw std::runtime_error("scenario config: state_dim must be positive");

    Box state_bounds{parse_vec(j.at("state_lo"), dim, "state_lo"),
                     parse_vec(j.at("state_hi"), dim, "state_hi")};
    const auto cdim = j.contains("control_dim") ? j["control_dim"].get<std::size_t>() : dim;
    Box control_bounds{parse_vec(j.at("control_lo"), cdim, "control_lo"),
                       parse_vec(j.at("control_hi"), cdim, "control_hi")};

    std::vector<Box> obstacles;
    if (j.contains("obstacles")) {
        for (const auto& o : j["obstacles"]) obstacles.push_back(parse_box(o, dim, "obstacles"));
    }

    Box goal = parse_box(j.at("goal"), dim, "goal");
    State start = parse_vec(j.at("start"), dim, "start");

    RewardField field;
    field.default_value = j.at("reward_default").get<double>();
    if (j.contains("reward_regions")) {
        for (const auto& r : j["reward_regions"]) {
            RewardRegion region;
            region.box = parse_box(r, dim, "reward_regions");
            region.value = r.at("value").get<double>();
            field.regions.push_back(std::move(region));
        }
    }

    const double resolution =
        j.contains("edge_resolution") ? j["edge_resolution"].get<double>() : 0.01;

    return Scenario(std::move(state_bounds), std::move(control_bounds),
                    std::move(obstacles), std::move(goal), std::move(start),
                    std::move(field), resolution);
}

Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scenario file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_scenario(ss.str());
}

}  // namespace mabrrt
