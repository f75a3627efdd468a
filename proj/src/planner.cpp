#include "arcplan/planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <numbers>
#include <queue>
#include <string>

#include "arcplan/integrators.hpp"

namespace arcplan {

PlannerConfig PlannerConfig::defaults_for(const VehicleParams& params) {
    PlannerConfig cfg;
    cfg.arc_radius = params.vx * cfg.horizon;
    cfg.margin = 0.5 * params.wheelbase();
    cfg.goal_bias_radius = 2.0 * cfg.mindist;
    return cfg;
}

void PlannerConfig::validate() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw ContractViolation(std::string("invalid planner config: ") + what);
    };
    require(n_arc_points >= 1, "n_arc_points must be >= 1");
    require(arc_radius > 0.0, "arc_radius must be > 0");
    require(n_goal_bias >= 0, "n_goal_bias must be >= 0");
    require(goal_bias_radius >= 0.0, "goal_bias_radius must be >= 0");
    require(step > 0.0 && horizon >= step, "need horizon >= step > 0");
    require(mindist > 0.0, "mindist must be > 0");
    require(margin >= 0.0, "margin must be >= 0");
    require(max_expansions >= 1, "max_expansions must be >= 1");
}

double wrap_angle(double a) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double w = std::fmod(a + std::numbers::pi, two_pi);
    if (w < 0.0) {
        w += two_pi;
    }
    // w in [0, 2pi) maps to [-pi, pi); flip the lower end to get (-pi, pi].
    w -= std::numbers::pi;
    return w == -std::numbers::pi ? std::numbers::pi : w;
}

std::vector<Point2> point_selector(const ReducedState& s, const PlannerConfig& cfg,
                                   double delta_max) {
    if (cfg.n_arc_points < 1) {
        throw ContractViolation("point_selector needs at least one arc point");
    }
    std::vector<Point2> pts;
    pts.reserve(static_cast<std::size_t>(cfg.n_arc_points));
    for (int k = 0; k < cfg.n_arc_points; ++k) {
        const double heading =
            cfg.n_arc_points == 1
                ? s.theta
                : s.theta - delta_max + 2.0 * delta_max * k / (cfg.n_arc_points - 1);
        pts.push_back({s.x + cfg.arc_radius * std::cos(heading),
                       s.y + cfg.arc_radius * std::sin(heading)});
    }
    return pts;
}

std::vector<Point2> goal_biased_points(Point2 goal, const PlannerConfig& cfg, PlannerRng& rng) {
    std::vector<Point2> pts;
    pts.reserve(static_cast<std::size_t>(std::max(cfg.n_goal_bias, 0)));
    for (int k = 0; k < cfg.n_goal_bias; ++k) {
        const double radius = cfg.goal_bias_radius * std::sqrt(rng.uniform());
        const double angle = 2.0 * std::numbers::pi * rng.uniform();
        pts.push_back({goal.x + radius * std::cos(angle), goal.y + radius * std::sin(angle)});
    }
    return pts;
}

double steer_toward(const ReducedState& s, Point2 target, double delta_max) {
    const double dx = target.x - s.x;
    const double dy = target.y - s.y;
    if (dx == 0.0 && dy == 0.0) {
        throw ContractViolation("steer target coincides with the vehicle position");
    }
    return std::clamp(wrap_angle(std::atan2(dy, dx) - s.theta), -delta_max, delta_max);
}

std::vector<Point2> positions(std::span<const ReducedState> states) {
    std::vector<Point2> pts;
    pts.reserve(states.size());
    for (const auto& s : states) {
        pts.push_back({s.x, s.y});
    }
    return pts;
}

namespace {

TreeNode shoot_one(const TreeNode& from, Point2 target, const ShotContext& ctx) {
    TreeNode node;
    node.steer = steer_toward(from.state, target, ctx.params.delta_max);
    const Trajectory traj = integrate(Scheme::rk4, reduced_rhs(node.steer, ctx.params),
                                      from.state.to_vector(), ctx.cfg.step, ctx.cfg.horizon);
    node.segment.reserve(traj.states.size() - 1);
    for (std::size_t k = 1; k < traj.states.size(); ++k) {
        node.segment.push_back(ReducedState::from_vector(traj.states[k]));
    }
    node.state = node.segment.back();

    std::vector<Point2> poly;
    poly.reserve(node.segment.size() + 1);
    poly.push_back({from.state.x, from.state.y});
    for (const auto& s : node.segment) {
        poly.push_back({s.x, s.y});
    }
    node.g = from.g + polyline_length(poly);
    if (trajectory_collides(ctx.grid, poly, ctx.cfg.margin)) {
        node.h = std::numeric_limits<double>::infinity();
        node.f = node.h;
    } else {
        node.h = std::hypot(node.state.x - ctx.goal.x, node.state.y - ctx.goal.y);
        node.f = node.g + node.h;
    }
    return node;
}

void check_targets(const TreeNode& from, std::span<const Point2> targets) {
    if (targets.empty()) {
        throw ContractViolation("shoot needs at least one target");
    }
    for (const auto& t : targets) {
        if (t.x == from.state.x && t.y == from.state.y) {
            throw ContractViolation("steer target coincides with the vehicle position");
        }
    }
}

}  // namespace

std::vector<TreeNode> shoot(const TreeNode& from, std::span<const Point2> targets,
                            const ShotContext& ctx) {
    check_targets(from, targets);
    std::vector<TreeNode> out(targets.size());
    const long n = static_cast<long>(targets.size());
#pragma omp parallel for schedule(static)
    for (long k = 0; k < n; ++k) {
        out[static_cast<std::size_t>(k)] = shoot_one(from, targets[static_cast<std::size_t>(k)], ctx);
    }
    return out;
}

std::vector<TreeNode> shoot_serial(const TreeNode& from, std::span<const Point2> targets,
                                   const ShotContext& ctx) {
    check_targets(from, targets);
    std::vector<TreeNode> out;
    out.reserve(targets.size());
    for (const auto& t : targets) {
        out.push_back(shoot_one(from, t, ctx));
    }
    return out;
}

std::vector<ReducedState> extract_path(const Tree& tree, std::size_t leaf) {
    if (leaf >= tree.nodes.size()) {
        throw ContractViolation("extract_path: node index " + std::to_string(leaf) +
                                " out of range");
    }
    std::vector<std::size_t> chain;
    for (std::size_t k = leaf; k != kNoParent; k = tree.nodes[k].parent) {
        chain.push_back(k);
    }
    std::vector<ReducedState> path{tree.nodes[chain.back()].state};
    for (auto it = chain.rbegin() + 1; it != chain.rend(); ++it) {
        const auto& seg = tree.nodes[*it].segment;
        path.insert(path.end(), seg.begin(), seg.end());
    }
    return path;
}

PlanResult plan(const OccupancyGrid& grid, const ReducedState& start, Point2 goal,
                const PlannerConfig& cfg, const VehicleParams& params) {
    params.validate();
    cfg.validate();
    if (!point_free(grid, start.x, start.y)) {
        throw ContractViolation("start position is not in free space");
    }
    if (!point_free(grid, goal.x, goal.y)) {
        throw ContractViolation("goal position is not in free space");
    }
    const auto t_begin = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin).count();
    };

    PlanResult result;
    Tree& tree = result.tree;
    TreeNode root;
    root.state = start;
    root.h = std::hypot(start.x - goal.x, start.y - goal.y);
    root.f = root.h;
    tree.nodes.push_back(root);

    std::vector<char> expanded{0};
    auto finish_open = [&] {
        tree.open.clear();
        for (std::size_t k = 0; k < tree.nodes.size(); ++k) {
            if (!expanded[k]) tree.open.push_back(k);
        }
    };

    if (root.h <= cfg.mindist) {
        finish_open();
        result.path = {start};
        result.reached = 0;
        result.stats.elapsed_seconds = elapsed();
        return result;
    }

    using Entry = std::pair<double, std::size_t>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
    open.emplace(root.f, 0);
    PlannerRng rng(cfg.rng_seed);
    const ShotContext ctx{grid, goal, cfg, params};

    while (!open.empty()) {
        if (result.stats.expansions >= static_cast<std::size_t>(cfg.max_expansions)) {
            finish_open();
            result.stats.elapsed_seconds = elapsed();
            throw PlanFailure("no path: expansion budget of " + std::to_string(cfg.max_expansions) +
                                  " exhausted",
                              std::move(tree), result.stats);
        }
        const std::size_t current = open.top().second;
        open.pop();
        expanded[current] = 1;
        ++result.stats.expansions;

        std::vector<Point2> targets = point_selector(tree.nodes[current].state, cfg, params.delta_max);
        const std::vector<Point2> biased = goal_biased_points(goal, cfg, rng);
        targets.insert(targets.end(), biased.begin(), biased.end());
        std::vector<TreeNode> candidates = shoot(tree.nodes[current], targets, ctx);

        std::size_t best = kNoParent;
        for (auto& cand : candidates) {
            if (!std::isfinite(cand.f)) {
                continue;
            }
            cand.parent = current;
            const std::size_t idx = tree.nodes.size();
            open.emplace(cand.f, idx);
            expanded.push_back(0);
            if (cand.h <= cfg.mindist && (best == kNoParent || cand.f < tree.nodes[best].f)) {
                best = idx;
            }
            tree.nodes.push_back(std::move(cand));
        }
        if (best != kNoParent) {
            finish_open();
            result.reached = best;
            result.path = extract_path(tree, best);
            result.stats.elapsed_seconds = elapsed();
            return result;
        }
    }
    finish_open();
    result.stats.elapsed_seconds = elapsed();
    throw PlanFailure("no path: open set exhausted", std::move(tree), result.stats);
}

}  // namespace arcplan
