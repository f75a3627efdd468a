#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "arcplan/dynamics.hpp"
#include "arcplan/errors.hpp"
#include "arcplan/world.hpp"

namespace arcplan {

struct PlannerConfig {
    int n_arc_points = 7;
    double arc_radius = 15.0;       // m
    int n_goal_bias = 2;
    double goal_bias_radius = 6.0;  // m
    double horizon = 1.0;           // s
    double step = 0.1;              // s
    double mindist = 3.0;           // m
    double margin = 1.3;            // m
    int max_expansions = 5000;
    std::uint64_t rng_seed = 1;

    // Defaults tied to the vehicle: arc radius v_x * horizon, margin half the
    // wheelbase, goal bias radius 2 * mindist.
    static PlannerConfig defaults_for(const VehicleParams& params);
    void validate() const;
};

inline constexpr std::size_t kNoParent = std::numeric_limits<std::size_t>::max();

struct TreeNode {
    ReducedState state;
    std::size_t parent = kNoParent;
    double g = 0.0;
    double h = 0.0;
    double f = 0.0;
    double steer = 0.0;
    // Integrated states after the parent's endpoint; the last one is `state`.
    std::vector<ReducedState> segment;
};

struct Tree {
    std::vector<TreeNode> nodes;
    std::vector<std::size_t> open;  // not yet expanded, ascending index
};

struct PlanStats {
    std::size_t expansions = 0;
    double elapsed_seconds = 0.0;
};

struct PlanResult {
    Tree tree;
    std::vector<ReducedState> path;
    std::size_t reached = 0;
    PlanStats stats;
};

// Carries the partial tree for diagnostics.
class PlanFailure : public NoPathError {
public:
    PlanFailure(const std::string& what, Tree tree, PlanStats stats)
        : NoPathError(what), tree_(std::move(tree)), stats_(stats) {}

    const Tree& tree() const noexcept { return tree_; }
    const PlanStats& stats() const noexcept { return stats_; }

private:
    Tree tree_;
    PlanStats stats_;
};

// Seeded generator shared by the sampling routines. Doubles are built from
// the top 53 bits so streams match across standard libraries.
class PlannerRng {
public:
    explicit PlannerRng(std::uint64_t seed) : engine_(seed) {}
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 engine_;
};

// n points on the circle of radius arc_radius around (X, Y), at headings
// spread evenly over [theta - delta_max, theta + delta_max].
std::vector<Point2> point_selector(const ReducedState& s, const PlannerConfig& cfg,
                                   double delta_max);

// Uniform samples in the disc of radius goal_bias_radius around the goal.
std::vector<Point2> goal_biased_points(Point2 goal, const PlannerConfig& cfg, PlannerRng& rng);

// Bearing error to the target wrapped to (-pi, pi] and clamped to the steering
// limit.
double steer_toward(const ReducedState& s, Point2 target, double delta_max);

double wrap_angle(double a);

struct ShotContext {
    const OccupancyGrid& grid;
    Point2 goal;
    const PlannerConfig& cfg;
    const VehicleParams& params;
};

// One candidate node per target, in target order. Colliding shots carry
// f = h = +infinity. The node's parent field is left unset.
std::vector<TreeNode> shoot(const TreeNode& from, std::span<const Point2> targets,
                            const ShotContext& ctx);
std::vector<TreeNode> shoot_serial(const TreeNode& from, std::span<const Point2> targets,
                                   const ShotContext& ctx);

// Throws PlanFailure when the open set runs dry or max_expansions is hit.
PlanResult plan(const OccupancyGrid& grid, const ReducedState& start, Point2 goal,
                const PlannerConfig& cfg, const VehicleParams& params);

// Root state followed by every segment on the way to `leaf`.
std::vector<ReducedState> extract_path(const Tree& tree, std::size_t leaf);

std::vector<Point2> positions(std::span<const ReducedState> states);

}  // namespace arcplan
