#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "arcplan/dynamics.hpp"
#include "arcplan/world.hpp"

namespace arcplan {

enum ExitStatus : int {
    kExitOk = 0,
    kExitParse = 1,
    kExitNoPath = 2,
    kExitInfeasible = 3,
};

struct RunReport {
    std::string scenario;
    bool reached = false;
    std::size_t expansions = 0;
    double path_length = 0.0;
    double t_f = 0.0;
    double plan_seconds = 0.0;
    double connect_seconds = 0.0;
    double total_seconds = 0.0;
};

struct PlanCommand {
    std::string scenario;
    std::string out_dir;
    // Falls back to $PLANNER_SEED, then to the scenario's seed.
    std::optional<std::uint64_t> seed;
    bool tree_csv = false;
};

// Heading reached at the goal by the circular arc tangent to `from`.
double arc_heading(const ReducedState& from, Point2 goal);

// Latest path index within `reach` of the goal whose tangent arc to the goal
// respects the curvature limit and clears obstacles at `margin`; the last
// index when none does.
std::size_t choose_junction(std::span<const ReducedState> path, Point2 goal,
                            const VehicleParams& params, const OccupancyGrid& grid, double margin,
                            double reach);

// Writes path.csv, connector.csv, plan.svg and report.txt into out_dir, plus
// tree.csv when requested or when planning fails.
int cmd_plan(const PlanCommand& cmd, std::ostream& log, RunReport* report = nullptr);

struct StabilityCommand {
    std::optional<std::string> params;
    std::vector<double> h_values;  // empty: 301 log-spaced values over [1e-3, 1]
    double horizon = 10.0;
    std::string out_csv;
};

int cmd_stability(const StabilityCommand& cmd, std::ostream& log);

struct ConnectCommand {
    std::optional<std::string> params;
    PointMassState from;
    PointMassState to;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
};

int cmd_connect(const ConnectCommand& cmd, std::ostream& log);

struct RenderCommand {
    std::string scenario;
    std::string dir;  // reads path.csv, tree.csv, connector.csv; writes plan.svg
};

int cmd_render(const RenderCommand& cmd, std::ostream& log);

std::string format_report(const RunReport& report);

}  // namespace arcplan
