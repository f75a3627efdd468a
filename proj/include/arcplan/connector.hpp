#pragma once

#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "arcplan/dynamics.hpp"
#include "arcplan/planner.hpp"
#include "arcplan/world.hpp"

namespace arcplan {

inline constexpr double kStandardGravity = 9.81;

struct ConnectorBounds {
    double x_min = -1000.0;
    double x_max = 1000.0;
    double y_min = -1000.0;
    double y_max = 1000.0;
    double v_max = 25.0;
    double delta_max = std::numbers::pi / 4.0;
    // <= 0 selects 10 * m * g0 from the vehicle mass.
    double force_max = 0.0;
};

struct TerminalTolerance {
    double position = 0.2;  // m, per axis
    double theta = 0.05;    // rad
    double speed = 0.5;     // m/s
};

struct ConnectorConfig {
    int intervals = 20;
    ConnectorBounds bounds;
    TerminalTolerance tol;
    // Rollout evaluations per start.
    int max_solver_iters = 60000;
    int n_starts = 4;
    std::uint64_t rng_seed = 7;
    double t_min = 1e-3;
    double t_max = 60.0;

    void validate() const;
};

struct ShootingVariables {
    double t_f = 1.0;
    std::vector<PointMassControl> controls;
};

// Euler recursion x_{n+1} = x_n + f(x_n, u_n) * t_f / N. Throws
// DivergenceError on non-finite states.
std::vector<PointMassState> rollout(const ShootingVariables& vars, const PointMassState& s0,
                                    const VehicleParams& params);

struct ConnectionProblem {
    PointMassState initial;
    PointMassState target;
    ConnectorBounds bounds;
};

// Layout of Evaluation::violations.
enum ViolationIndex : std::size_t {
    kTerminalX = 0,
    kTerminalY,
    kTerminalTheta,
    kTerminalV,
    kBoundXLow,
    kBoundXHigh,
    kBoundYLow,
    kBoundYHigh,
    kBoundVLow,
    kBoundVHigh,
    kViolationCount,
};

struct Evaluation {
    double objective = 0.0;
    // Terminal entries are absolute residuals (heading wrapped to (-pi, pi]);
    // bound entries are the largest excursion past each bound along the rollout.
    std::vector<double> violations;
};

Evaluation evaluate(const ShootingVariables& vars, const ConnectionProblem& problem,
                    const VehicleParams& params);

struct ConnectorResult {
    double t_f = 0.0;
    std::vector<PointMassState> trajectory;
    std::vector<PointMassControl> controls;
    std::vector<double> terminal_error;  // |dX|, |dY|, |dtheta|, |dv|
    // t_f of each new incumbent of the winning start, in acceptance order.
    std::vector<double> incumbent_trace;
    std::size_t evaluations = 0;
};

// Minimum-time connection: each seeded start brackets and bisects t_f, using a
// derivative-free pattern search over the controls to decide whether a given
// t_f admits a trajectory within tolerance. Throws
// ConnectorInfeasible if either state lies outside the box or no iterate
// meets the terminal tolerance with zero bound excursion.
ConnectorResult connect(const PointMassState& from, const PointMassState& to,
                        const ConnectorConfig& cfg, const VehicleParams& params);
ConnectorResult connect_serial(const PointMassState& from, const PointMassState& to,
                               const ConnectorConfig& cfg, const VehicleParams& params);

// Tree state handed to the point-mass model: (X, Y, theta, v_x).
PointMassState junction_state(const ReducedState& s, const VehicleParams& params);

// Path from start to goal: the planner path followed by the connector
// trajectory without its first (shared) state. Connector states carry
// v_y = 0 and r = v tan(delta) / L of the control that left them.
std::vector<ReducedState> append_connection(std::span<const ReducedState> plan_path,
                                            const ConnectorResult& conn,
                                            const VehicleParams& params, double tol = 1e-9);

}  // namespace arcplan
