#include "arcplan/app.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "arcplan/artifacts.hpp"
#include "arcplan/config.hpp"
#include "arcplan/connector.hpp"
#include "arcplan/errors.hpp"
#include "arcplan/planner.hpp"
#include "arcplan/stability.hpp"
#include "arcplan/world.hpp"

namespace arcplan {

namespace {

namespace fs = std::filesystem;

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ParseError("cannot write '" + path.string() + "'");
    }
    out << content;
}

template <typename Writer>
void write_with(const fs::path& path, Writer&& writer) {
    std::ostringstream ss;
    writer(ss);
    write_file(path, ss.str());
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::optional<std::uint64_t> env_seed() {
    const char* env = std::getenv("PLANNER_SEED");
    if (env == nullptr || *env == '\0') {
        return std::nullopt;
    }
    return static_cast<std::uint64_t>(parse_int(env, "PLANNER_SEED"));
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::string format_report(const RunReport& r) {
    std::ostringstream ss;
    ss << "scenario=" << r.scenario << '\n'
       << "reached=" << (r.reached ? "true" : "false") << '\n'
       << "expansions=" << r.expansions << '\n'
       << "path_length=" << fmt(r.path_length) << '\n'
       << "t_f=" << fmt(r.t_f) << '\n'
       << "plan_seconds=" << fmt(r.plan_seconds) << '\n'
       << "connect_seconds=" << fmt(r.connect_seconds) << '\n'
       << "total_seconds=" << fmt(r.total_seconds) << '\n';
    return ss.str();
}

double arc_heading(const ReducedState& from, Point2 goal) {
    const double bearing = std::atan2(goal.y - from.y, goal.x - from.x);
    return wrap_angle(from.theta + 2.0 * wrap_angle(bearing - from.theta));
}

std::size_t choose_junction(std::span<const ReducedState> path, Point2 goal,
                            const VehicleParams& params, const OccupancyGrid& grid, double margin,
                            double reach) {
    if (path.empty()) {
        throw ContractViolation("cannot choose a junction on an empty path");
    }
    const double kappa_max = 0.9 * std::tan(params.delta_max) / params.wheelbase();
    for (std::size_t k = path.size(); k-- > 0;) {
        const ReducedState& s = path[k];
        const double d = std::hypot(goal.x - s.x, goal.y - s.y);
        if (d > reach) break;
        if (d == 0.0) return k;
        const double phi = wrap_angle(std::atan2(goal.y - s.y, goal.x - s.x) - s.theta);
        if (std::abs(phi) >= std::numbers::pi / 2.0) continue;
        const double kappa = 2.0 * std::sin(phi) / d;
        if (std::abs(kappa) > kappa_max) continue;
        // Chord angle phi sweeps 2 phi of heading along the arc.
        std::vector<Point2> arc;
        constexpr int kSamples = 16;
        for (int i = 0; i <= kSamples; ++i) {
            const double u = static_cast<double>(i) / kSamples;
            const double turn = 2.0 * phi * u;
            const double len = std::abs(phi) < 1e-9 ? d * u : d * std::sin(phi * u) / std::sin(phi);
            arc.push_back({s.x + len * std::cos(s.theta + 0.5 * turn),
                           s.y + len * std::sin(s.theta + 0.5 * turn)});
        }
        if (!trajectory_collides(grid, arc, margin)) return k;
    }
    return path.size() - 1;
}

int cmd_plan(const PlanCommand& cmd, std::ostream& log, RunReport* report_out) {
    const auto t0 = std::chrono::steady_clock::now();
    RunReport report;
    Scenario sc;
    std::optional<OccupancyGrid> grid;
    try {
        sc = load_scenario(cmd.scenario);
        if (const auto seed = cmd.seed ? cmd.seed : env_seed()) {
            sc.planner.rng_seed = *seed;
            sc.connector.rng_seed = *seed;
        }
        grid.emplace(load_grid_file(sc.map_path, sc.resolution, sc.origin));
        fs::create_directories(cmd.out_dir);
    } catch (const Error& e) {
        log << "error: " << e.what() << '\n';
        return kExitParse;
    } catch (const fs::filesystem_error& e) {
        log << "error: " << e.what() << '\n';
        return kExitParse;
    }
    report.scenario = sc.id;
    const fs::path out(cmd.out_dir);
    const Point2 lo = grid->origin();
    const Point2 hi = grid->max_corner();

    PlanResult planned;
    try {
        planned = plan(*grid, sc.start, sc.goal, sc.planner, sc.params);
    } catch (const PlanFailure& e) {
        log << "error: " << e.what() << '\n';
        write_with(out / "tree.csv", [&](std::ostream& os) { write_tree_csv(os, e.tree()); });
        report.expansions = e.stats().expansions;
        report.plan_seconds = e.stats().elapsed_seconds;
        report.total_seconds = seconds_since(t0);
        write_file(out / "report.txt", format_report(report));
        if (report_out) *report_out = report;
        return kExitNoPath;
    } catch (const ContractViolation& e) {
        log << "error: " << e.what() << '\n';
        return kExitParse;
    }
    report.expansions = planned.stats.expansions;
    report.plan_seconds = planned.stats.elapsed_seconds;
    if (cmd.tree_csv) {
        write_with(out / "tree.csv", [&](std::ostream& os) { write_tree_csv(os, planned.tree); });
    }

    const std::size_t junction_at =
        sc.goal_theta ? planned.path.size() - 1
                      : choose_junction(planned.path, sc.goal, sc.params, *grid, sc.planner.margin,
                                        sc.planner.arc_radius + sc.planner.mindist);
    const std::span<const ReducedState> plan_prefix(planned.path.data(), junction_at + 1);
    const ReducedState& junction = plan_prefix.back();
    PointMassState target;
    target.x = sc.goal.x;
    target.y = sc.goal.y;
    target.theta = sc.goal_theta.value_or(
        (junction.x == sc.goal.x && junction.y == sc.goal.y)
            ? junction.theta
            : arc_heading(junction, sc.goal));
    target.v = sc.goal_v.value_or(sc.params.vx);

    ConnectorConfig ccfg = sc.connector;
    ccfg.bounds.x_min = lo.x;
    ccfg.bounds.x_max = hi.x;
    ccfg.bounds.y_min = lo.y;
    ccfg.bounds.y_max = hi.y;

    const auto t_connect = std::chrono::steady_clock::now();
    ConnectorResult conn;
    std::vector<ReducedState> full;
    try {
        conn = connect(junction_state(junction, sc.params), target, ccfg, sc.params);
        report.connect_seconds = seconds_since(t_connect);
        std::vector<Point2> pts;
        for (const auto& s : conn.trajectory) pts.push_back({s.x, s.y});
        if (trajectory_collides(*grid, pts, sc.planner.margin)) {
            throw ConnectorInfeasible("connector trajectory collides with an obstacle");
        }
        full = append_connection(plan_prefix, conn, sc.params);
    } catch (const ConnectorInfeasible& e) {
        log << "error: " << e.what() << '\n';
        log << "junction: x=" << junction.x << " y=" << junction.y << " theta=" << junction.theta
            << " target theta=" << target.theta << '\n';
        write_with(out / "tree.csv", [&](std::ostream& os) { write_tree_csv(os, planned.tree); });
        report.connect_seconds = seconds_since(t_connect);
        report.total_seconds = seconds_since(t0);
        write_file(out / "report.txt", format_report(report));
        if (report_out) *report_out = report;
        return kExitInfeasible;
    }

    write_with(out / "path.csv", [&](std::ostream& os) { write_path_csv(os, full); });
    write_with(out / "connector.csv", [&](std::ostream& os) { write_connector_csv(os, conn); });

    SvgScene scene;
    scene.grid = &*grid;
    scene.tree_edges = tree_edges(planned.tree);
    scene.plan_path = positions(plan_prefix);
    for (const auto& s : conn.trajectory) scene.connection.push_back({s.x, s.y});
    scene.start = {sc.start.x, sc.start.y};
    scene.goal = sc.goal;
    scene.goal_radius = sc.planner.mindist;
    write_file(out / "plan.svg", render_svg(scene));

    report.reached = true;
    report.t_f = conn.t_f;
    report.path_length = polyline_length(positions(full));
    report.total_seconds = seconds_since(t0);
    write_file(out / "report.txt", format_report(report));
    log << "reached goal after " << report.expansions << " expansions, path length "
        << report.path_length << " m, connector t_f " << report.t_f << " s\n";
    if (report_out) *report_out = report;
    return kExitOk;
}

int cmd_stability(const StabilityCommand& cmd, std::ostream& log) {
    VehicleParams params;
    try {
        if (cmd.params) params = load_params(*cmd.params);
    } catch (const Error& e) {
        log << "error: " << e.what() << '\n';
        return kExitParse;
    }
    if (!(cmd.horizon > 0.0)) {
        log << "error: horizon must be positive\n";
        return kExitParse;
    }
    std::vector<double> hs = cmd.h_values.empty() ? log_spaced(1e-3, 1.0, 301) : cmd.h_values;
    for (double h : hs) {
        if (!(h > 0.0) || h > cmd.horizon) {
            log << "error: step sizes must lie in (0, T]\n";
            return kExitParse;
        }
    }
    StabilityExperiment setup;
    setup.horizon = cmd.horizon;
    std::vector<StabilityVerdict> verdicts =
        stability_experiment(kAllSchemes, hs, params, setup);
    attach_predictions(verdicts, setup.delta, params);
    try {
        if (const fs::path parent = fs::path(cmd.out_csv).parent_path(); !parent.empty()) {
            fs::create_directories(parent);
        }
        write_with(cmd.out_csv, [&](std::ostream& os) { write_stability_csv(os, verdicts); });
    } catch (const std::exception& e) {
        log << "error: " << e.what() << '\n';
        return kExitParse;
    }
    for (Scheme s : kAllSchemes) {
        double largest_stable = 0.0;
        for (const auto& v : verdicts) {
            if (v.scheme == s && v.stable) largest_stable = std::max(largest_stable, v.step);
        }
        log << to_string(s) << ": largest stable h = " << largest_stable << " s\n";
    }
    return kExitOk;
}

int cmd_connect(const ConnectCommand& cmd, std::ostream& log) {
    VehicleParams params;
    try {
        if (cmd.params) params = load_params(*cmd.params);
        fs::create_directories(cmd.out_dir);
    } catch (const Error& e) {
        log << "error: " << e.what() << '\n';
        return kExitParse;
    }
    ConnectorConfig cfg;
    if (const auto seed = cmd.seed ? cmd.seed : env_seed()) cfg.rng_seed = *seed;
    try {
        const ConnectorResult conn = connect(cmd.from, cmd.to, cfg, params);
        write_with(fs::path(cmd.out_dir) / "connector.csv",
                   [&](std::ostream& os) { write_connector_csv(os, conn); });
        log << "t_f = " << conn.t_f << " s\n";
        return kExitOk;
    } catch (const ConnectorInfeasible& e) {
        log << "error: " << e.what() << '\n';
        return kExitInfeasible;
    } catch (const ContractViolation& e) {
        log << "error: " << e.what() << '\n';
        return kExitParse;
    }
}

int cmd_render(const RenderCommand& cmd, std::ostream& log) {
    try {
        const Scenario sc = load_scenario(cmd.scenario);
        const OccupancyGrid grid = load_grid_file(sc.map_path, sc.resolution, sc.origin);
        const fs::path dir(cmd.dir);
        SvgScene scene;
        scene.grid = &grid;
        scene.start = {sc.start.x, sc.start.y};
        scene.goal = sc.goal;
        scene.goal_radius = sc.planner.mindist;

        std::vector<PointMassState> conn;
        if (std::ifstream in(dir / "connector.csv"); in) {
            conn = read_connector_csv(in);
        }
        if (std::ifstream in(dir / "path.csv"); in) {
            const auto path = read_path_csv(in);
            // path.csv holds the full path; the connector part is drawn separately.
            const std::size_t plan_points =
                path.size() >= conn.size() && !conn.empty() ? path.size() - conn.size() + 1
                                                            : path.size();
            for (std::size_t k = 0; k < plan_points; ++k) {
                scene.plan_path.push_back({path[k].x, path[k].y});
            }
        }
        for (const auto& s : conn) scene.connection.push_back({s.x, s.y});
        if (std::ifstream in(dir / "tree.csv"); in) {
            const auto rows = read_tree_csv(in);
            scene.tree_edges = tree_edges(rows);
        }
        write_file(dir / "plan.svg", render_svg(scene));
        return kExitOk;
    } catch (const Error& e) {
        log << "error: " << e.what() << '\n';
        return kExitParse;
    }
}

}  // namespace arcplan
