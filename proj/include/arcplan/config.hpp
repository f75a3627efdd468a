#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "arcplan/connector.hpp"
#include "arcplan/dynamics.hpp"
#include "arcplan/planner.hpp"
#include "arcplan/world.hpp"

namespace arcplan {

// Flat key=value text; '#' starts a comment, blank lines are ignored.
using KeyValues = std::map<std::string, std::string, std::less<>>;

KeyValues parse_key_values(std::string_view text, const std::string& source);
KeyValues read_key_values(const std::string& path);

// Recognizes m, iz, lf, lr, c_alpha_f, c_alpha_r, vx, delta_max. Keys not in
// that set are ignored so scenario files can carry vehicle overrides inline.
VehicleParams params_from(const KeyValues& kv, VehicleParams base = {});
// Reads a parameter file; unknown keys are a ParseError there.
VehicleParams load_params(const std::string& path);

struct Scenario {
    std::string id;
    std::string map_path;
    double resolution = 1.0;
    Point2 origin;
    ReducedState start;
    Point2 goal;
    // Terminal heading for the connector. Unset means the heading of the
    // tangent arc from the junction, which may then move back along the path.
    std::optional<double> goal_theta;
    // Terminal speed; unset means v_x.
    std::optional<double> goal_v;
    VehicleParams params;
    PlannerConfig planner;
    ConnectorConfig connector;
};

// Relative map and params paths resolve against the scenario file's directory.
Scenario load_scenario(const std::string& path);

double parse_double(std::string_view text, std::string_view key);
std::int64_t parse_int(std::string_view text, std::string_view key);

}  // namespace arcplan
