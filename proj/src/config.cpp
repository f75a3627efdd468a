#include "arcplan/config.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "arcplan/errors.hpp"

namespace arcplan {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

const std::set<std::string, std::less<>> kParamKeys = {
    "m", "iz", "lf", "lr", "c_alpha_f", "c_alpha_r", "vx", "delta_max"};

}  // namespace

KeyValues parse_key_values(std::string_view text, const std::string& source) {
    KeyValues kv;
    std::size_t offset = 0;
    int line_no = 0;
    while (offset <= text.size()) {
        const auto end = text.find('\n', offset);
        const std::size_t line_end = end == std::string_view::npos ? text.size() : end;
        std::string_view line = text.substr(offset, line_end - offset);
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (!line.empty()) {
            const auto eq = line.find('=');
            if (eq == std::string_view::npos) {
                throw ParseError(source + ":" + std::to_string(line_no) + ": expected key=value",
                                 offset);
            }
            const std::string key(trim(line.substr(0, eq)));
            const std::string value(trim(line.substr(eq + 1)));
            if (key.empty()) {
                throw ParseError(source + ":" + std::to_string(line_no) + ": empty key", offset);
            }
            if (!kv.emplace(key, value).second) {
                throw ParseError(source + ":" + std::to_string(line_no) + ": duplicate key '" +
                                     key + "'",
                                 offset);
            }
        }
        if (end == std::string_view::npos) break;
        offset = end + 1;
    }
    return kv;
}

KeyValues read_key_values(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_key_values(ss.str(), path);
}

double parse_double(std::string_view text, std::string_view key) {
    const std::string s(trim(text));
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (s.empty() || used != s.size() || !std::isfinite(v)) {
        throw ParseError("value of '" + std::string(key) + "' is not a finite number: '" + s + "'");
    }
    return v;
}

std::int64_t parse_int(std::string_view text, std::string_view key) {
    const std::string_view s = trim(text);
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
        throw ParseError("value of '" + std::string(key) + "' is not an integer: '" +
                         std::string(s) + "'");
    }
    return v;
}

VehicleParams params_from(const KeyValues& kv, VehicleParams p) {
    auto read = [&kv](const char* key, double& field) {
        if (const auto it = kv.find(key); it != kv.end()) {
            field = parse_double(it->second, key);
        }
    };
    read("m", p.m);
    read("iz", p.iz);
    read("lf", p.lf);
    read("lr", p.lr);
    read("c_alpha_f", p.c_alpha_f);
    read("c_alpha_r", p.c_alpha_r);
    read("vx", p.vx);
    read("delta_max", p.delta_max);
    try {
        p.validate();
    } catch (const ContractViolation& e) {
        throw ParseError(e.what());
    }
    return p;
}

VehicleParams load_params(const std::string& path) {
    const KeyValues kv = read_key_values(path);
    for (const auto& [key, value] : kv) {
        if (!kParamKeys.contains(key)) {
            throw ParseError(path + ": unknown parameter '" + key + "'");
        }
    }
    return params_from(kv);
}

Scenario load_scenario(const std::string& path) {
    const KeyValues kv = read_key_values(path);
    const std::filesystem::path dir = std::filesystem::path(path).parent_path();
    auto resolve = [&dir](const std::string& p) {
        const std::filesystem::path fp(p);
        return fp.is_absolute() ? fp.string() : (dir / fp).string();
    };

    static const std::set<std::string, std::less<>> known = {
        "map", "resolution", "origin_x", "origin_y", "start_x", "start_y", "start_theta",
        "goal_x", "goal_y", "goal_theta", "goal_v", "params", "id",
        "n_arc_points", "arc_radius", "n_goal_bias", "goal_bias_radius", "horizon", "step",
        "mindist", "margin", "max_expansions", "seed",
        "connector_intervals", "connector_v_max", "connector_max_iters", "connector_starts",
        "connector_seed", "tol_position", "tol_theta", "tol_speed"};
    for (const auto& [key, value] : kv) {
        if (!known.contains(key) && !kParamKeys.contains(key)) {
            throw ParseError(path + ": unknown scenario key '" + key + "'");
        }
    }
    auto required = [&](const char* key) -> const std::string& {
        const auto it = kv.find(key);
        if (it == kv.end()) {
            throw ParseError(path + ": missing required key '" + std::string(key) + "'");
        }
        return it->second;
    };
    auto number = [&](const char* key) { return parse_double(required(key), key); };
    auto optional_number = [&](const char* key) -> std::optional<double> {
        if (const auto it = kv.find(key); it != kv.end()) return parse_double(it->second, key);
        return std::nullopt;
    };
    auto optional_int = [&](const char* key) -> std::optional<std::int64_t> {
        if (const auto it = kv.find(key); it != kv.end()) return parse_int(it->second, key);
        return std::nullopt;
    };

    Scenario sc;
    sc.id = kv.contains("id") ? kv.find("id")->second
                              : std::filesystem::path(path).stem().string();
    sc.map_path = resolve(required("map"));
    sc.resolution = number("resolution");
    if (!(sc.resolution > 0.0)) {
        throw ParseError(path + ": resolution must be positive");
    }
    sc.origin = {number("origin_x"), number("origin_y")};
    sc.start.x = number("start_x");
    sc.start.y = number("start_y");
    sc.start.theta = number("start_theta");
    sc.goal = {number("goal_x"), number("goal_y")};
    sc.goal_theta = optional_number("goal_theta");
    sc.goal_v = optional_number("goal_v");

    VehicleParams params;
    if (const auto it = kv.find("params"); it != kv.end()) {
        params = load_params(resolve(it->second));
    }
    sc.params = params_from(kv, params);

    PlannerConfig pc = PlannerConfig::defaults_for(sc.params);
    if (auto v = optional_int("n_arc_points")) pc.n_arc_points = static_cast<int>(*v);
    if (auto v = optional_int("n_goal_bias")) pc.n_goal_bias = static_cast<int>(*v);
    if (auto v = optional_number("horizon")) pc.horizon = *v;
    if (auto v = optional_number("step")) pc.step = *v;
    if (auto v = optional_number("mindist")) pc.mindist = *v;
    if (auto v = optional_number("margin")) pc.margin = *v;
    if (auto v = optional_int("max_expansions")) pc.max_expansions = static_cast<int>(*v);
    if (auto v = optional_int("seed")) pc.rng_seed = static_cast<std::uint64_t>(*v);
    pc.arc_radius = optional_number("arc_radius").value_or(sc.params.vx * pc.horizon);
    pc.goal_bias_radius = optional_number("goal_bias_radius").value_or(2.0 * pc.mindist);
    try {
        pc.validate();
    } catch (const ContractViolation& e) {
        throw ParseError(path + ": " + e.what());
    }
    sc.planner = pc;

    ConnectorConfig cc;
    if (auto v = optional_int("connector_intervals")) cc.intervals = static_cast<int>(*v);
    if (auto v = optional_number("connector_v_max")) cc.bounds.v_max = *v;
    if (auto v = optional_int("connector_max_iters")) cc.max_solver_iters = static_cast<int>(*v);
    if (auto v = optional_int("connector_starts")) cc.n_starts = static_cast<int>(*v);
    if (auto v = optional_int("connector_seed")) cc.rng_seed = static_cast<std::uint64_t>(*v);
    if (auto v = optional_number("tol_position")) cc.tol.position = *v;
    if (auto v = optional_number("tol_theta")) cc.tol.theta = *v;
    if (auto v = optional_number("tol_speed")) cc.tol.speed = *v;
    sc.connector = cc;
    return sc;
}

}  // namespace arcplan
