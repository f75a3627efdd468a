#include <CLI11.hpp>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "arcplan/app.hpp"
#include "arcplan/config.hpp"
#include "arcplan/errors.hpp"

namespace {

arcplan::PointMassState parse_state(const std::string& text) {
    std::vector<double> v;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        v.push_back(arcplan::parse_double(item, "state"));
    }
    if (v.size() != 4) {
        throw arcplan::ParseError("expected X,Y,theta,v but got '" + text + "'");
    }
    return {v[0], v[1], v[2], v[3]};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Arc-sampling tree planner for a single-track vehicle"};
    app.require_subcommand(1);

    arcplan::PlanCommand plan_cmd;
    std::int64_t plan_seed = 0;
    auto* plan = app.add_subcommand("plan", "Plan from a scenario file and connect to the goal");
    plan->add_option("--scenario", plan_cmd.scenario, "Scenario key=value file")->required();
    plan->add_option("--out", plan_cmd.out_dir, "Output directory")->required();
    auto* plan_seed_opt = plan->add_option("--seed", plan_seed, "RNG seed");
    plan->add_flag("--tree-csv", plan_cmd.tree_csv, "Also write tree.csv");

    arcplan::StabilityCommand stab_cmd;
    std::string params_path;
    auto* stab = app.add_subcommand("stability", "Integrator stability sweep on the lateral model");
    auto* stab_params = stab->add_option("--params", params_path, "Vehicle parameter file");
    stab->add_option("--h-list", stab_cmd.h_values, "Comma-separated step sizes")->delimiter(',');
    stab->add_option("--horizon-T", stab_cmd.horizon, "Integration horizon in seconds");
    stab->add_option("--out", stab_cmd.out_csv, "Output CSV path")->required();

    arcplan::ConnectCommand conn_cmd;
    std::string from_text;
    std::string to_text;
    std::int64_t conn_seed = 0;
    std::string conn_params_path;
    auto* conn = app.add_subcommand("connect", "Minimum-time point-mass connection");
    conn->add_option("--from", from_text, "X,Y,theta,v")->required();
    conn->add_option("--to", to_text, "X,Y,theta,v")->required();
    auto* conn_params = conn->add_option("--params", conn_params_path, "Vehicle parameter file");
    auto* conn_seed_opt = conn->add_option("--seed", conn_seed, "RNG seed");
    conn->add_option("--out", conn_cmd.out_dir, "Output directory")->required();

    arcplan::RenderCommand render_cmd;
    auto* render = app.add_subcommand("render", "Re-render plan.svg from CSV outputs");
    render->add_option("--scenario", render_cmd.scenario, "Scenario key=value file")->required();
    render->add_option("--out", render_cmd.dir, "Directory holding the CSV outputs")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : arcplan::kExitParse;
    }

    try {
        if (*plan) {
            if (*plan_seed_opt) plan_cmd.seed = static_cast<std::uint64_t>(plan_seed);
            arcplan::RunReport report;
            const int rc = arcplan::cmd_plan(plan_cmd, std::cerr, &report);
            std::cout << arcplan::format_report(report);
            return rc;
        }
        if (*stab) {
            if (*stab_params) stab_cmd.params = params_path;
            return arcplan::cmd_stability(stab_cmd, std::cout);
        }
        if (*conn) {
            conn_cmd.from = parse_state(from_text);
            conn_cmd.to = parse_state(to_text);
            if (*conn_params) conn_cmd.params = conn_params_path;
            if (*conn_seed_opt) conn_cmd.seed = static_cast<std::uint64_t>(conn_seed);
            return arcplan::cmd_connect(conn_cmd, std::cout);
        }
        if (*render) {
            return arcplan::cmd_render(render_cmd, std::cerr);
        }
    } catch (const arcplan::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return arcplan::kExitParse;
    } catch (const arcplan::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return arcplan::kExitParse;
    }
    return arcplan::kExitParse;
}
