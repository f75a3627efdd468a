#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "arcplan/artifacts.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace arcplan;
namespace fs = std::filesystem;

namespace {

int run(const std::string& args, const std::string& env = "") {
    const std::string cmd = (env.empty() ? "" : env + " ") + "\"" ARCPLAN_CLI "\" " + args +
                            " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

std::map<std::string, std::string> report(const fs::path& dir) {
    std::map<std::string, std::string> kv;
    std::istringstream in(testing::slurp(dir / "report.txt"));
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

std::string scenario_arg(const std::string& name) {
    return "--scenario \"" + testing::fixture(name).string() + "\"";
}

}  // namespace

TEST_CASE("plan writes every artifact") {
    const auto out = testing::scratch_dir("cli_plan");
    REQUIRE(run("plan " + scenario_arg("corridor.scn") + " --out \"" + out.string() + "\"") == 0);
    for (const char* f : {"path.csv", "connector.csv", "plan.svg", "report.txt"}) {
        CAPTURE(f);
        CHECK(fs::exists(out / f));
    }
    CHECK_FALSE(fs::exists(out / "tree.csv"));

    std::ifstream pin(out / "path.csv");
    const auto path = read_path_csv(pin);
    REQUIRE(path.size() > 1);
    const auto rep = report(out);
    CHECK(rep.at("reached") == "true");
    CHECK(std::abs(std::stod(rep.at("path_length")) - polyline_length(positions(path))) <= 1e-6);
    CHECK(std::abs(path.back().x - 70.0) <= 0.2);
    CHECK(std::abs(path.back().y - 10.0) <= 0.2);

    std::ifstream cin(out / "connector.csv");
    const auto conn = read_connector_csv(cin);
    REQUIRE_FALSE(conn.empty());
    CHECK(conn.back().x == path.back().x);
    CHECK(conn.back().y == path.back().y);

    // Re-rendering from the CSVs keeps the same drawing elements.
    const std::string first_svg = testing::slurp(out / "plan.svg");
    fs::remove(out / "plan.svg");
    REQUIRE(run("render " + scenario_arg("corridor.scn") + " --out \"" + out.string() + "\"") == 0);
    CHECK(fs::exists(out / "plan.svg"));
    CHECK(testing::slurp(out / "plan.svg").find("<g id=\"path\"") != std::string::npos);
    CHECK(first_svg.find("<g id=\"connection\"") != std::string::npos);
}

TEST_CASE("enclosed goal exits 2 with the explored tree") {
    const auto out = testing::scratch_dir("cli_walled");
    CHECK(run("plan " + scenario_arg("walled.scn") + " --out \"" + out.string() + "\"") == 2);
    REQUIRE(fs::exists(out / "tree.csv"));
    std::ifstream in(out / "tree.csv");
    CHECK(read_tree_csv(in).size() > 1);
    CHECK(report(out).at("reached") == "false");
    CHECK_FALSE(fs::exists(out / "path.csv"));
}

TEST_CASE("infeasible connection exits 3") {
    const auto out = testing::scratch_dir("cli_infeasible");
    std::string text = testing::slurp(testing::fixture("corridor.scn"));
    text.replace(text.find("map = corridor.pgm"), 18,
                 "map = " + testing::fixture("corridor.pgm").string());
    text += "connector_max_iters = 1\nconnector_starts = 1\ntol_position = 1e-9\n";
    std::ofstream(out / "tight.scn") << text;
    CHECK(run("plan --scenario \"" + (out / "tight.scn").string() + "\" --out \"" +
              (out / "res").string() + "\"") == 3);
    CHECK(fs::exists(out / "res" / "report.txt"));
}

TEST_CASE("malformed input exits 1") {
    const auto out = testing::scratch_dir("cli_bad");
    std::ofstream(out / "bad.scn") << "map = nowhere.pgm\nresolution = 0.5\n";
    CHECK(run("plan --scenario \"" + (out / "bad.scn").string() + "\" --out \"" + out.string() +
              "\"") == 1);
    CHECK(run("plan " + scenario_arg("corridor.scn") + " --out \"" + out.string() +
              "\" --seed notanumber") == 1);
    CHECK(run("plan --out \"" + out.string() + "\"") == 1);
    CHECK(run("frobnicate") == 1);
    CHECK(run("stability --h-list 0.1,-1 --out \"" + (out / "s.csv").string() + "\"") == 1);
    CHECK(run("connect --from 0,0,0 --to 10,0,0,15 --out \"" + out.string() + "\"") == 1);
    CHECK(run("plan " + scenario_arg("corridor.scn") + " --out \"" + out.string() + "\"",
              "PLANNER_SEED=x") == 1);
}

TEST_CASE("seed precedence") {
    auto tree_for = [](const std::string& tag, const std::string& extra, const std::string& env) {
        const auto out = testing::scratch_dir("cli_seed_" + tag);
        REQUIRE(run("plan " + scenario_arg("slalom.scn") + " --tree-csv --out \"" + out.string() +
                        "\"" + extra,
                    env) == 0);
        return testing::slurp(out / "tree.csv");
    };
    const std::string scenario_seed = tree_for("scn", "", "");
    const std::string env_seed = tree_for("env", "", "PLANNER_SEED=9");
    const std::string flag_seed = tree_for("flag", " --seed 9", "");
    const std::string flag_over_env = tree_for("both", " --seed 1", "PLANNER_SEED=9");
    CHECK(env_seed == flag_seed);
    CHECK(flag_over_env == scenario_seed);
    CHECK(env_seed != scenario_seed);
    CHECK(tree_for("again", "", "") == scenario_seed);
}

TEST_CASE("stability and connect subcommands") {
    const auto out = testing::scratch_dir("cli_misc");
    REQUIRE(run("stability --h-list 0.01,0.3 --out \"" + (out / "s.csv").string() + "\"") == 0);
    const std::string csv = testing::slurp(out / "s.csv");
    CHECK(csv.rfind("scheme,h,verdict,max_norm,predicted\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 17);

    REQUIRE(run("connect --from 0,0,0,15 --to 40,5,0,15 --seed 3 --out \"" + out.string() + "\"") ==
            0);
    std::ifstream in(out / "connector.csv");
    const auto traj = read_connector_csv(in);
    REQUIRE_FALSE(traj.empty());
    CHECK(std::abs(traj.back().x - 40.0) <= 0.2);
    CHECK(run("connect --from 0,0,0,15 --to 5000,0,0,15 --out \"" + out.string() + "\"") == 3);
}
