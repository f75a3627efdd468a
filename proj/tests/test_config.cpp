#include <fstream>

#include "arcplan/config.hpp"
#include "arcplan/errors.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace arcplan;
using doctest::Approx;

namespace {

std::string write(const std::filesystem::path& dir, const std::string& name,
                  const std::string& text) {
    const auto p = dir / name;
    std::ofstream(p) << text;
    return p.string();
}

const char* kMinimal =
    "map = corridor.pgm\nresolution = 0.5\norigin_x = 0\norigin_y = 0\n"
    "start_x = 5\nstart_y = 10\nstart_theta = 0\ngoal_x = 70\ngoal_y = 10\n";

}  // namespace

TEST_CASE("key=value parsing") {
    const KeyValues kv = parse_key_values("# header\n a = 1 \n\nb=two # trailing\r\nc =\n", "t");
    CHECK(kv.size() == 3);
    CHECK(kv.at("a") == "1");
    CHECK(kv.at("b") == "two");
    CHECK(kv.at("c").empty());
    CHECK_THROWS_AS(parse_key_values("a = 1\nnot a pair\n", "t"), ParseError);
    CHECK_THROWS_AS(parse_key_values("a = 1\na = 2\n", "t"), ParseError);
    CHECK_THROWS_AS(parse_key_values(" = 2\n", "t"), ParseError);
    try {
        (void)parse_key_values("a=1\nb=2\nbroken\n", "file.scn");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("file.scn:3") != std::string::npos);
    }
}

TEST_CASE("number parsing") {
    CHECK(parse_double(" 1.5e2 ", "k") == 150.0);
    CHECK(parse_double("-0.25", "k") == -0.25);
    CHECK_THROWS_AS(parse_double("1.5x", "k"), ParseError);
    CHECK_THROWS_AS(parse_double("", "k"), ParseError);
    CHECK_THROWS_AS(parse_double("nan", "k"), ParseError);
    CHECK_THROWS_AS(parse_double("inf", "k"), ParseError);
    CHECK(parse_int("42", "k") == 42);
    CHECK(parse_int("-7", "k") == -7);
    CHECK_THROWS_AS(parse_int("4.2", "k"), ParseError);
    CHECK_THROWS_AS(parse_int("99999999999999999999", "k"), ParseError);
}

TEST_CASE("vehicle parameter files") {
    const auto dir = testing::scratch_dir("config_params");
    const VehicleParams p = load_params(write(dir, "car.params", "m = 1200\nvx = 10\n"));
    CHECK(p.m == 1200.0);
    CHECK(p.vx == 10.0);
    CHECK(p.iz == VehicleParams{}.iz);
    CHECK_THROWS_AS(load_params(write(dir, "bad.params", "m = 1200\nwheels = 4\n")), ParseError);
    CHECK_THROWS_AS(load_params(write(dir, "neg.params", "m = -1\n")), ParseError);
    CHECK_THROWS_AS(load_params((dir / "missing.params").string()), ParseError);
}

TEST_CASE("scenario defaults") {
    const Scenario sc = load_scenario(testing::fixture("corridor.scn").string());
    CHECK(sc.id == "corridor");
    CHECK(sc.map_path == testing::fixture("corridor.pgm").string());
    CHECK(sc.resolution == 0.5);
    CHECK(sc.start == ReducedState{5, 10, 0, 0, 0});
    CHECK(sc.goal == Point2{70, 10});
    REQUIRE(sc.goal_theta.has_value());
    CHECK(*sc.goal_theta == 0.0);
    CHECK_FALSE(sc.goal_v.has_value());
    CHECK(sc.planner.rng_seed == 1);
    CHECK(sc.planner.arc_radius == Approx(15.0));
    CHECK(sc.planner.goal_bias_radius == Approx(2.0 * sc.planner.mindist));

    const Scenario walled = load_scenario(testing::fixture("walled.scn").string());
    CHECK_FALSE(walled.goal_theta.has_value());
    CHECK(walled.planner.max_expansions == 300);
}

TEST_CASE("scenario overrides and errors") {
    const auto dir = testing::scratch_dir("config_scn");
    write(dir, "car.params", "vx = 10\n");
    std::string text = kMinimal;
    text += "params = car.params\nhorizon = 2\nconnector_starts = 2\ntol_theta = 0.1\nm = 900\n";
    const Scenario sc = load_scenario(write(dir, "s.scn", text));
    CHECK(sc.id == "s");
    CHECK(sc.map_path == (dir / "corridor.pgm").string());
    CHECK(sc.params.vx == 10.0);
    CHECK(sc.params.m == 900.0);
    CHECK(sc.planner.horizon == 2.0);
    CHECK(sc.planner.arc_radius == Approx(20.0));
    CHECK(sc.connector.n_starts == 2);
    CHECK(sc.connector.tol.theta == 0.1);

    CHECK_THROWS_AS(load_scenario(write(dir, "u.scn", std::string(kMinimal) + "colour = red\n")),
                    ParseError);
    CHECK_THROWS_AS(load_scenario(write(dir, "r.scn", "map = a.pgm\nresolution = 1\n")),
                    ParseError);
    CHECK_THROWS_AS(
        load_scenario(write(dir, "z.scn", std::string(kMinimal) + "step = 5\n")), ParseError);
    CHECK_THROWS_AS(
        load_scenario(write(dir, "n.scn", std::string(kMinimal) + "seed = 1.5\n")), ParseError);
    std::string zero_res = kMinimal;
    zero_res.replace(zero_res.find("0.5"), 3, "0");
    CHECK_THROWS_AS(load_scenario(write(dir, "q.scn", zero_res)), ParseError);
}
