#include <random>
#include <regex>
#include <sstream>

#include "arcplan/artifacts.hpp"
#include "arcplan/errors.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace arcplan;

namespace {

std::size_t count(const std::string& text, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = text.find(needle); pos != std::string::npos;
         pos = text.find(needle, pos + needle.size())) {
        ++n;
    }
    return n;
}

std::size_t obstacle_runs(const OccupancyGrid& g) {
    std::size_t runs = 0;
    for (int j = 0; j < g.height(); ++j) {
        bool prev = false;
        for (int i = 0; i < g.width(); ++i) {
            const bool occ = g.obstacle(i, j);
            if (occ && !prev) ++runs;
            prev = occ;
        }
    }
    return runs;
}

std::string group(const std::string& svg, const std::string& id) {
    const auto start = svg.find("<g id=\"" + id + "\"");
    REQUIRE(start != std::string::npos);
    return svg.substr(start, svg.find("</g>", start) - start);
}

}  // namespace

TEST_CASE("path csv round trip is exact") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-1e3, 1e3);
    std::vector<ReducedState> path;
    for (int k = 0; k < 50; ++k) path.push_back({u(rng), u(rng), u(rng) * 1e-3, u(rng), 1e-300});
    std::stringstream ss;
    write_path_csv(ss, path);
    CHECK(ss.str().rfind("t_index,X,Y,theta,v_y,r\n0,", 0) == 0);
    CHECK(read_path_csv(ss) == path);

    std::istringstream bad_header("t,X,Y,theta,v_y,r\n");
    CHECK_THROWS_AS(read_path_csv(bad_header), ParseError);
    std::istringstream short_row("t_index,X,Y,theta,v_y,r\n0,1,2,3\n");
    CHECK_THROWS_AS(read_path_csv(short_row), ParseError);
    std::istringstream junk("t_index,X,Y,theta,v_y,r\n0,1,2,3,4,x\n");
    CHECK_THROWS_AS(read_path_csv(junk), ParseError);
}

TEST_CASE("tree csv") {
    Tree t;
    TreeNode root;
    root.state = {1, 2, 0, 0, 0};
    root.h = 5;
    root.f = 5;
    t.nodes.push_back(root);
    TreeNode child;
    child.parent = 0;
    child.state = {3, 4, 0, 0, 0};
    child.segment = {{2, 3, 0, 0, 0}, child.state};
    child.g = 2.0;
    child.h = std::numeric_limits<double>::infinity();
    child.f = child.h;
    t.nodes.push_back(child);

    std::stringstream ss;
    write_tree_csv(ss, t);
    CHECK(ss.str() == "node_index,parent,X,Y,g,H,f\n0,-1,1,2,0,5,5\n1,0,3,4,2,inf,inf\n");
    const auto rows = read_tree_csv(ss);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].parent == -1);
    CHECK(rows[1].parent == 0);
    CHECK(rows[1].position == Point2{3, 4});

    const auto full = tree_edges(t);
    REQUIRE(full.size() == 1);
    CHECK(full[0].size() == 3);
    CHECK(full[0].front() == Point2{1, 2});
    const auto coarse = tree_edges(rows);
    REQUIRE(coarse.size() == 1);
    CHECK(coarse[0].size() == 2);

    std::vector<TreeRow> dangling{{0, -1, {0, 0}}, {1, 7, {1, 1}}};
    CHECK_THROWS_AS(tree_edges(dangling), ParseError);
}

TEST_CASE("connector csv") {
    ConnectorResult c;
    c.t_f = 2.0;
    c.controls = {{100.0, 0.1}, {-50.0, -0.2}};
    c.trajectory = {{0, 0, 0, 15}, {15, 0, 0.5, 15.5}, {29.5, 7, 1.0, 15.1}};
    std::stringstream ss;
    write_connector_csv(ss, c);
    const std::string text = ss.str();
    CHECK(text.find("\n1,1,15,0,0.5,15.5,-50,-0.20000000000000001\n") != std::string::npos);
    CHECK(text.find("\n2,2,29.5,7,1,15.1,,\n") != std::string::npos);
    CHECK(read_connector_csv(ss) == c.trajectory);
}

TEST_CASE("svg rendering") {
    const OccupancyGrid g = load_grid_file(testing::fixture("wall.pgm").string(), 0.5, {});
    SvgScene scene;
    scene.grid = &g;
    scene.tree_edges = {{{10, 10}, {15, 10}, {25, 10}}, {{25, 10}, {30, 20}}};
    scene.plan_path = {{10, 10}, {25, 10}, {30, 20}, {35, 40}};
    scene.connection = {{35, 40}, {50, 45}};
    scene.start = {10, 10};
    scene.goal = {70, 10};
    scene.goal_radius = 3.0;
    const std::string svg = render_svg(scene);

    CHECK(svg.rfind("<svg xmlns=\"http://www.w3.org/2000/svg\"", 0) == 0);
    CHECK(count(svg, "<g ") == count(svg, "</g>"));
    CHECK(count(group(svg, "obstacles"), "<rect") == obstacle_runs(g));
    CHECK(count(group(svg, "tree"), "<polyline") == 2);
    CHECK(count(group(svg, "path"), "<line") == 3);
    CHECK(count(group(svg, "connection"), "<line") == 1);
    CHECK(count(svg, "id=\"start\"") == 1);
    CHECK(count(svg, "id=\"goal\"") == 1);
    // 80 m across 800 px: the 3 m goal circle has radius 30 px.
    CHECK(svg.find("id=\"goal-region\" cx=\"700.000\" cy=\"500.000\" r=\"30.000\"") !=
          std::string::npos);
    // Every coordinate stays inside the canvas.
    const std::regex coord("(?:x|y|x1|y1|x2|y2|cx|cy)=\"(-?[0-9.]+)\"");
    for (auto it = std::sregex_iterator(svg.begin(), svg.end(), coord); it != std::sregex_iterator();
         ++it) {
        const double v = std::stod((*it)[1]);
        CHECK(v >= 0.0);
        CHECK(v <= 800.0);
    }
    CHECK(render_svg(scene) == svg);

    SvgScene empty;
    CHECK_THROWS_AS(render_svg(empty), ContractViolation);
}
