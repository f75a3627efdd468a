#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "arcplan/connector.hpp"
#include "arcplan/planner.hpp"
#include "arcplan/world.hpp"

namespace arcplan {

// t_index,X,Y,theta,v_y,r
void write_path_csv(std::ostream& out, std::span<const ReducedState> path);
std::vector<ReducedState> read_path_csv(std::istream& in);

// node_index,parent,X,Y,g,H,f with parent -1 for the root.
void write_tree_csv(std::ostream& out, const Tree& tree);

struct TreeRow {
    std::size_t index = 0;
    long parent = -1;
    Point2 position;
};
std::vector<TreeRow> read_tree_csv(std::istream& in);

// n,t,X,Y,theta,v,F,delta. The final state has no control, so its F and
// delta fields are empty.
void write_connector_csv(std::ostream& out, const ConnectorResult& conn);
std::vector<PointMassState> read_connector_csv(std::istream& in);

struct SvgScene {
    const OccupancyGrid* grid = nullptr;
    // One polyline per explored edge, parent endpoint first.
    std::vector<std::vector<Point2>> tree_edges;
    std::vector<Point2> plan_path;
    std::vector<Point2> connection;
    Point2 start;
    Point2 goal;
    double goal_radius = 0.0;
};

std::vector<std::vector<Point2>> tree_edges(const Tree& tree);
std::vector<std::vector<Point2>> tree_edges(std::span<const TreeRow> rows);

// Obstacles black on white, tree edges blue (1 px), path red (2 px), start
// green, goal marker with its goal-region circle.
std::string render_svg(const SvgScene& scene);

}  // namespace arcplan
