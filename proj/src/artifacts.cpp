#include "arcplan/artifacts.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "arcplan/config.hpp"
#include "arcplan/errors.hpp"

namespace arcplan {

namespace {

std::string num(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string px(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) {
        out.push_back(field);
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

template <typename Row>
std::vector<Row> read_rows(std::istream& in, const std::string& header, std::size_t columns,
                           Row (*convert)(const std::vector<std::string>&)) {
    std::string line;
    if (!std::getline(in, line) || line != header) {
        throw ParseError("CSV header mismatch: expected '" + header + "'");
    }
    std::vector<Row> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != columns) {
            throw ParseError("CSV line " + std::to_string(line_no) + ": expected " +
                             std::to_string(columns) + " fields");
        }
        rows.push_back(convert(fields));
    }
    return rows;
}

double field(const std::vector<std::string>& f, std::size_t i) {
    return parse_double(f[i], "csv field");
}

}  // namespace

void write_path_csv(std::ostream& out, std::span<const ReducedState> path) {
    out << "t_index,X,Y,theta,v_y,r\n";
    for (std::size_t k = 0; k < path.size(); ++k) {
        const auto& s = path[k];
        out << k << ',' << num(s.x) << ',' << num(s.y) << ',' << num(s.theta) << ',' << num(s.vy)
            << ',' << num(s.r) << '\n';
    }
}

std::vector<ReducedState> read_path_csv(std::istream& in) {
    return read_rows<ReducedState>(in, "t_index,X,Y,theta,v_y,r", 6, [](const auto& f) {
        return ReducedState{field(f, 1), field(f, 2), field(f, 3), field(f, 4), field(f, 5)};
    });
}

void write_tree_csv(std::ostream& out, const Tree& tree) {
    out << "node_index,parent,X,Y,g,H,f\n";
    for (std::size_t k = 0; k < tree.nodes.size(); ++k) {
        const auto& n = tree.nodes[k];
        out << k << ',' << (n.parent == kNoParent ? std::string("-1") : std::to_string(n.parent))
            << ',' << num(n.state.x) << ',' << num(n.state.y) << ',' << num(n.g) << ','
            << num(n.h) << ',' << num(n.f) << '\n';
    }
}

std::vector<TreeRow> read_tree_csv(std::istream& in) {
    return read_rows<TreeRow>(in, "node_index,parent,X,Y,g,H,f", 7, [](const auto& f) {
        return TreeRow{static_cast<std::size_t>(parse_int(f[0], "node_index")),
                       static_cast<long>(parse_int(f[1], "parent")),
                       {field(f, 2), field(f, 3)}};
    });
}

void write_connector_csv(std::ostream& out, const ConnectorResult& conn) {
    out << "n,t,X,Y,theta,v,F,delta\n";
    const std::size_t n = conn.controls.size();
    const double dt = n > 0 ? conn.t_f / static_cast<double>(n) : 0.0;
    for (std::size_t k = 0; k < conn.trajectory.size(); ++k) {
        const auto& s = conn.trajectory[k];
        out << k << ',' << num(static_cast<double>(k) * dt) << ',' << num(s.x) << ',' << num(s.y)
            << ',' << num(s.theta) << ',' << num(s.v) << ',';
        if (k < n) {
            out << num(conn.controls[k].force) << ',' << num(conn.controls[k].delta);
        } else {
            out << ',';
        }
        out << '\n';
    }
}

std::vector<PointMassState> read_connector_csv(std::istream& in) {
    return read_rows<PointMassState>(in, "n,t,X,Y,theta,v,F,delta", 8, [](const auto& f) {
        return PointMassState{field(f, 2), field(f, 3), field(f, 4), field(f, 5)};
    });
}

std::vector<std::vector<Point2>> tree_edges(const Tree& tree) {
    std::vector<std::vector<Point2>> edges;
    for (const auto& n : tree.nodes) {
        if (n.parent == kNoParent) continue;
        const auto& from = tree.nodes[n.parent].state;
        std::vector<Point2> edge{{from.x, from.y}};
        for (const auto& s : n.segment) {
            edge.push_back({s.x, s.y});
        }
        edges.push_back(std::move(edge));
    }
    return edges;
}

std::vector<std::vector<Point2>> tree_edges(std::span<const TreeRow> rows) {
    std::vector<std::vector<Point2>> edges;
    for (const auto& row : rows) {
        if (row.parent < 0) continue;
        const auto p = static_cast<std::size_t>(row.parent);
        if (p >= rows.size()) {
            throw ParseError("tree CSV parent index out of range");
        }
        edges.push_back({rows[p].position, row.position});
    }
    return edges;
}

std::string render_svg(const SvgScene& scene) {
    if (scene.grid == nullptr) {
        throw ContractViolation("render_svg needs a grid");
    }
    const OccupancyGrid& grid = *scene.grid;
    const Point2 lo = grid.origin();
    const Point2 hi = grid.max_corner();
    const double scale = 800.0 / std::max(hi.x - lo.x, hi.y - lo.y);
    const double width = (hi.x - lo.x) * scale;
    const double height = (hi.y - lo.y) * scale;
    auto sx = [&](double x) { return px((x - lo.x) * scale); };
    auto sy = [&](double y) { return px((hi.y - y) * scale); };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << px(width) << "\" height=\""
        << px(height) << "\" viewBox=\"0 0 " << px(width) << ' ' << px(height) << "\">\n";
    svg << "<rect x=\"0\" y=\"0\" width=\"" << px(width) << "\" height=\"" << px(height)
        << "\" fill=\"white\"/>\n";

    // Horizontal runs of obstacle cells, one rectangle each.
    const double cell = grid.resolution() * scale;
    svg << "<g id=\"obstacles\" fill=\"black\">\n";
    for (int j = grid.height() - 1; j >= 0; --j) {
        int i = 0;
        while (i < grid.width()) {
            if (!grid.obstacle(i, j)) {
                ++i;
                continue;
            }
            const int start = i;
            while (i < grid.width() && grid.obstacle(i, j)) ++i;
            svg << "<rect x=\"" << px(start * cell) << "\" y=\""
                << px((grid.height() - 1 - j) * cell) << "\" width=\"" << px((i - start) * cell)
                << "\" height=\"" << px(cell) << "\"/>\n";
        }
    }
    svg << "</g>\n";

    svg << "<g id=\"tree\" stroke=\"blue\" stroke-width=\"1\" fill=\"none\">\n";
    for (const auto& edge : scene.tree_edges) {
        svg << "<polyline points=\"";
        for (std::size_t k = 0; k < edge.size(); ++k) {
            svg << (k ? " " : "") << sx(edge[k].x) << ',' << sy(edge[k].y);
        }
        svg << "\"/>\n";
    }
    svg << "</g>\n";

    auto lines = [&](const std::vector<Point2>& pts, const char* id) {
        svg << "<g id=\"" << id << "\" stroke=\"red\" stroke-width=\"2\" fill=\"none\">\n";
        for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
            svg << "<line x1=\"" << sx(pts[k].x) << "\" y1=\"" << sy(pts[k].y) << "\" x2=\""
                << sx(pts[k + 1].x) << "\" y2=\"" << sy(pts[k + 1].y) << "\"/>\n";
        }
        svg << "</g>\n";
    };
    lines(scene.plan_path, "path");
    lines(scene.connection, "connection");

    svg << "<circle id=\"start\" cx=\"" << sx(scene.start.x) << "\" cy=\"" << sy(scene.start.y)
        << "\" r=\"5\" fill=\"green\"/>\n";
    svg << "<circle id=\"goal-region\" cx=\"" << sx(scene.goal.x) << "\" cy=\""
        << sy(scene.goal.y) << "\" r=\"" << px(scene.goal_radius * scale)
        << "\" fill=\"none\" stroke=\"orange\" stroke-width=\"1\"/>\n";
    svg << "<circle id=\"goal\" cx=\"" << sx(scene.goal.x) << "\" cy=\"" << sy(scene.goal.y)
        << "\" r=\"4\" fill=\"orange\"/>\n";
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace arcplan
