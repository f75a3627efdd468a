#include "arcplan/world.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>

#include "arcplan/errors.hpp"

namespace arcplan {

OccupancyGrid::OccupancyGrid(int width, int height, double resolution, Point2 origin,
                             std::vector<std::uint8_t> obstacles)
    : width_(width), height_(height), resolution_(resolution), origin_(origin),
      cells_(std::move(obstacles)) {
    if (width < 1 || height < 1) {
        throw ContractViolation("grid dimensions must be at least 1x1");
    }
    if (!(resolution > 0.0) || !std::isfinite(resolution)) {
        throw ContractViolation("grid resolution must be positive");
    }
    if (cells_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw ContractViolation("grid cell count does not match width*height");
    }
}

bool OccupancyGrid::obstacle(int i, int j) const {
    if (i < 0 || j < 0 || i >= width_ || j >= height_) {
        return true;
    }
    return cells_[static_cast<std::size_t>(j) * static_cast<std::size_t>(width_) +
                  static_cast<std::size_t>(i)] != 0;
}

std::size_t OccupancyGrid::obstacle_count() const {
    return static_cast<std::size_t>(std::count_if(cells_.begin(), cells_.end(),
                                                  [](std::uint8_t c) { return c != 0; }));
}

namespace {

int floor_index(double v) {
    const double f = std::floor(v);
    if (f >= 2e9) return 2000000000;
    if (f <= -2e9) return -2000000000;
    return static_cast<int>(f);
}

}  // namespace

int OccupancyGrid::cell_x(double x) const { return floor_index((x - origin_.x) / resolution_); }

int OccupancyGrid::cell_y(double y) const { return floor_index((y - origin_.y) / resolution_); }

namespace {

class PgmReader {
public:
    explicit PgmReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::size_t pos() const { return pos_; }

    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            const auto c = bytes_[pos_];
            if (c == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else if (std::isspace(c)) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    unsigned long read_uint(const char* what) {
        skip_space_and_comments();
        const std::size_t start = pos_;
        unsigned long value = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            value = value * 10 + static_cast<unsigned long>(bytes_[pos_] - '0');
            if (value > 0xFFFFFFFFul) {
                throw ParseError(std::string("PGM ") + what + " is too large", start);
            }
            ++pos_;
        }
        if (pos_ == start) {
            throw ParseError(std::string("PGM: expected ") + what,
                             pos_ < bytes_.size() ? pos_ : bytes_.size());
        }
        return value;
    }

    std::uint8_t byte_at(std::size_t i) const { return bytes_[i]; }
    std::size_t size() const { return bytes_.size(); }
    void advance(std::size_t n) { pos_ += n; }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

OccupancyGrid load_grid(std::span<const std::uint8_t> bytes, double resolution, Point2 origin) {
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5')) {
        throw ParseError("not a PGM file: expected magic P2 or P5", 0);
    }
    const bool binary = bytes[1] == '5';
    PgmReader in(bytes);
    in.advance(2);
    const unsigned long width = in.read_uint("width");
    const unsigned long height = in.read_uint("height");
    const std::size_t maxval_pos = in.pos();
    const unsigned long maxval = in.read_uint("maxval");
    if (width == 0 || height == 0) {
        throw ParseError("PGM dimensions must be nonzero", maxval_pos);
    }
    if (width > 1000000 || height > 1000000) {
        throw ParseError("PGM dimensions too large", maxval_pos);
    }
    if (maxval == 0 || maxval > 65535) {
        throw ParseError("PGM maxval must be in [1, 65535]", maxval_pos);
    }

    const std::size_t n = width * height;
    std::vector<std::uint8_t> cells(n, 0);
    const double threshold = static_cast<double>(maxval) / 2.0;
    auto store = [&](std::size_t k, unsigned long value) {
        if (value > maxval) {
            throw ParseError("PGM pixel exceeds maxval", in.pos());
        }
        const std::size_t row = k / width;
        const std::size_t col = k % width;
        // Image row 0 is the top of the world.
        const std::size_t j = height - 1 - row;
        cells[j * width + col] = static_cast<double>(value) < threshold ? 1 : 0;
    };

    if (binary) {
        const std::size_t header_end = in.pos();
        if (header_end >= bytes.size() || !std::isspace(bytes[header_end])) {
            throw ParseError("PGM: expected whitespace after maxval", header_end);
        }
        in.advance(1);
        const std::size_t bpp = maxval > 255 ? 2 : 1;
        const std::size_t start = in.pos();
        if (bytes.size() - start < n * bpp) {
            throw ParseError("PGM raster truncated: need " + std::to_string(n * bpp) + " bytes",
                             bytes.size());
        }
        for (std::size_t k = 0; k < n; ++k) {
            const std::size_t p = start + k * bpp;
            const unsigned long v = bpp == 2 ? (static_cast<unsigned long>(bytes[p]) << 8) | bytes[p + 1]
                                             : bytes[p];
            store(k, v);
        }
    } else {
        for (std::size_t k = 0; k < n; ++k) {
            in.skip_space_and_comments();
            if (in.pos() >= in.size()) {
                throw ParseError("PGM raster truncated after " + std::to_string(k) + " pixels",
                                 in.pos());
            }
            store(k, in.read_uint("pixel value"));
        }
    }
    return OccupancyGrid(static_cast<int>(width), static_cast<int>(height), resolution, origin,
                         std::move(cells));
}

OccupancyGrid load_grid_file(const std::string& path, double resolution, Point2 origin) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError("cannot open map file '" + path + "'");
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return load_grid(bytes, resolution, origin);
}

std::vector<std::uint8_t> save_pgm(const OccupancyGrid& grid) {
    const std::string header = "P5\n" + std::to_string(grid.width()) + " " +
                               std::to_string(grid.height()) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.reserve(out.size() + static_cast<std::size_t>(grid.width() * grid.height()));
    for (int row = 0; row < grid.height(); ++row) {
        const int j = grid.height() - 1 - row;
        for (int i = 0; i < grid.width(); ++i) {
            out.push_back(grid.obstacle(i, j) ? 0 : 255);
        }
    }
    return out;
}

bool point_free(const OccupancyGrid& grid, double x, double y) {
    if (!std::isfinite(x) || !std::isfinite(y)) {
        return false;
    }
    return !grid.obstacle(grid.cell_x(x), grid.cell_y(y));
}

namespace {

struct Rect {
    double x0, y0, x1, y1;
};

double point_rect_distance(Point2 p, const Rect& r) {
    const double dx = std::max({r.x0 - p.x, 0.0, p.x - r.x1});
    const double dy = std::max({r.y0 - p.y, 0.0, p.y - r.y1});
    return std::hypot(dx, dy);
}

double point_segment_distance(Point2 p, Point2 a, Point2 b) {
    const double vx = b.x - a.x;
    const double vy = b.y - a.y;
    const double len2 = vx * vx + vy * vy;
    double t = 0.0;
    if (len2 > 0.0) {
        t = std::clamp(((p.x - a.x) * vx + (p.y - a.y) * vy) / len2, 0.0, 1.0);
    }
    return std::hypot(p.x - (a.x + t * vx), p.y - (a.y + t * vy));
}

// Liang-Barsky clip of a + t (b - a), t in [0, 1], against the closed rect.
bool clip(Point2 a, Point2 b, const Rect& r, double& t0, double& t1) {
    t0 = 0.0;
    t1 = 1.0;
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    const double p[4] = {-dx, dx, -dy, dy};
    const double q[4] = {a.x - r.x0, r.x1 - a.x, a.y - r.y0, r.y1 - a.y};
    for (int k = 0; k < 4; ++k) {
        if (p[k] == 0.0) {
            if (q[k] < 0.0) return false;
        } else {
            const double t = q[k] / p[k];
            if (p[k] < 0.0) {
                t0 = std::max(t0, t);
            } else {
                t1 = std::min(t1, t);
            }
        }
    }
    return t0 <= t1;
}

double segment_rect_distance(Point2 a, Point2 b, const Rect& r) {
    double t0 = 0.0;
    double t1 = 0.0;
    if (clip(a, b, r, t0, t1)) {
        return 0.0;
    }
    double d = std::min(point_rect_distance(a, r), point_rect_distance(b, r));
    const Point2 corners[4] = {{r.x0, r.y0}, {r.x1, r.y0}, {r.x0, r.y1}, {r.x1, r.y1}};
    for (const auto& c : corners) {
        d = std::min(d, point_segment_distance(c, a, b));
    }
    return d;
}

bool segment_collides(const OccupancyGrid& grid, Point2 a, Point2 b, double margin) {
    if (!point_free(grid, a.x, a.y) || !point_free(grid, b.x, b.y)) {
        return true;
    }
    // Both endpoints lie inside the grid, so the segment does too and the
    // closest out-of-grid cells are the ring at index -1 / width / height.
    const int i_lo = std::max(-1, grid.cell_x(std::min(a.x, b.x) - margin));
    const int i_hi = std::min(grid.width(), grid.cell_x(std::max(a.x, b.x) + margin));
    const int j_lo = std::max(-1, grid.cell_y(std::min(a.y, b.y) - margin));
    const int j_hi = std::min(grid.height(), grid.cell_y(std::max(a.y, b.y) + margin));
    const double res = grid.resolution();
    const Point2 o = grid.origin();

    for (int j = j_lo; j <= j_hi; ++j) {
        for (int i = i_lo; i <= i_hi; ++i) {
            if (!grid.obstacle(i, j)) {
                continue;
            }
            const Rect r{o.x + i * res, o.y + j * res, o.x + (i + 1) * res, o.y + (j + 1) * res};
            if (margin > 0.0 && segment_rect_distance(a, b, r) < margin) {
                return true;
            }
            double t0 = 0.0;
            double t1 = 0.0;
            if (clip(a, b, r, t0, t1)) {
                // The overlap belongs to this cell unless it only touches the
                // cell's upper or right boundary.
                const double tm = 0.5 * (t0 + t1);
                const double mx = a.x + tm * (b.x - a.x);
                const double my = a.y + tm * (b.y - a.y);
                if (grid.cell_x(mx) == i && grid.cell_y(my) == j) {
                    return true;
                }
            }
        }
    }
    return false;
}

}  // namespace

bool trajectory_collides(const OccupancyGrid& grid, std::span<const Point2> points, double margin) {
    if (!(margin >= 0.0)) {
        throw ContractViolation("collision margin must be non-negative");
    }
    if (points.empty()) {
        return false;
    }
    if (points.size() == 1) {
        return segment_collides(grid, points[0], points[0], margin);
    }
    for (std::size_t k = 0; k + 1 < points.size(); ++k) {
        if (segment_collides(grid, points[k], points[k + 1], margin)) {
            return true;
        }
    }
    return false;
}

double polyline_length(std::span<const Point2> points) {
    double len = 0.0;
    for (std::size_t k = 0; k + 1 < points.size(); ++k) {
        len += std::hypot(points[k + 1].x - points[k].x, points[k + 1].y - points[k].y);
    }
    return len;
}

}  // namespace arcplan
