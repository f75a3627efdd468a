#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace arcplan {

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    bool operator==(const Point2&) const = default;
};

// Rasterized map. Cell (i, j) covers
// [origin_x + i*res, origin_x + (i+1)*res) x [origin_y + j*res, origin_y + (j+1)*res),
// with j = 0 the bottom row.
class OccupancyGrid {
public:
    OccupancyGrid(int width, int height, double resolution, Point2 origin,
                  std::vector<std::uint8_t> obstacles);

    int width() const { return width_; }
    int height() const { return height_; }
    double resolution() const { return resolution_; }
    Point2 origin() const { return origin_; }
    Point2 max_corner() const {
        return {origin_.x + width_ * resolution_, origin_.y + height_ * resolution_};
    }

    // Out-of-range indices read as obstacles.
    bool obstacle(int i, int j) const;
    std::size_t obstacle_count() const;

    // floor((p - origin) / resolution)
    int cell_x(double x) const;
    int cell_y(double y) const;

private:
    int width_;
    int height_;
    double resolution_;
    Point2 origin_;
    std::vector<std::uint8_t> cells_;  // row-major, j = 0 first
};

// Parses a binary (P5) or ASCII (P2) PGM. Pixels darker than maxval/2 are
// obstacles; image row 0 is the top of the world.
OccupancyGrid load_grid(std::span<const std::uint8_t> bytes, double resolution, Point2 origin);
OccupancyGrid load_grid_file(const std::string& path, double resolution, Point2 origin);

// P5, 0 for obstacles and 255 for free cells.
std::vector<std::uint8_t> save_pgm(const OccupancyGrid& grid);

// False outside the grid or inside an obstacle cell.
bool point_free(const OccupancyGrid& grid, double x, double y);

// True when the polyline, taken as a continuous curve, passes through a
// non-free cell or comes closer than `margin` to one. Cells outside the grid
// count as non-free.
bool trajectory_collides(const OccupancyGrid& grid, std::span<const Point2> points, double margin);

double polyline_length(std::span<const Point2> points);

}  // namespace arcplan
