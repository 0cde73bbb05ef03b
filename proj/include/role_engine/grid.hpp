#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace role_engine {

using Vec2 = Eigen::Vector2d;

/// Raised for malformed caller input (bad images, unknown ids, invalid params).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Cell {
    int col = 0;
    int row = 0;

    friend bool operator==(const Cell&, const Cell&) = default;
    friend auto operator<=>(const Cell&, const Cell&) = default;
};

/// 8-bit grayscale raster, row-major, row 0 at the top.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;

    std::uint8_t at(int col, int row) const { return pixels[static_cast<size_t>(row) * width + col]; }
};

/// Binary world map. Cell (c, r) covers [c*res, (c+1)*res) x [r*res, (r+1)*res) in
/// world meters; y grows with the row index. Anything outside the grid counts as
/// occupied.
class OccupancyGrid {
public:
    OccupancyGrid() = default;
    OccupancyGrid(int width, int height, double resolution);

    int width() const { return width_; }
    int height() const { return height_; }
    double resolution() const { return resolution_; }
    bool empty() const { return width_ == 0 || height_ == 0; }

    bool in_bounds(int col, int row) const { return col >= 0 && row >= 0 && col < width_ && row < height_; }
    bool in_bounds(Cell c) const { return in_bounds(c.col, c.row); }

    bool occupied(int col, int row) const {
        return !in_bounds(col, row) || cells_[index(col, row)] != 0;
    }
    bool occupied(Cell c) const { return occupied(c.col, c.row); }
    bool free(int col, int row) const { return !occupied(col, row); }
    bool free(Cell c) const { return !occupied(c); }

    void set_occupied(int col, int row, bool value);
    void set_occupied(Cell c, bool value) { set_occupied(c.col, c.row, value); }

    /// Marks every cell whose center lies in the axis-aligned world box.
    void fill_box(Vec2 lo, Vec2 hi, bool value = true);

    Vec2 cell_center(Cell c) const { return {(c.col + 0.5) * resolution_, (c.row + 0.5) * resolution_}; }
    Cell cell_at(Vec2 p) const;
    bool contains(Vec2 p) const;

    size_t count_occupied() const;
    size_t index(int col, int row) const { return static_cast<size_t>(row) * width_ + col; }

    const std::vector<std::uint8_t>& cells() const { return cells_; }

    friend bool operator==(const OccupancyGrid&, const OccupancyGrid&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    double resolution_ = 1.0;
    std::vector<std::uint8_t> cells_;
};

/// Occupied iff pixel < occupied_threshold.
OccupancyGrid load_grid(const GrayImage& image, double resolution, int occupied_threshold = 128);

/// PGM (P2 ascii or P5 binary, maxval <= 255).
GrayImage read_pgm(const std::string& path);
void write_pgm(const std::string& path, const GrayImage& image);
GrayImage grid_to_image(const OccupancyGrid& grid);

struct RobotType {
    std::string id;
    double radius = 0.1;
    double v_max = 0.5;
    double sigma_obs = 0.1;
    double epsilon_safe = 0.05;

    void validate() const;
};

/// Labels 8-connected free components 0..count-1; occupied cells get -1.
std::vector<int> label_free_components(const OccupancyGrid& grid, int* count = nullptr);

/// Segment rasterization test: true iff every cell the segment a-b passes through is free.
bool line_of_sight(const OccupancyGrid& grid, Vec2 a, Vec2 b);

/// All cells touched by the segment a-b (supercover traversal), in order.
std::vector<Cell> rasterize_segment(const OccupancyGrid& grid, Vec2 a, Vec2 b);

} // namespace role_engine
