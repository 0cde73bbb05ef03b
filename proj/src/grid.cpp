#include "role_engine/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <queue>
#include <sstream>

namespace role_engine {

OccupancyGrid::OccupancyGrid(int width, int height, double resolution)
    : width_(width), height_(height), resolution_(resolution) {
    if (width < 1 || height < 1)
        throw InputError("occupancy grid must be at least 1x1");
    if (!(resolution > 0.0) || !std::isfinite(resolution))
        throw InputError("occupancy grid resolution must be positive");
    cells_.assign(static_cast<size_t>(width) * height, 0);
}

void OccupancyGrid::set_occupied(int col, int row, bool value) {
    if (!in_bounds(col, row))
        return;
    cells_[index(col, row)] = value ? 1 : 0;
}

void OccupancyGrid::fill_box(Vec2 lo, Vec2 hi, bool value) {
    for (int r = 0; r < height_; ++r)
        for (int c = 0; c < width_; ++c) {
            const Vec2 p = cell_center({c, r});
            if (p.x() >= lo.x() && p.x() <= hi.x() && p.y() >= lo.y() && p.y() <= hi.y())
                cells_[index(c, r)] = value ? 1 : 0;
        }
}

Cell OccupancyGrid::cell_at(Vec2 p) const {
    return {static_cast<int>(std::floor(p.x() / resolution_)), static_cast<int>(std::floor(p.y() / resolution_))};
}

bool OccupancyGrid::contains(Vec2 p) const {
    return p.x() >= 0.0 && p.y() >= 0.0 && p.x() < width_ * resolution_ && p.y() < height_ * resolution_;
}

size_t OccupancyGrid::count_occupied() const {
    return static_cast<size_t>(std::count_if(cells_.begin(), cells_.end(), [](std::uint8_t v) { return v != 0; }));
}

OccupancyGrid load_grid(const GrayImage& image, double resolution, int occupied_threshold) {
    if (image.width <= 0 || image.height <= 0 || image.pixels.empty())
        throw InputError("cannot build an occupancy grid from an empty image");
    if (image.pixels.size() != static_cast<size_t>(image.width) * image.height)
        throw InputError("image pixel buffer does not match its dimensions");
    OccupancyGrid grid(image.width, image.height, resolution);
    for (int r = 0; r < image.height; ++r)
        for (int c = 0; c < image.width; ++c)
            grid.set_occupied(c, r, image.at(c, r) < occupied_threshold);
    return grid;
}

namespace {

// Reads the next PGM header token, skipping '#' comments.
std::string next_token(std::istream& in) {
    std::string token;
    char ch = 0;
    while (in.get(ch)) {
        if (ch == '#') {
            std::string ignored;
            std::getline(in, ignored);
            if (!token.empty())
                return token;
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(ch))) {
            if (!token.empty())
                return token;
            continue;
        }
        token.push_back(ch);
    }
    return token;
}

int parse_header_int(std::istream& in, const std::string& path) {
    const std::string token = next_token(in);
    try {
        size_t used = 0;
        const int value = std::stoi(token, &used);
        if (used != token.size())
            throw std::invalid_argument(token);
        return value;
    } catch (const std::exception&) {
        throw InputError(path + ": malformed PGM header token '" + token + "'");
    }
}

} // namespace

GrayImage read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw InputError("cannot open map image " + path);
    const std::string magic = next_token(in);
    if (magic != "P2" && magic != "P5")
        throw InputError(path + ": not a PGM file (expected P2 or P5)");
    GrayImage image;
    image.width = parse_header_int(in, path);
    image.height = parse_header_int(in, path);
    const int maxval = parse_header_int(in, path);
    if (image.width <= 0 || image.height <= 0)
        throw InputError(path + ": empty image");
    if (maxval <= 0 || maxval > 255)
        throw InputError(path + ": only 8-bit PGM is supported");
    const size_t count = static_cast<size_t>(image.width) * image.height;
    image.pixels.resize(count);
    if (magic == "P5") {
        in.read(reinterpret_cast<char*>(image.pixels.data()), static_cast<std::streamsize>(count));
        if (in.gcount() != static_cast<std::streamsize>(count))
            throw InputError(path + ": truncated pixel data");
    } else {
        for (size_t i = 0; i < count; ++i) {
            int value = 0;
            if (!(in >> value))
                throw InputError(path + ": truncated pixel data");
            image.pixels[i] = static_cast<std::uint8_t>(std::clamp(value, 0, maxval));
        }
    }
    if (maxval != 255)
        for (auto& p : image.pixels)
            p = static_cast<std::uint8_t>(p * 255 / maxval);
    return image;
}

void write_pgm(const std::string& path, const GrayImage& image) {
    std::ofstream out(path);
    if (!out)
        throw InputError("cannot write " + path);
    out << "P2\n" << image.width << ' ' << image.height << "\n255\n";
    for (int r = 0; r < image.height; ++r) {
        for (int c = 0; c < image.width; ++c) {
            if (c)
                out << ' ';
            out << static_cast<int>(image.at(c, r));
        }
        out << '\n';
    }
}

GrayImage grid_to_image(const OccupancyGrid& grid) {
    GrayImage image{grid.width(), grid.height(), {}};
    image.pixels.reserve(grid.cells().size());
    for (auto v : grid.cells())
        image.pixels.push_back(v ? 0 : 255);
    return image;
}

void RobotType::validate() const {
    if (!(radius > 0.0))
        throw InputError("robot type '" + id + "': radius must be positive");
    if (!(v_max > 0.0))
        throw InputError("robot type '" + id + "': v_max must be positive");
    if (!(sigma_obs > 0.0))
        throw InputError("robot type '" + id + "': sigma_obs must be positive");
    if (!(epsilon_safe >= 0.0))
        throw InputError("robot type '" + id + "': epsilon_safe must be non-negative");
}

std::vector<int> label_free_components(const OccupancyGrid& grid, int* count) {
    std::vector<int> labels(static_cast<size_t>(grid.width()) * grid.height(), -1);
    int next = 0;
    std::queue<Cell> frontier;
    for (int r = 0; r < grid.height(); ++r)
        for (int c = 0; c < grid.width(); ++c) {
            if (grid.occupied(c, r) || labels[grid.index(c, r)] >= 0)
                continue;
            labels[grid.index(c, r)] = next;
            frontier.push({c, r});
            while (!frontier.empty()) {
                const Cell cur = frontier.front();
                frontier.pop();
                for (int dr = -1; dr <= 1; ++dr)
                    for (int dc = -1; dc <= 1; ++dc) {
                        const int nc = cur.col + dc;
                        const int nr = cur.row + dr;
                        if ((dc == 0 && dr == 0) || grid.occupied(nc, nr) || labels[grid.index(nc, nr)] >= 0)
                            continue;
                        labels[grid.index(nc, nr)] = next;
                        frontier.push({nc, nr});
                    }
            }
            ++next;
        }
    if (count)
        *count = next;
    return labels;
}

std::vector<Cell> rasterize_segment(const OccupancyGrid& grid, Vec2 a, Vec2 b) {
    // Amanatides-Woo traversal; when the segment passes exactly through a cell
    // corner both side cells are emitted so diagonal squeezes count as blocked.
    const double res = grid.resolution();
    Cell cur = grid.cell_at(a);
    const Cell last = grid.cell_at(b);
    std::vector<Cell> out{cur};
    const Vec2 d = b - a;
    const int step_c = d.x() > 0 ? 1 : (d.x() < 0 ? -1 : 0);
    const int step_r = d.y() > 0 ? 1 : (d.y() < 0 ? -1 : 0);
    constexpr double inf = std::numeric_limits<double>::infinity();
    const double delta_c = step_c ? res / std::abs(d.x()) : inf;
    const double delta_r = step_r ? res / std::abs(d.y()) : inf;
    double t_c = inf;
    double t_r = inf;
    if (step_c) {
        const double boundary = (cur.col + (step_c > 0 ? 1 : 0)) * res;
        t_c = (boundary - a.x()) / d.x();
    }
    if (step_r) {
        const double boundary = (cur.row + (step_r > 0 ? 1 : 0)) * res;
        t_r = (boundary - a.y()) / d.y();
    }
    const int max_steps = std::abs(last.col - cur.col) + std::abs(last.row - cur.row) + 2;
    constexpr double corner_tol = 1e-12;
    for (int i = 0; i < max_steps; ++i) {
        if (std::min(t_c, t_r) > 1.0)
            break;
        if (std::abs(t_c - t_r) <= corner_tol) {
            out.push_back({cur.col + step_c, cur.row});
            out.push_back({cur.col, cur.row + step_r});
            cur.col += step_c;
            cur.row += step_r;
            t_c += delta_c;
            t_r += delta_r;
        } else if (t_c < t_r) {
            cur.col += step_c;
            t_c += delta_c;
        } else {
            cur.row += step_r;
            t_r += delta_r;
        }
        out.push_back(cur);
    }
    if (out.back() != last)
        out.push_back(last);
    return out;
}

bool line_of_sight(const OccupancyGrid& grid, Vec2 a, Vec2 b) {
    for (const Cell& c : rasterize_segment(grid, a, b))
        if (grid.occupied(c))
            return false;
    return true;
}

} // namespace role_engine
