#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "role_engine/envmap.hpp"
#include "role_engine/log.hpp"

namespace role_engine {

// Neighbor offsets P2..P9 in Zhang-Suen order: N, NE, E, SE, S, SW, W, NW.
constexpr std::array<int, 8> kRingCol{0, 1, 1, 1, 0, -1, -1, -1};
constexpr std::array<int, 8> kRingRow{-1, -1, 0, 1, 1, 1, 0, -1};

OccupancyGrid dilate_for_robot(const OccupancyGrid& grid, const RobotType& robot) {
    if (robot.radius < 0.0)
        throw InputError("dilation radius must be non-negative");
    OccupancyGrid out = grid;
    const double radius_cells = robot.radius / grid.resolution();
    if (radius_cells > 0.5 * std::min(grid.width(), grid.height())) {
        std::ostringstream msg;
        msg << "robot '" << robot.id << "' radius " << robot.radius << " m exceeds half the map; map fully blocked";
        log::warning(msg.str());
        for (int r = 0; r < grid.height(); ++r)
            for (int c = 0; c < grid.width(); ++c)
                out.set_occupied(c, r, true);
        return out;
    }
    if (robot.radius == 0.0)
        return out;
    const SignedDistanceField sdf = compute_sdf(grid);
    // Free-cell SDF values are exact center distances to the nearest occupied cell.
    const double limit = robot.radius + 1e-9 * grid.resolution();
    for (int r = 0; r < grid.height(); ++r)
        for (int c = 0; c < grid.width(); ++c)
            if (!grid.occupied(c, r) && sdf.at(c, r) <= limit)
                out.set_occupied(c, r, true);
    return out;
}

Skeleton::Skeleton(int width, int height, double resolution)
    : width_(width), height_(height), resolution_(resolution),
      pixels_(static_cast<size_t>(width) * height, 0) {}

size_t Skeleton::count() const {
    return static_cast<size_t>(std::count_if(pixels_.begin(), pixels_.end(), [](auto v) { return v != 0; }));
}

std::vector<Cell> Skeleton::pixels() const {
    std::vector<Cell> out;
    for (int r = 0; r < height_; ++r)
        for (int c = 0; c < width_; ++c)
            if (at(c, r))
                out.push_back({c, r});
    return out;
}

int skeleton_neighbor_count(const Skeleton& s, int col, int row) {
    int n = 0;
    for (int i = 0; i < 8; ++i)
        n += s.at(col + kRingCol[i], row + kRingRow[i]) ? 1 : 0;
    return n;
}

int crossing_number(const Skeleton& s, int col, int row) {
    int transitions = 0;
    for (int i = 0; i < 8; ++i) {
        const bool here = s.at(col + kRingCol[i], row + kRingRow[i]);
        const bool next = s.at(col + kRingCol[(i + 1) % 8], row + kRingRow[(i + 1) % 8]);
        transitions += (!here && next) ? 1 : 0;
    }
    return transitions;
}

namespace {

// True when removing (col,row) keeps its skeleton neighbors 8-connected within the ring.
bool is_simple(const Skeleton& s, int col, int row) {
    std::array<bool, 8> on{};
    int count = 0;
    for (int i = 0; i < 8; ++i) {
        on[i] = s.at(col + kRingCol[i], row + kRingRow[i]);
        count += on[i] ? 1 : 0;
    }
    if (count <= 1)
        return count == 1;
    // Flood over ring positions; two ring pixels touch when their offsets are 8-adjacent.
    std::array<bool, 8> seen{};
    std::array<int, 8> stack{};
    int top = 0;
    const int first = static_cast<int>(std::find(on.begin(), on.end(), true) - on.begin());
    stack[top++] = first;
    seen[first] = true;
    int reached = 1;
    while (top > 0) {
        const int i = stack[--top];
        for (int j = 0; j < 8; ++j) {
            if (!on[j] || seen[j])
                continue;
            if (std::abs(kRingCol[i] - kRingCol[j]) <= 1 && std::abs(kRingRow[i] - kRingRow[j]) <= 1) {
                seen[j] = true;
                stack[top++] = j;
                ++reached;
            }
        }
    }
    return reached == count;
}

bool zhang_suen_pass(Skeleton& s, int subiteration) {
    std::vector<Cell> doomed;
    for (int r = 0; r < s.height(); ++r)
        for (int c = 0; c < s.width(); ++c) {
            if (!s.at(c, r))
                continue;
            std::array<int, 8> p{};
            int b = 0;
            for (int i = 0; i < 8; ++i) {
                p[i] = s.at(c + kRingCol[i], r + kRingRow[i]) ? 1 : 0;
                b += p[i];
            }
            if (b < 2 || b > 6)
                continue;
            int a = 0;
            for (int i = 0; i < 8; ++i)
                a += (p[i] == 0 && p[(i + 1) % 8] == 1) ? 1 : 0;
            if (a != 1)
                continue;
            // p[0]=P2(N) p[2]=P4(E) p[4]=P6(S) p[6]=P8(W)
            if (subiteration == 0) {
                if (p[0] * p[2] * p[4] != 0 || p[2] * p[4] * p[6] != 0)
                    continue;
            } else {
                if (p[0] * p[2] * p[6] != 0 || p[0] * p[4] * p[6] != 0)
                    continue;
            }
            doomed.push_back({c, r});
        }
    for (const Cell& cell : doomed)
        s.set(cell, false);
    return !doomed.empty();
}

void remove_square_blocks(Skeleton& s) {
    bool changed = true;
    while (changed) {
        changed = false;
        for (int r = 0; r + 1 < s.height(); ++r)
            for (int c = 0; c + 1 < s.width(); ++c) {
                if (!(s.at(c, r) && s.at(c + 1, r) && s.at(c, r + 1) && s.at(c + 1, r + 1)))
                    continue;
                const std::array<Cell, 4> block{Cell{c, r}, Cell{c + 1, r}, Cell{c, r + 1}, Cell{c + 1, r + 1}};
                for (const Cell& cell : block)
                    if (is_simple(s, cell.col, cell.row)) {
                        s.set(cell, false);
                        changed = true;
                        break;
                    }
            }
    }
}

} // namespace

Skeleton skeletonize(const OccupancyGrid& grid) {
    Skeleton s(grid.width(), grid.height(), grid.resolution());
    for (int r = 0; r < grid.height(); ++r)
        for (int c = 0; c < grid.width(); ++c)
            if (grid.free(c, r))
                s.set(c, r, true);
    while (true) {
        const bool first = zhang_suen_pass(s, 0);
        const bool second = zhang_suen_pass(s, 1);
        if (!first && !second)
            break;
    }
    remove_square_blocks(s);

    int components = 0;
    const std::vector<int> labels = label_free_components(grid, &components);
    std::vector<char> represented(static_cast<size_t>(components), 0);
    for (int r = 0; r < grid.height(); ++r)
        for (int c = 0; c < grid.width(); ++c)
            if (s.at(c, r))
                represented[static_cast<size_t>(labels[grid.index(c, r)])] = 1;
    if (std::find(represented.begin(), represented.end(), 0) != represented.end()) {
        const SignedDistanceField sdf = compute_sdf(grid);
        std::vector<Cell> deepest(static_cast<size_t>(components), Cell{-1, -1});
        for (int r = 0; r < grid.height(); ++r)
            for (int c = 0; c < grid.width(); ++c) {
                const int label = labels[grid.index(c, r)];
                if (label < 0 || represented[static_cast<size_t>(label)])
                    continue;
                Cell& best = deepest[static_cast<size_t>(label)];
                if (best.col < 0 || sdf.at(c, r) > sdf.at(best.col, best.row))
                    best = {c, r};
            }
        for (const Cell& cell : deepest)
            if (cell.col >= 0)
                s.set(cell, true);
    }
    return s;
}

Skeleton destair(Skeleton s) {
    // (first neighbor, second neighbor) index pairs in ring order that form a right angle.
    constexpr std::array<std::array<int, 2>, 4> corners{{{0, 2}, {2, 4}, {4, 6}, {6, 0}}};
    bool changed = true;
    while (changed) {
        changed = false;
        for (int r = 0; r < s.height(); ++r)
            for (int c = 0; c < s.width(); ++c) {
                if (!s.at(c, r) || skeleton_neighbor_count(s, c, r) != 2)
                    continue;
                for (const auto& pair : corners) {
                    if (s.at(c + kRingCol[pair[0]], r + kRingRow[pair[0]]) &&
                        s.at(c + kRingCol[pair[1]], r + kRingRow[pair[1]])) {
                        s.set(c, r, false);
                        changed = true;
                        break;
                    }
                }
            }
    }
    return s;
}

} // namespace role_engine
