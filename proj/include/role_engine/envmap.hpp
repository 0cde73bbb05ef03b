#pragma once

#include <optional>
#include <string>
#include <vector>

#include "role_engine/grid.hpp"
#include "role_engine/sdf.hpp"

namespace role_engine {

/// Configuration-space inflation: a cell becomes occupied iff some occupied cell
/// (or the world frame) lies within `robot.radius` of its center. Radii beyond half
/// the smaller grid side give a fully occupied grid.
OccupancyGrid dilate_for_robot(const OccupancyGrid& grid, const RobotType& robot);

/// Binary raster of skeleton pixels. Outside the raster reads as background.
class Skeleton {
public:
    Skeleton() = default;
    Skeleton(int width, int height, double resolution);

    int width() const { return width_; }
    int height() const { return height_; }
    double resolution() const { return resolution_; }

    bool at(int col, int row) const {
        return col >= 0 && row >= 0 && col < width_ && row < height_ &&
               pixels_[static_cast<size_t>(row) * width_ + col] != 0;
    }
    bool at(Cell c) const { return at(c.col, c.row); }
    void set(int col, int row, bool value) { pixels_[static_cast<size_t>(row) * width_ + col] = value ? 1 : 0; }
    void set(Cell c, bool value) { set(c.col, c.row, value); }

    size_t count() const;
    std::vector<Cell> pixels() const;

    friend bool operator==(const Skeleton&, const Skeleton&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    double resolution_ = 1.0;
    std::vector<std::uint8_t> pixels_;
};

/// Two-subiteration Zhang-Suen thinning of the free space, followed by removal of
/// redundant pixels in 2x2 blocks. A free component that thins away entirely keeps
/// its deepest cell so every component stays represented.
Skeleton skeletonize(const OccupancyGrid& grid);

/// Number of skeleton pixels among the 8 neighbors of (col, row).
int skeleton_neighbor_count(const Skeleton& skeleton, int col, int row);

/// Number of background->skeleton transitions walking the 8-neighborhood once.
int crossing_number(const Skeleton& skeleton, int col, int row);

/// Rewrites single-pixel staircase steps (a pixel whose only two neighbors are
/// perpendicular 4-neighbors) into diagonal moves until nothing changes.
Skeleton destair(Skeleton skeleton);

struct EMapNode {
    int id = 0;
    Cell cell;
};

struct EMapEdge {
    int a = 0;
    int b = 0;
    double weight = 0.0; // meters along the skeleton
};

/// Weighted skeleton graph. Nodes are feature pixels; edges follow skeleton arcs.
struct EMapGraph {
    std::vector<EMapNode> nodes;
    std::vector<EMapEdge> edges;
    Skeleton skeleton;

    /// For every skeleton pixel: the edge index it lies on (-1 for node pixels)
    /// and its arc length from that edge's `a` node.
    std::vector<int> pixel_edge;
    std::vector<double> pixel_offset;
    /// Node id owning a node pixel (clustered junction pixels share one id), else -1.
    std::vector<int> pixel_node;

    struct Neighbor {
        int node = 0;
        double weight = 0.0;
    };
    std::vector<std::vector<Neighbor>> adjacency() const;

    const EMapNode& node(int id) const;
    Vec2 position(int id) const;
    std::optional<double> edge_weight(int a, int b) const;
};

/// Builds the graph over `skeleton`. Feature pixels are junctions (crossing number
/// >= 3, adjacent junction pixels merged), endpoints (one neighbor), isolated
/// pixels, and corners (two neighbors turning by more than 45 degrees). When
/// `free_space` is given, an extra bend node is inserted wherever an arc would
/// otherwise lose straight-line visibility between its end nodes.
EMapGraph extract_feature_nodes(const Skeleton& skeleton, const OccupancyGrid* free_space = nullptr);

/// Thin, de-stair and extract on an already dilated feasible-location map.
EMapGraph build_emap(const OccupancyGrid& feasible_grid);

/// Octile distance in cells: max(dx, dy) + (sqrt2 - 1) * min(dx, dy).
double octile_distance(double dx, double dy);

struct GraphPath {
    std::vector<int> nodes;
    double cost = 0.0;
};

/// A* with the octile heuristic (scaled to meters). Throws InputError for unknown nodes.
std::optional<GraphPath> astar_octile(const EMapGraph& emap, int start_node, int end_node);

/// Auxiliary waypoints between a source and destination (both world positions).
struct AuxNodes {
    Vec2 source_anchor;            // skeleton pixel the source snapped to
    Vec2 dest_anchor;              // skeleton pixel the destination snapped to
    std::vector<int> node_ids;     // feature nodes traversed, in order
    std::vector<Vec2> waypoints;   // source anchor, traversed nodes, destination anchor
    double skeleton_cost = 0.0;
};

/// Snaps source and destination onto the skeleton and runs A* between them.
/// Returns nullopt when either end is blocked in `feasible_grid` or no path exists.
std::optional<AuxNodes> find_aux_nodes(const EMapGraph& emap, const OccupancyGrid& feasible_grid, Vec2 source,
                                       Vec2 dest);

/// Greedy line-of-sight shortcutting over [source, points..., dest].
std::vector<Vec2> reduce_nodes(const std::vector<Vec2>& points, const OccupancyGrid& feasible_grid, Vec2 source,
                               Vec2 dest);

struct InitialPath {
    std::string agent_id;
    std::string role_id;
    std::vector<Vec2> waypoints;
    std::vector<Eigen::Vector4d> states; // [x, y, vx, vy]
    double dt = 0.0;
};

/// N+1 states at equal arc-length spacing along the polyline through `nodes`
/// (which must start at the source and end at the destination). Velocities are
/// central finite differences over dt = total_time / N, one-sided at the ends.
InitialPath make_init_path(const std::vector<Vec2>& nodes, int steps, double total_time);

/// Debug dump: "<id> <col> <row>" node lines, then "<a> <b> <weight_m>" edge lines,
/// each block preceded by a "#" header line.
std::string emap_to_text(const EMapGraph& emap);

} // namespace role_engine
