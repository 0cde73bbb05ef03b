#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <queue>
#include <sstream>

#include "role_engine/envmap.hpp"

namespace role_engine {

namespace {

constexpr std::array<int, 8> kRingCol{0, 1, 1, 1, 0, -1, -1, -1};
constexpr std::array<int, 8> kRingRow{-1, -1, 0, 1, 1, 1, 0, -1};
// Visit order for tracing: 4-neighbors before diagonals.
constexpr std::array<int, 8> kTraceOrder{0, 2, 4, 6, 1, 3, 5, 7};

double step_length(Cell a, Cell b) {
    return (a.col != b.col && a.row != b.row) ? std::numbers::sqrt2 : 1.0;
}

double cell_octile(Cell a, Cell b) {
    return octile_distance(std::abs(a.col - b.col), std::abs(a.row - b.row));
}

// Heading change (degrees) through a pixel reached from direction `in_dir` and left via `out_dir`,
// both given as ring indices of the neighbor relative to the pixel.
double turn_angle(int in_ring, int out_ring) {
    const Vec2 heading_in(-kRingCol[in_ring], -kRingRow[in_ring]);
    const Vec2 heading_out(kRingCol[out_ring], kRingRow[out_ring]);
    const double cosine = heading_in.normalized().dot(heading_out.normalized());
    return std::acos(std::clamp(cosine, -1.0, 1.0)) * 180.0 / std::numbers::pi;
}

// Splits the 8-neighborhood into runs of consecutive skeleton pixels and returns one
// representative ring index per run (a 4-neighbor when the run has one).
std::vector<int> neighbor_groups(const Skeleton& s, int col, int row) {
    std::array<bool, 8> on{};
    for (int i = 0; i < 8; ++i)
        on[i] = s.at(col + kRingCol[i], row + kRingRow[i]);
    int start = -1;
    for (int i = 0; i < 8; ++i)
        if (!on[i]) {
            start = i;
            break;
        }
    if (start < 0)
        return {0};
    std::vector<int> reps;
    int current = -1;
    for (int k = 1; k <= 8; ++k) {
        const int i = (start + k) % 8;
        if (on[i]) {
            if (current < 0)
                current = i;
            else if (i % 2 == 0 && current % 2 == 1)
                current = i;
        } else if (current >= 0) {
            reps.push_back(current);
            current = -1;
        }
    }
    if (current >= 0)
        reps.push_back(current);
    return reps;
}

bool is_feature_pixel(const Skeleton& s, int col, int row) {
    const int n = skeleton_neighbor_count(s, col, row);
    if (n == 0)
        return true;
    const int cn = crossing_number(s, col, row);
    if (cn >= 3 || cn == 1)
        return true;
    if (cn == 2) {
        const std::vector<int> groups = neighbor_groups(s, col, row);
        if (groups.size() == 2)
            return turn_angle(groups[0], groups[1]) > 45.0 + 1e-9;
    }
    return false;
}

struct Pathfinder {
    const std::vector<std::vector<EMapGraph::Neighbor>>& adjacency;
    const std::vector<Cell>& cells;
    double resolution;

    std::optional<GraphPath> run(int start, int goal) const {
        const size_t n = adjacency.size();
        constexpr double inf = std::numeric_limits<double>::infinity();
        std::vector<double> g(n, inf);
        std::vector<int> parent(n, -1);
        std::vector<char> closed(n, 0);
        auto heuristic = [&](int v) {
            return octile_distance(std::abs(cells[v].col - cells[goal].col), std::abs(cells[v].row - cells[goal].row)) *
                   resolution;
        };
        using Entry = std::pair<double, int>;
        std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
        g[start] = 0.0;
        open.push({heuristic(start), start});
        while (!open.empty()) {
            const int v = open.top().second;
            open.pop();
            if (closed[v])
                continue;
            closed[v] = 1;
            if (v == goal)
                break;
            for (const auto& nb : adjacency[v]) {
                const double candidate = g[v] + nb.weight;
                if (candidate < g[nb.node]) {
                    g[nb.node] = candidate;
                    parent[nb.node] = v;
                    open.push({candidate + heuristic(nb.node), nb.node});
                }
            }
        }
        if (!std::isfinite(g[goal]))
            return std::nullopt;
        GraphPath path;
        path.cost = g[goal];
        for (int v = goal; v >= 0; v = parent[v])
            path.nodes.push_back(v);
        std::reverse(path.nodes.begin(), path.nodes.end());
        return path;
    }
};

} // namespace

double octile_distance(double dx, double dy) {
    dx = std::abs(dx);
    dy = std::abs(dy);
    return std::max(dx, dy) + (std::numbers::sqrt2 - 1.0) * std::min(dx, dy);
}

std::vector<std::vector<EMapGraph::Neighbor>> EMapGraph::adjacency() const {
    std::vector<std::vector<Neighbor>> adj(nodes.size());
    for (const auto& e : edges) {
        if (e.a == e.b)
            continue;
        adj[static_cast<size_t>(e.a)].push_back({e.b, e.weight});
        adj[static_cast<size_t>(e.b)].push_back({e.a, e.weight});
    }
    return adj;
}

const EMapNode& EMapGraph::node(int id) const {
    if (id < 0 || static_cast<size_t>(id) >= nodes.size())
        throw InputError("unknown E-Map node " + std::to_string(id));
    return nodes[static_cast<size_t>(id)];
}

Vec2 EMapGraph::position(int id) const {
    const Cell c = node(id).cell;
    return {(c.col + 0.5) * skeleton.resolution(), (c.row + 0.5) * skeleton.resolution()};
}

std::optional<double> EMapGraph::edge_weight(int a, int b) const {
    std::optional<double> best;
    for (const auto& e : edges)
        if ((e.a == a && e.b == b) || (e.a == b && e.b == a))
            if (!best || e.weight < *best)
                best = e.weight;
    return best;
}

EMapGraph extract_feature_nodes(const Skeleton& skeleton, const OccupancyGrid* free_space) {
    EMapGraph g;
    g.skeleton = skeleton;
    const int w = skeleton.width();
    const int h = skeleton.height();
    const double res = skeleton.resolution();
    const size_t count = static_cast<size_t>(w) * h;
    g.pixel_edge.assign(count, -1);
    g.pixel_offset.assign(count, 0.0);
    g.pixel_node.assign(count, -1);
    auto idx = [w](Cell c) { return static_cast<size_t>(c.row) * w + c.col; };

    std::vector<char> feature(count, 0);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c)
            if (skeleton.at(c, r) && is_feature_pixel(skeleton, c, r))
                feature[idx({c, r})] = 1;

    // Merge 8-adjacent feature pixels into one node; the representative is the pixel
    // with the highest crossing number, then the most neighbors, then row-major first.
    std::vector<Cell> node_cells;
    auto add_cluster = [&](Cell seed) {
        const int id = static_cast<int>(g.nodes.size());
        std::vector<Cell> members{seed};
        g.pixel_node[idx(seed)] = id;
        for (size_t i = 0; i < members.size(); ++i)
            for (int k = 0; k < 8; ++k) {
                const Cell nb{members[i].col + kRingCol[k], members[i].row + kRingRow[k]};
                if (!skeleton.at(nb) || !feature[idx(nb)] || g.pixel_node[idx(nb)] >= 0)
                    continue;
                g.pixel_node[idx(nb)] = id;
                members.push_back(nb);
            }
        auto rank = [&](Cell c) {
            return std::make_tuple(crossing_number(skeleton, c.col, c.row),
                                   skeleton_neighbor_count(skeleton, c.col, c.row), -c.row, -c.col);
        };
        Cell rep = members.front();
        for (const Cell& m : members)
            if (rank(m) > rank(rep))
                rep = m;
        g.nodes.push_back({id, rep});
    };
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c)
            if (feature[idx({c, r})] && g.pixel_node[idx({c, r})] < 0)
                add_cluster({c, r});

    // Skeleton components without any feature pixel (closed loops) get their first pixel as a node.
    {
        std::vector<char> seen(count, 0);
        for (int r = 0; r < h; ++r)
            for (int c = 0; c < w; ++c) {
                if (!skeleton.at(c, r) || seen[idx({c, r})])
                    continue;
                std::vector<Cell> comp{{c, r}};
                seen[idx({c, r})] = 1;
                bool has_node = false;
                for (size_t i = 0; i < comp.size(); ++i) {
                    has_node = has_node || g.pixel_node[idx(comp[i])] >= 0;
                    for (int k = 0; k < 8; ++k) {
                        const Cell nb{comp[i].col + kRingCol[k], comp[i].row + kRingRow[k]};
                        if (skeleton.at(nb) && !seen[idx(nb)]) {
                            seen[idx(nb)] = 1;
                            comp.push_back(nb);
                        }
                    }
                }
                if (!has_node) {
                    feature[idx({c, r})] = 1;
                    add_cluster({c, r});
                }
            }
    }

    auto rep_offset = [&](Cell pixel) {
        const int id = g.pixel_node[idx(pixel)];
        return cell_octile(g.nodes[static_cast<size_t>(id)].cell, pixel) * res;
    };
    auto new_node = [&](Cell c) {
        const int id = static_cast<int>(g.nodes.size());
        g.nodes.push_back({id, c});
        g.pixel_node[idx(c)] = id;
        g.pixel_edge[idx(c)] = -1;
        return id;
    };
    auto visible = [&](Cell a, Cell b) {
        if (!free_space)
            return true;
        const Vec2 pa((a.col + 0.5) * res, (a.row + 0.5) * res);
        const Vec2 pb((b.col + 0.5) * res, (b.row + 0.5) * res);
        return line_of_sight(*free_space, pa, pb);
    };

    std::vector<char> visited(count, 0);
    const size_t initial_nodes = g.nodes.size();
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            const Cell origin{c, r};
            if (!skeleton.at(origin) || g.pixel_node[idx(origin)] < 0 ||
                static_cast<size_t>(g.pixel_node[idx(origin)]) >= initial_nodes)
                continue;
            for (int k : kTraceOrder) {
                const Cell first{c + kRingCol[k], r + kRingRow[k]};
                if (!skeleton.at(first) || g.pixel_node[idx(first)] >= 0 || visited[idx(first)])
                    continue;
                // Walk the arc until another node pixel is reached.
                int start_node = g.pixel_node[idx(origin)];
                Cell arc_start = origin;
                double length = rep_offset(origin);
                std::vector<Cell> arc_pixels;
                std::vector<double> arc_offsets;
                Cell prev = origin;
                Cell cur = first;
                length += step_length(prev, cur) * res;
                visited[idx(cur)] = 1;
                arc_pixels.push_back(cur);
                arc_offsets.push_back(length);
                auto close_edge = [&](int end_node, double total) {
                    const int edge_id = static_cast<int>(g.edges.size());
                    g.edges.push_back({start_node, end_node, total});
                    for (size_t i = 0; i < arc_pixels.size(); ++i) {
                        g.pixel_edge[idx(arc_pixels[i])] = edge_id;
                        g.pixel_offset[idx(arc_pixels[i])] = arc_offsets[i];
                    }
                    arc_pixels.clear();
                    arc_offsets.clear();
                };
                while (true) {
                    // A neighboring node pixel ends the arc (4-neighbors first).
                    int end_pixel_ring = -1;
                    for (int kk : kTraceOrder) {
                        const Cell nb{cur.col + kRingCol[kk], cur.row + kRingRow[kk]};
                        if (nb == prev || !skeleton.at(nb) || g.pixel_node[idx(nb)] < 0)
                            continue;
                        if (g.pixel_node[idx(nb)] == start_node && arc_pixels.size() < 2 && arc_start == origin)
                            continue;
                        end_pixel_ring = kk;
                        break;
                    }
                    if (end_pixel_ring >= 0) {
                        const Cell end{cur.col + kRingCol[end_pixel_ring], cur.row + kRingRow[end_pixel_ring]};
                        const double total = length + step_length(cur, end) * res + rep_offset(end);
                        close_edge(g.pixel_node[idx(end)], total);
                        break;
                    }
                    int next_ring = -1;
                    for (int kk : kTraceOrder) {
                        const Cell nb{cur.col + kRingCol[kk], cur.row + kRingRow[kk]};
                        if (nb == prev || !skeleton.at(nb) || visited[idx(nb)] || g.pixel_node[idx(nb)] >= 0)
                            continue;
                        next_ring = kk;
                        break;
                    }
                    if (next_ring < 0) {
                        // Dead end without a node (only possible on degenerate input): end the arc here.
                        const int end_node = new_node(cur);
                        arc_pixels.pop_back();
                        arc_offsets.pop_back();
                        close_edge(end_node, length);
                        break;
                    }
                    const Cell next{cur.col + kRingCol[next_ring], cur.row + kRingRow[next_ring]};
                    if (!visible(arc_start, next) && arc_pixels.size() >= 2) {
                        // Bend: close the arc at `cur` and restart from it.
                        const int bend = new_node(cur);
                        arc_pixels.pop_back();
                        arc_offsets.pop_back();
                        close_edge(bend, length);
                        start_node = bend;
                        arc_start = cur;
                        length = 0.0;
                    }
                    prev = cur;
                    cur = next;
                    length += step_length(prev, cur) * res;
                    visited[idx(cur)] = 1;
                    arc_pixels.push_back(cur);
                    arc_offsets.push_back(length);
                }
            }
        }
    return g;
}

EMapGraph build_emap(const OccupancyGrid& feasible_grid) {
    return extract_feature_nodes(destair(skeletonize(feasible_grid)), &feasible_grid);
}

std::optional<GraphPath> astar_octile(const EMapGraph& emap, int start_node, int end_node) {
    emap.node(start_node);
    emap.node(end_node);
    const auto adjacency = emap.adjacency();
    std::vector<Cell> cells;
    cells.reserve(emap.nodes.size());
    for (const auto& n : emap.nodes)
        cells.push_back(n.cell);
    return Pathfinder{adjacency, cells, emap.skeleton.resolution()}.run(start_node, end_node);
}

namespace {

struct Anchor {
    Cell pixel;
    int node = -1;   // node id when the pixel is a node pixel
    int edge = -1;   // edge id otherwise
    double offset = 0.0;
};

std::optional<Anchor> snap_to_skeleton(const EMapGraph& emap, const OccupancyGrid& grid, const std::vector<int>& labels,
                                       Vec2 p) {
    const Cell start = grid.cell_at(p);
    const int label = labels[grid.index(start.col, start.row)];
    std::optional<Anchor> best_visible;
    std::optional<Anchor> best_any;
    double d_visible = std::numeric_limits<double>::infinity();
    double d_any = std::numeric_limits<double>::infinity();
    const double res = grid.resolution();
    for (int r = 0; r < emap.skeleton.height(); ++r)
        for (int c = 0; c < emap.skeleton.width(); ++c) {
            if (!emap.skeleton.at(c, r) || labels[grid.index(c, r)] != label)
                continue;
            const size_t i = grid.index(c, r);
            Anchor a{{c, r}, emap.pixel_node[i], emap.pixel_edge[i], emap.pixel_offset[i]};
            if (a.node < 0 && a.edge < 0)
                continue;
            const Vec2 center((c + 0.5) * res, (r + 0.5) * res);
            const double d = (center - p).norm();
            if (d < d_any) {
                d_any = d;
                best_any = a;
            }
            if (d < d_visible && line_of_sight(grid, p, center)) {
                d_visible = d;
                best_visible = a;
            }
        }
    return best_visible ? best_visible : best_any;
}

} // namespace

std::optional<AuxNodes> find_aux_nodes(const EMapGraph& emap, const OccupancyGrid& feasible_grid, Vec2 source,
                                       Vec2 dest) {
    if (!feasible_grid.contains(source) || !feasible_grid.contains(dest) ||
        feasible_grid.occupied(feasible_grid.cell_at(source)) || feasible_grid.occupied(feasible_grid.cell_at(dest)))
        return std::nullopt;
    const std::vector<int> labels = label_free_components(feasible_grid);
    const auto s = snap_to_skeleton(emap, feasible_grid, labels, source);
    const auto t = snap_to_skeleton(emap, feasible_grid, labels, dest);
    if (!s || !t)
        return std::nullopt;

    auto adjacency = emap.adjacency();
    std::vector<Cell> cells;
    for (const auto& n : emap.nodes)
        cells.push_back(n.cell);
    const int n = static_cast<int>(emap.nodes.size());
    const int vs = n;
    const int vt = n + 1;
    adjacency.resize(static_cast<size_t>(n) + 2);
    cells.push_back(s->pixel);
    cells.push_back(t->pixel);
    const double res = feasible_grid.resolution();
    auto connect = [&](int virt, const Anchor& a) {
        auto link = [&](int node, double w) {
            adjacency[static_cast<size_t>(virt)].push_back({node, w});
            adjacency[static_cast<size_t>(node)].push_back({virt, w});
        };
        if (a.node >= 0) {
            link(a.node, cell_octile(emap.nodes[static_cast<size_t>(a.node)].cell, a.pixel) * res);
        } else {
            const EMapEdge& e = emap.edges[static_cast<size_t>(a.edge)];
            link(e.a, a.offset);
            link(e.b, std::max(0.0, e.weight - a.offset));
        }
    };
    connect(vs, *s);
    connect(vt, *t);
    if (s->edge >= 0 && s->edge == t->edge) {
        const double w = std::abs(s->offset - t->offset);
        adjacency[static_cast<size_t>(vs)].push_back({vt, w});
        adjacency[static_cast<size_t>(vt)].push_back({vs, w});
    }
    if (s->pixel == t->pixel) {
        adjacency[static_cast<size_t>(vs)].push_back({vt, 0.0});
        adjacency[static_cast<size_t>(vt)].push_back({vs, 0.0});
    }
    const auto path = Pathfinder{adjacency, cells, res}.run(vs, vt);
    if (!path)
        return std::nullopt;

    AuxNodes aux;
    aux.source_anchor = Vec2((s->pixel.col + 0.5) * res, (s->pixel.row + 0.5) * res);
    aux.dest_anchor = Vec2((t->pixel.col + 0.5) * res, (t->pixel.row + 0.5) * res);
    aux.skeleton_cost = path->cost;
    aux.waypoints.push_back(aux.source_anchor);
    for (int v : path->nodes)
        if (v < n) {
            aux.node_ids.push_back(v);
            aux.waypoints.push_back(emap.position(v));
        }
    aux.waypoints.push_back(aux.dest_anchor);
    aux.waypoints.erase(std::unique(aux.waypoints.begin(), aux.waypoints.end(),
                                    [](const Vec2& a, const Vec2& b) { return (a - b).norm() < 1e-12; }),
                        aux.waypoints.end());
    return aux;
}

std::vector<Vec2> reduce_nodes(const std::vector<Vec2>& points, const OccupancyGrid& feasible_grid, Vec2 source,
                               Vec2 dest) {
    std::vector<Vec2> seq;
    seq.reserve(points.size() + 2);
    seq.push_back(source);
    for (const Vec2& p : points)
        if ((p - seq.back()).norm() > 1e-12)
            seq.push_back(p);
    if ((dest - seq.back()).norm() > 1e-12 || seq.size() == 1)
        seq.push_back(dest);

    std::vector<Vec2> out{seq.front()};
    size_t i = 0;
    while (i + 1 < seq.size()) {
        size_t next = i + 1;
        for (size_t j = seq.size() - 1; j > i + 1; --j)
            if (line_of_sight(feasible_grid, seq[i], seq[j])) {
                next = j;
                break;
            }
        out.push_back(seq[next]);
        i = next;
    }
    return out;
}

std::string emap_to_text(const EMapGraph& emap) {
    std::ostringstream out;
    out.precision(9);
    out << "# nodes: node_id col row\n";
    for (const auto& n : emap.nodes)
        out << n.id << ' ' << n.cell.col << ' ' << n.cell.row << '\n';
    out << "# edges: node_a node_b weight_m\n";
    for (const auto& e : emap.edges)
        out << e.a << ' ' << e.b << ' ' << e.weight << '\n';
    return out.str();
}

} // namespace role_engine
