#include <doctest.h>

#include <cmath>
#include <limits>
#include <queue>
#include <random>

#include "oracles.hpp"
#include "role_engine/envmap.hpp"

using namespace role_engine;

namespace {

OccupancyGrid corridor(int length, int width) {
    OccupancyGrid g(length + 2, width + 2, 1.0);
    for (int r = 0; r < g.height(); ++r)
        for (int c = 0; c < g.width(); ++c)
            g.set_occupied(c, r, r == 0 || r == g.height() - 1 || c == 0 || c == g.width() - 1);
    return g;
}

Skeleton skeleton_from(const std::vector<std::string>& rows) {
    Skeleton s(static_cast<int>(rows[0].size()), static_cast<int>(rows.size()), 1.0);
    for (int r = 0; r < s.height(); ++r)
        for (int c = 0; c < s.width(); ++c)
            s.set(c, r, rows[static_cast<size_t>(r)][static_cast<size_t>(c)] == '#');
    return s;
}

OccupancyGrid grid_from(const std::vector<std::string>& rows, double res = 1.0) {
    OccupancyGrid g(static_cast<int>(rows[0].size()), static_cast<int>(rows.size()), res);
    for (int r = 0; r < g.height(); ++r)
        for (int c = 0; c < g.width(); ++c)
            g.set_occupied(c, r, rows[static_cast<size_t>(r)][static_cast<size_t>(c)] == '#');
    return g;
}

} // namespace

TEST_CASE("load_grid thresholds pixels") {
    GrayImage white{4, 3, std::vector<std::uint8_t>(12, 255)};
    CHECK(load_grid(white, 0.05).count_occupied() == 0);
    GrayImage black{4, 3, std::vector<std::uint8_t>(12, 0)};
    CHECK(load_grid(black, 0.05).count_occupied() == 12);
    GrayImage big{200, 200, std::vector<std::uint8_t>(40000, 255)};
    const OccupancyGrid g = load_grid(big, 0.05);
    CHECK(g.width() == 200);
    CHECK(g.height() == 200);
    CHECK_THROWS_AS(load_grid(GrayImage{}, 0.05), InputError);
}

TEST_CASE("dilation matches a brute-force disc and is monotone in radius") {
    OccupancyGrid g(9, 9, 1.0);
    g.set_occupied(4, 4, true);
    RobotType robot;
    robot.radius = 0.0;
    CHECK(dilate_for_robot(g, robot) == g);

    robot.radius = 1.0;
    const OccupancyGrid d = dilate_for_robot(g, robot);
    for (int r = 1; r < 8; ++r)
        for (int c = 1; c < 8; ++c) {
            const bool inside = std::hypot(c - 4, r - 4) <= 1.0;
            CHECK(d.occupied(c, r) == inside);
        }

    const OccupancyGrid map = load_grid(read_pgm(std::string(ROLE_ENGINE_DATA_DIR) + "/maps/env6_narrow.pgm"), 0.05);
    RobotType small, large;
    small.radius = 0.02;
    large.radius = 0.1;
    const OccupancyGrid ds = dilate_for_robot(map, small), dl = dilate_for_robot(map, large);
    for (int r = 0; r < map.height(); ++r)
        for (int c = 0; c < map.width(); ++c)
            if (ds.occupied(c, r))
                REQUIRE(dl.occupied(c, r));
}

TEST_CASE("oversized radius gives a fully occupied grid") {
    OccupancyGrid g(10, 10, 1.0);
    RobotType robot;
    robot.radius = 6.0;
    CHECK(dilate_for_robot(g, robot).count_occupied() == 100);
}

TEST_CASE("SDF hand values on a 5x5 grid with the center occupied") {
    OccupancyGrid g(5, 5, 1.0);
    g.set_occupied(2, 2, true);
    const SignedDistanceField sdf = compute_sdf(g);
    CHECK(sdf.at(2, 1) == doctest::Approx(1.0));
    CHECK(sdf.at(1, 2) == doctest::Approx(1.0));
    CHECK(sdf.at(1, 1) == doctest::Approx(std::sqrt(2.0)));
    CHECK(sdf.at(2, 2) <= 0.0);
}

TEST_CASE("SDF is within one cell of brute force on random grids") {
    std::mt19937 rng(11);
    for (int trial = 0; trial < 12; ++trial) {
        const int w = 8 + static_cast<int>(rng() % 57), h = 8 + static_cast<int>(rng() % 57);
        const double res = trial % 2 ? 0.05 : 1.0;
        OccupancyGrid g(w, h, res);
        const double density = 0.02 + 0.1 * (trial % 4);
        std::bernoulli_distribution occ(density);
        for (int r = 0; r < h; ++r)
            for (int c = 0; c < w; ++c)
                g.set_occupied(c, r, occ(rng));
        const SignedDistanceField sdf = compute_sdf(g);
        const std::vector<double> oracle = oracles::brute_force_sdf(g);
        for (int r = 0; r < h; ++r)
            for (int c = 0; c < w; ++c)
                REQUIRE(std::abs(sdf.at(c, r) - oracle[g.index(c, r)]) <= res + 1e-12);
    }
}

TEST_CASE("all-free grid measures distance to the bounded-world frame") {
    OccupancyGrid g(7, 5, 1.0);
    const SignedDistanceField sdf = compute_sdf(g);
    CHECK(sdf.at(0, 0) == doctest::Approx(1.0));
    CHECK(sdf.at(3, 2) == doctest::Approx(3.0));
}

TEST_CASE("SDF interpolant gradient matches finite differences") {
    const OccupancyGrid g = load_grid(read_pgm(std::string(ROLE_ENGINE_DATA_DIR) + "/maps/open64.pgm"), 0.05);
    const SignedDistanceField sdf = compute_sdf(g);
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(0.2, 3.0);
    for (int i = 0; i < 50; ++i) {
        const Vec2 p(u(rng), u(rng));
        Vec2 grad;
        sdf.value(p, &grad);
        const double h = 1e-7;
        const double gx = (sdf.value(p + Vec2(h, 0)) - sdf.value(p - Vec2(h, 0))) / (2 * h);
        const double gy = (sdf.value(p + Vec2(0, h)) - sdf.value(p - Vec2(0, h))) / (2 * h);
        CHECK(std::abs(grad.x() - gx) <= 1e-5 * std::max(1.0, std::abs(gx)));
        CHECK(std::abs(grad.y() - gy) <= 1e-5 * std::max(1.0, std::abs(gy)));
    }
}

TEST_CASE("skeleton of a straight 3-wide corridor is its centerline") {
    const OccupancyGrid g = corridor(20, 3);
    const Skeleton s = skeletonize(g);
    const Skeleton reference = oracles::zhang_suen(g);
    CHECK(s == reference);
    REQUIRE(s.count() >= 16);
    int first = -1, last = -1;
    for (int r = 0; r < s.height(); ++r)
        for (int c = 0; c < s.width(); ++c)
            if (s.at(c, r)) {
                REQUIRE(r == 2);
                if (first < 0)
                    first = c;
                last = c;
            }
    CHECK(last - first + 1 == static_cast<int>(s.count()));
}

TEST_CASE("skeleton of a single free cell is that cell") {
    OccupancyGrid g(3, 3, 1.0);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            g.set_occupied(c, r, !(r == 1 && c == 1));
    const Skeleton s = skeletonize(g);
    CHECK(s.count() == 1);
    CHECK(s.at(1, 1));
}

TEST_CASE("L-shaped corridor thins to a connected L") {
    const OccupancyGrid g = grid_from({
        "##########",
        "#...######",
        "#...######",
        "#...######",
        "#...######",
        "#........#",
        "#........#",
        "#........#",
        "##########",
    });
    const Skeleton s = skeletonize(g);
    CHECK(oracles::skeleton_components(s) == 1);
    CHECK(s.at(2, 6));
    for (const Cell& c : s.pixels())
        CHECK(g.free(c));
}

TEST_CASE("skeleton soundness on random maps") {
    std::mt19937 rng(5);
    for (int trial = 0; trial < 8; ++trial) {
        OccupancyGrid g(40, 30, 0.05);
        for (int k = 0; k < 8; ++k) {
            const int c0 = static_cast<int>(rng() % 36), r0 = static_cast<int>(rng() % 26);
            const int c1 = c0 + 1 + static_cast<int>(rng() % 5), r1 = r0 + 1 + static_cast<int>(rng() % 5);
            for (int r = r0; r < r1; ++r)
                for (int c = c0; c < c1; ++c)
                    if (g.in_bounds(c, r))
                        g.set_occupied(c, r, true);
        }
        const Skeleton s = skeletonize(g);
        for (const Cell& c : s.pixels())
            REQUIRE(g.free(c));
        for (int r = 0; r + 1 < s.height(); ++r)
            for (int c = 0; c + 1 < s.width(); ++c)
                REQUIRE_FALSE((s.at(c, r) && s.at(c + 1, r) && s.at(c, r + 1) && s.at(c + 1, r + 1)));
        int count = 0;
        const std::vector<int> labels = label_free_components(g, &count);
        std::vector<int> pixels(static_cast<size_t>(count), 0);
        for (const Cell& c : s.pixels())
            ++pixels[static_cast<size_t>(labels[g.index(c.col, c.row)])];
        for (int p : pixels)
            CHECK(p > 0);
    }
}

TEST_CASE("destair rewrites staircases and is idempotent") {
    const Skeleton straight = skeleton_from({".....", "#####", "....."});
    CHECK(destair(straight) == straight);

    const Skeleton stair = skeleton_from({
        "###..",
        "..#..",
        "..###",
    });
    const Skeleton out = destair(stair);
    CHECK(out.at(0, 0));
    CHECK(out.at(4, 2));
    CHECK(out.at(1, 0));
    CHECK(out.at(2, 1));
    CHECK(out.at(3, 2));
    CHECK(out.count() == 5);
    CHECK(oracles::skeleton_components(out) == 1);
    CHECK(destair(out) == out);
}

TEST_CASE("feature nodes of simple skeletons") {
    const Skeleton line = skeleton_from({".......", ".#####.", "......."});
    const EMapGraph g1 = extract_feature_nodes(line);
    CHECK(g1.nodes.size() == 2);
    REQUIRE(g1.edges.size() == 1);
    CHECK(g1.edges[0].weight == doctest::Approx(4.0));

    const Skeleton plus = skeleton_from({
        ".......",
        "...#...",
        "...#...",
        ".#####.",
        "...#...",
        "...#...",
        ".......",
    });
    const EMapGraph g2 = extract_feature_nodes(plus);
    CHECK(g2.nodes.size() == 5);
    CHECK(g2.edges.size() == 4);

    const Skeleton loop = skeleton_from({
        ".......",
        ".#####.",
        ".#...#.",
        ".#...#.",
        ".#####.",
        ".......",
    });
    const EMapGraph g3 = extract_feature_nodes(loop);
    CHECK(g3.nodes.size() == 4);
    CHECK(g3.edges.size() == 4);
}

TEST_CASE("octile distance values") {
    CHECK(octile_distance(3, 0) == doctest::Approx(3.0));
    CHECK(octile_distance(3, 3) == doctest::Approx(3 * std::sqrt(2.0)));
    CHECK(octile_distance(3, 4) == doctest::Approx(4 + 3 * (std::sqrt(2.0) - 1)));
}

TEST_CASE("A* cost equals Dijkstra on 100 random graphs") {
    std::mt19937 rng(2024);
    for (int trial = 0; trial < 100; ++trial) {
        const EMapGraph g = oracles::random_emap(rng, 20, 0.05);
        const int s = static_cast<int>(rng() % 20), t = static_cast<int>(rng() % 20);
        const std::optional<GraphPath> path = astar_octile(g, s, t);
        const double expected = oracles::dijkstra(g, s, t);
        if (!std::isfinite(expected)) {
            REQUIRE_FALSE(path.has_value());
            continue;
        }
        REQUIRE(path.has_value());
        REQUIRE(path->cost == doctest::Approx(expected).epsilon(1e-12));
        double along = 0.0;
        for (size_t i = 0; i + 1 < path->nodes.size(); ++i)
            along += *g.edge_weight(path->nodes[i], path->nodes[i + 1]);
        REQUIRE(along == doctest::Approx(path->cost));
    }
    const EMapGraph g = oracles::random_emap(rng, 5, 1.0);
    const auto self = astar_octile(g, 2, 2);
    REQUIRE(self);
    CHECK(self->nodes.size() == 1);
    CHECK(self->cost == 0.0);
    CHECK_THROWS_AS(astar_octile(g, 0, 99), InputError);
}

TEST_CASE("aux nodes keep the corner of an L corridor") {
    const OccupancyGrid g = grid_from({
        "############",
        "#...########",
        "#...########",
        "#...########",
        "#...########",
        "#...########",
        "#..........#",
        "#..........#",
        "#..........#",
        "############",
    });
    const EMapGraph emap = build_emap(g);
    const Vec2 src(2.5, 1.5), dst(10.5, 7.5);
    const auto aux = find_aux_nodes(emap, g, src, dst);
    REQUIRE(aux);
    const std::vector<Vec2> reduced = reduce_nodes(aux->waypoints, g, src, dst);
    REQUIRE(reduced.size() >= 3);
    CHECK(reduced.front() == src);
    CHECK(reduced.back() == dst);
    for (size_t i = 0; i + 1 < reduced.size(); ++i)
        CHECK(line_of_sight(g, reduced[i], reduced[i + 1]));
    CHECK(reduce_nodes(std::vector<Vec2>(reduced.begin() + 1, reduced.end() - 1), g, src, dst) == reduced);
}

TEST_CASE("aux nodes do not exist into a sealed room") {
    const OccupancyGrid g = load_grid(read_pgm(std::string(ROLE_ENGINE_DATA_DIR) + "/maps/sealed_room.pgm"), 0.05);
    RobotType robot;
    const OccupancyGrid feasible = dilate_for_robot(g, robot);
    const EMapGraph emap = build_emap(feasible);
    CHECK_FALSE(find_aux_nodes(emap, feasible, Vec2(0.5, 0.5), Vec2(3.75, 3.75)).has_value());
    CHECK(find_aux_nodes(emap, feasible, Vec2(0.5, 0.5), Vec2(4.6, 0.5)).has_value());
}

TEST_CASE("collinear nodes reduce to the endpoints") {
    OccupancyGrid g(20, 5, 1.0);
    const Vec2 src(1.5, 2.5), dst(18.5, 2.5);
    const std::vector<Vec2> pts{{4.5, 2.5}, {9.5, 2.5}, {14.5, 2.5}};
    CHECK(reduce_nodes(pts, g, src, dst) == std::vector<Vec2>{src, dst});
}

TEST_CASE("initial path spacing and velocities") {
    const InitialPath p = make_init_path({{0, 0}, {1, 0}}, 4, 4.0);
    REQUIRE(p.states.size() == 5);
    for (int k = 0; k < 5; ++k) {
        CHECK(p.states[static_cast<size_t>(k)].x() == doctest::Approx(0.25 * k));
        CHECK(p.states[static_cast<size_t>(k)][2] == doctest::Approx(0.25));
    }
    const InitialPath still = make_init_path({{1, 1}, {1, 1}}, 4, 4.0);
    for (const auto& s : still.states) {
        CHECK(s.head<2>() == Vec2(1, 1));
        CHECK(s.tail<2>().norm() == 0.0);
    }
    const InitialPath bent = make_init_path({{0, 0}, {3, 0}, {3, 1}}, 4, 4.0);
    CHECK(bent.states[2].head<2>().isApprox(Vec2(2, 0)));
    CHECK(bent.states[3].head<2>().isApprox(Vec2(3, 0)));
    CHECK(bent.states[4].head<2>().isApprox(Vec2(3, 1)));
}

TEST_CASE("E-Map text dump lists nodes then edges") {
    const Skeleton line = skeleton_from({".......", ".#####.", "......."});
    const std::string text = emap_to_text(extract_feature_nodes(line));
    CHECK(text.find('#') == 0);
    CHECK(text.find("0 1 ") != std::string::npos);
}
