#include <doctest.h>

#include <atomic>
#include <thread>

#include "property_checks.hpp"
#include "role_engine/engine.hpp"
#include "role_engine/scenario.hpp"

using namespace role_engine;

namespace {

ProcessRole straight_role(const std::string& id, Vec2 from, Vec2 to, size_t states, double dt) {
    const InitialPath p = make_init_path({from, to}, static_cast<int>(states - 1), dt * static_cast<double>(states - 1));
    return ProcessRole{id, id + "_role", p.states, p.dt, 0.0};
}

SimulationTrace trace_of(const std::vector<std::vector<Vec2>>& frames, std::vector<double> radii, double dt) {
    SimulationTrace t;
    t.dt = dt;
    t.radii = std::move(radii);
    for (size_t a = 0; a < t.radii.size(); ++a)
        t.agent_ids.push_back("a" + std::to_string(a));
    for (const auto& frame : frames) {
        std::vector<State> row;
        for (const Vec2& p : frame)
            row.push_back(State(p.x(), p.y(), 0, 0));
        t.executed.push_back(row);
    }
    return t;
}

RunResult simulate(const std::string& scenario, std::optional<SharingMode> sharing = {}) {
    Scenario sc = load_scenario(checks::data_path("scenarios/" + scenario + ".scn"));
    if (sharing)
        sc.conflict.sharing = *sharing;
    return run_central(sc);
}

} // namespace

TEST_CASE("channel publish and subscribe semantics") {
    SharedChannel ch;
    const ProcessRole r1 = straight_role("a", Vec2(0, 0), Vec2(1, 0), 5, 0.1);
    ProcessRole r2 = r1;
    r2.states[2].x() += 0.5;
    const std::uint64_t v1 = ch.publish("a", r1, 0);
    CHECK(*ch.subscribe("a")->role == r1);
    const std::uint64_t v2 = ch.publish("a", r2, 1);
    CHECK(*ch.subscribe("a")->role == r2);
    CHECK(ch.subscribe("a")->step == 1);
    CHECK(v2 > v1);
    CHECK(ch.publish("b", r1) > v2);
    CHECK_FALSE(ch.subscribe("missing").has_value());

    const auto before = ch.snapshot();
    ch.publish("a", r1, 2);
    CHECK(*before->find("a")->role == r2);
}

TEST_CASE("concurrent readers never observe torn roles") {
    SharedChannel ch;
    std::atomic<bool> stop{false};
    std::atomic<int> torn{0}, reads{0}, regressions{0};
    std::vector<std::thread> writers;
    for (int w = 0; w < 3; ++w)
        writers.emplace_back([&, w] {
            const std::string id = "w" + std::to_string(w);
            for (int i = 0; i < 400; ++i) {
                // Every state of a published role carries the same marker value.
                ProcessRole r{id, "r", std::vector<State>(10 + static_cast<size_t>(i % 7), State::Constant(i)), 0.1, 0.0};
                ch.publish(id, r, static_cast<size_t>(i));
            }
        });
    std::thread reader([&] {
        std::map<std::string, std::uint64_t> last_version;
        while (!stop) {
            const auto snap = ch.snapshot();
            for (const auto& [id, entry] : snap->roles) {
                const ProcessRole& r = *entry.role;
                const double marker = r.states.front()[0];
                if (r.states.size() != 10 + static_cast<size_t>(static_cast<int>(marker) % 7))
                    ++torn;
                for (const State& s : r.states)
                    if (s != State::Constant(marker))
                        ++torn;
                if (entry.version < last_version[id])
                    ++regressions;
                last_version[id] = entry.version;
            }
            ++reads;
        }
    });
    for (auto& t : writers)
        t.join();
    stop = true;
    reader.join();
    CHECK(torn == 0);
    CHECK(regressions == 0);
    CHECK(reads > 0);
    CHECK(ch.snapshot()->roles.size() == 3);
}

TEST_CASE("conflict field with no other agents equals the static SDF") {
    const OccupancyGrid grid = checks::bundled_map("open64");
    const SignedDistanceField sdf = compute_sdf(grid);
    SharedChannel ch;
    ch.publish("me", straight_role("me", Vec2(0.5, 0.5), Vec2(2.5, 2.5), 20, 0.5));
    RobotType robot;
    const ConflictField f = make_conflict_field(*ch.snapshot(), "me", robot, {{"me", 0.1}}, sdf, 0, ConflictOptions{});
    const SignedDistanceField raster = f.rasterize(3);
    CHECK(raster.values() == sdf.values());
}

TEST_CASE("a distant parked agent leaves obstacle residuals unchanged") {
    const OccupancyGrid grid = checks::bundled_map("open64");
    const SignedDistanceField sdf = compute_sdf(grid);
    const StaticDistanceField plain(sdf);
    SharedChannel ch;
    const ProcessRole mine = straight_role("me", Vec2(0.3, 0.5), Vec2(1.0, 0.5), 20, 0.5);
    ch.publish("me", mine);
    ch.publish("parked", straight_role("parked", Vec2(2.8, 2.8), Vec2(2.8, 2.8), 20, 0.5));
    RobotType robot;
    const ConflictField f =
        make_conflict_field(*ch.snapshot(), "me", robot, {{"me", 0.1}, {"parked", 0.1}}, sdf, 0, ConflictOptions{});
    for (size_t k = 0; k < mine.states.size(); ++k)
        CHECK(obstacle_residual(mine.states[k], f, k, robot).value ==
              obstacle_residual(mine.states[k], plain, k, robot).value);
}

TEST_CASE("crossing roles lower the field at the shared cell and time") {
    OccupancyGrid grid(32, 32, 0.1);
    const SignedDistanceField sdf = compute_sdf(grid);
    SharedChannel ch;
    const ProcessRole a = straight_role("a", Vec2(0.5, 1.6), Vec2(2.7, 1.6), 23, 0.5);
    const ProcessRole b = straight_role("b", Vec2(1.6, 0.5), Vec2(1.6, 2.7), 23, 0.5);
    ch.publish("a", a);
    ch.publish("b", b);
    RobotType robot;
    const ConflictField f = make_conflict_field(*ch.snapshot(), "a", robot, {{"a", 0.1}, {"b", 0.1}}, sdf, 0, ConflictOptions{});
    const size_t meet = 11;
    const Vec2 p = a.position(meet);
    CHECK((p - b.position(meet)).norm() < 1e-9);
    const double stamp = 0.1 + 0.1 + robot.epsilon_safe;
    CHECK(f.distance(meet, p, nullptr) == doctest::Approx(-stamp));
    CHECK(f.distance(meet, p, nullptr) < sdf.value(p));
    // At time 0 only b's starting disc counts.
    CHECK(f.distance(0, p, nullptr) == doctest::Approx(std::min(sdf.value(p), (p - b.position(0)).norm() - stamp)));

    std::mt19937 rng(4);
    std::uniform_real_distribution<double> u(0.0, 3.2);
    for (int i = 0; i < 500; ++i) {
        const Vec2 q(u(rng), u(rng));
        const size_t t = static_cast<size_t>(rng() % 30);
        CHECK(f.distance(t, q, nullptr) <= sdf.value(q));
    }
}

TEST_CASE("stale and last-position entries stamp one fixed disc") {
    OccupancyGrid grid(32, 32, 0.1);
    const SignedDistanceField sdf = compute_sdf(grid);
    SharedChannel ch;
    const ProcessRole b = straight_role("b", Vec2(0.5, 0.5), Vec2(2.5, 0.5), 21, 0.5);
    ch.publish("b", b, 0);
    RobotType robot;
    ConflictOptions last;
    last.sharing = SharingMode::last_position;
    const ConflictField f1 = make_conflict_field(*ch.snapshot(), "a", robot, {{"b", 0.1}}, sdf, 4, last);
    REQUIRE(f1.tracks().size() == 1);
    CHECK(f1.tracks()[0].time_invariant);
    CHECK(f1.tracks()[0].positions[0] == b.position(4));

    ConflictOptions windowed;
    windowed.horizon = 2;
    const ConflictField f2 = make_conflict_field(*ch.snapshot(), "a", robot, {{"b", 0.1}}, sdf, 10, windowed);
    CHECK(f2.tracks()[0].time_invariant);
    const ConflictField f3 = make_conflict_field(*ch.snapshot(), "a", robot, {{"b", 0.1}}, sdf, 1, windowed);
    CHECK_FALSE(f3.tracks()[0].time_invariant);
}

TEST_CASE("track position noise") {
    const ProcessRole r = straight_role("a", Vec2(0, 0), Vec2(1, 0), 11, 0.1);
    std::mt19937_64 rng(1);
    CHECK(track_position(r, 3, 0.0, rng) == r.position(3));
    std::mt19937_64 a(42), b(42);
    for (int i = 0; i < 10; ++i)
        CHECK(track_position(r, 5, 0.01, a) == track_position(r, 5, 0.01, b));
    std::mt19937_64 g(7);
    double sum = 0.0, sq = 0.0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        const double dx = track_position(r, 5, 0.02, g).x() - r.position(5).x();
        sum += dx;
        sq += dx * dx;
    }
    const double mean = sum / n, stddev = std::sqrt(sq / n - mean * mean);
    CHECK(std::abs(stddev - 0.02) <= 0.05 * 0.02);
    CHECK_THROWS_AS(track_position(r, 11, 0.0, rng), InputError);
}

TEST_CASE("metrics on hand-made traces") {
    std::vector<std::vector<Vec2>> still(6, {Vec2(1, 1)});
    const Metrics m1 = compute_metrics(trace_of(still, {0.1}, 0.1));
    CHECK(m1.avg_jerk == 0.0);
    CHECK(std::isinf(m1.min_inter_robot_distance));

    std::vector<std::vector<Vec2>> lines;
    for (int k = 0; k < 8; ++k)
        lines.push_back({Vec2(0.1 * k, 0.0), Vec2(0.1 * k, 1.0)});
    const Metrics m2 = compute_metrics(trace_of(lines, {0.1, 0.1}, 0.1));
    CHECK(m2.avg_jerk == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(m2.min_inter_robot_distance == doctest::Approx(1.0));
    CHECK(m2.collision_frames == 0);

    const Metrics m3 = compute_metrics(trace_of({{Vec2(0, 0), Vec2(0.15, 0)}, {Vec2(0, 0), Vec2(0.5, 0)}}, {0.1, 0.1}, 0.1));
    CHECK(m3.collision_frames == 1);
    CHECK_THROWS_AS(compute_metrics(SimulationTrace{}), InputError);
}

TEST_CASE("a lone agent follows its optimized role and history stays frozen") {
    const Scenario sc = load_scenario(checks::data_path("scenarios/single_agent.scn"));
    const RunResult res = run_central(sc);
    REQUIRE(res.trace);
    const SimulationTrace& t = *res.trace;
    REQUIRE(t.executed.size() == res.initial_roles[0].states.size());
    for (size_t k = 0; k < t.executed.size(); ++k) {
        CHECK((t.executed[k][0].head<2>() - res.initial_roles[0].position(k)).norm() < 1e-3);
        // The final role keeps every executed state bit for bit.
        CHECK(t.final_roles[0].states[k] == t.executed[k][0]);
    }
    const Vec2 end = t.executed.back()[0].head<2>();
    CHECK((end - sc.roles[0].destination).norm() <= sc.grid.resolution());
}

TEST_CASE("head-on agents on an open map keep their distance") {
    const RunResult res = simulate("head_on");
    REQUIRE(res.metrics);
    CHECK(res.metrics->collision_frames == 0);
    CHECK(res.metrics->min_inter_robot_distance >= 0.2);
}

TEST_CASE("hallway swap completes without collisions in both conflict modes") {
    for (SharingMode mode : {SharingMode::conflict_field, SharingMode::pairwise_factor}) {
        const RunResult res = simulate("hallway_swap", mode);
        REQUIRE(res.metrics);
        CHECK(res.metrics->collision_frames == 0);
        CHECK_FALSE(res.aborted);
        const SimulationTrace& t = *res.trace;
        for (size_t a = 0; a < t.agent_ids.size(); ++a) {
            const size_t role = *res.assignment->role_of(a);
            CHECK((t.executed.back()[a].head<2>() - load_scenario(checks::data_path("scenarios/hallway_swap.scn"))
                                                         .roles[role]
                                                         .destination)
                      .norm() <= 0.05);
        }
    }
}

TEST_CASE("round-robin traces are reproducible and match the concurrent schedule's safety") {
    Scenario sc = load_scenario(checks::data_path("scenarios/four_robots.scn"));
    const RunResult a = run_central(sc), b = run_central(sc);
    REQUIRE(a.trace);
    CHECK(a.trace->executed == b.trace->executed);
    sc.schedule = Schedule::concurrent;
    const RunResult c = run_central(sc);
    REQUIRE(c.metrics);
    CHECK(c.metrics->collision_frames == 0);
    CHECK(c.trace->executed == a.trace->executed);
}

TEST_CASE("conflict-field sharing beats last-position sharing on the four-robot scenario") {
    const RunResult cf = simulate("four_robots", SharingMode::conflict_field);
    const RunResult lp = simulate("four_robots", SharingMode::last_position);
    REQUIRE(cf.metrics);
    REQUIRE(lp.metrics);
    CHECK(cf.metrics->min_inter_robot_distance > lp.metrics->min_inter_robot_distance);
    CHECK(cf.metrics->avg_jerk < lp.metrics->avg_jerk);
    CHECK(cf.metrics->collision_frames == 0);
}

TEST_CASE("sharing mode names round-trip") {
    for (SharingMode m : {SharingMode::conflict_field, SharingMode::last_position, SharingMode::pairwise_factor})
        CHECK(parse_sharing_mode(to_string(m)) == m);
    CHECK_THROWS_AS(parse_sharing_mode("telepathy"), InputError);
}
