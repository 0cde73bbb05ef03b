#include <doctest.h>

#include "property_checks.hpp"
#include "role_engine/engine.hpp"
#include "role_engine/scenario.hpp"

using namespace role_engine;

namespace {

Scenario bundled(const std::string& name) {
    return load_scenario(checks::data_path("scenarios/" + name + ".scn"));
}

} // namespace

TEST_CASE("open map negotiation yields an initial path per pair") {
    const Scenario sc = bundled("open_pair");
    const NegotiationResult neg = role_negotiation(sc);
    CHECK(neg.feasible);
    CHECK(neg.uncoverable_roles.empty());
    size_t paths = 0;
    for (const auto& row : neg.init_paths)
        for (const auto& p : row) {
            REQUIRE(p.has_value());
            ++paths;
            CHECK((p->states.front().head<2>() - p->waypoints.front()).norm() <= sc.grid.resolution());
        }
    CHECK(paths == 4);
}

TEST_CASE("a role inside a sealed room is uncoverable") {
    const NegotiationResult neg = role_negotiation(bundled("sealed_role"));
    CHECK_FALSE(neg.feasible);
    CHECK(neg.uncoverable_roles == std::vector<std::string>{"inside"});
}

TEST_CASE("only the small robot type fits through the passage") {
    const Scenario sc = bundled("two_types");
    const NegotiationResult neg = role_negotiation(sc);
    REQUIRE(neg.types.size() == 2);
    CHECK(neg.feasible);
    CHECK(neg.init_paths[0][0].has_value());
    CHECK_FALSE(neg.init_paths[1][0].has_value());
}

TEST_CASE("robot types group agents by their physical parameters") {
    std::vector<AgentSpec> agents(3);
    agents[0].robot.radius = 0.1;
    agents[1].robot.radius = 0.02;
    agents[2].robot.radius = 0.1;
    std::vector<size_t> index;
    const std::vector<RobotType> types = robot_types(agents, &index);
    CHECK(types.size() == 2);
    CHECK(index[0] == index[2]);
    CHECK(index[0] != index[1]);
}

TEST_CASE("trajectory feasibility checks states and the segments between them") {
    OccupancyGrid g(20, 20, 0.1);
    g.fill_box(Vec2(0.95, 0.0), Vec2(1.05, 2.0));
    ProcessRole role{"a", "r", {State(0.5, 0.5, 0, 0), State(0.8, 0.5, 0, 0)}, 0.1, 0.0};
    CHECK(trajectory_feasible(role, g));
    role.states = {State(0.5, 0.5, 0, 0), State(1.5, 0.5, 0, 0)};
    CHECK_FALSE(trajectory_feasible(role, g));
}

TEST_CASE("the diamond scenario delivers every agent to its destination") {
    const Scenario sc = bundled("diamond");
    const RunResult res = run_central(sc);
    REQUIRE(res.trace);
    REQUIRE(res.assignment);
    CHECK(res.metrics->collision_frames == 0);
    for (size_t a = 0; a < sc.agents.size(); ++a) {
        const Vec2 dest = sc.roles[*res.assignment->role_of(a)].destination;
        CHECK((res.trace->executed.back()[a].head<2>() - dest).norm() <= sc.grid.resolution());
    }
}

TEST_CASE("an infeasible scenario aborts before launching agents") {
    const RunResult res = run_central(bundled("sealed_role"));
    CHECK(res.aborted);
    CHECK(res.abort_reason.find("inside") != std::string::npos);
    CHECK_FALSE(res.trace.has_value());
}

TEST_CASE("a mid-run map change triggers exactly one replan") {
    const Scenario sc = bundled("map_change");
    const RunResult res = run_central(sc);
    CHECK_FALSE(res.aborted);
    CHECK(res.replans == 1);
    REQUIRE(res.trace);
    CHECK((res.trace->executed.back()[0].head<2>() - sc.roles[0].destination).norm() <= sc.grid.resolution());
    // The executed trace keeps clear of the inserted wall.
    OccupancyGrid changed = sc.grid;
    for (const MapEvent& ev : sc.map_events)
        changed.fill_box(ev.lo, ev.hi, true);
    const SignedDistanceField sdf = compute_sdf(changed);
    for (size_t k = sc.map_events[0].step + 1; k < res.trace->executed.size(); ++k)
        CHECK(sdf.value(res.trace->executed[k][0].head<2>()) >= 0.0);
}

TEST_CASE("sealing the only corridor aborts after failed renegotiation") {
    const RunResult res = run_central(bundled("corridor_sealed"));
    CHECK(res.aborted);
    CHECK(res.abort_reason.find("infeasible") != std::string::npos);
}

TEST_CASE("replan with an unchanged world keeps the assignment") {
    const Scenario sc = bundled("four_robots");
    const RunResult first = plan_scenario(sc);
    std::vector<Vec2> starts;
    for (const AgentSpec& a : sc.agents)
        starts.push_back(a.start);
    const std::optional<RunResult> again = replan(sc, starts, sc.steps);
    REQUIRE(again);
    CHECK(again->assignment->t_c == first.assignment->t_c);
    for (size_t a = 0; a < sc.agents.size(); ++a)
        for (size_t k = 0; k < first.initial_roles[a].states.size(); ++k)
            CHECK((again->initial_roles[a].states[k] - first.initial_roles[a].states[k]).norm() < 1e-6);
}

TEST_CASE("replanned initial paths avoid a newly inserted obstacle") {
    Scenario sc = bundled("map_change");
    for (const MapEvent& ev : sc.map_events)
        sc.grid.fill_box(ev.lo, ev.hi, true);
    const std::optional<RunResult> res = replan(sc, {Vec2(1.0, 1.6)}, 60);
    REQUIRE(res);
    const SignedDistanceField sdf = compute_sdf(sc.grid);
    const InitialPath& path = *res->negotiation.init_paths[0][0];
    for (const auto& s : path.states)
        CHECK(sdf.value(s.head<2>()) >= 0.0);
}

TEST_CASE("problem detection rules") {
    const Scenario sc = bundled("single_agent");
    const RunResult plan = plan_scenario(sc);
    SharedChannel ch;
    const std::uint64_t env = ch.publish_environment(plan.negotiation.environment);
    AgentRuntime agent;
    agent.agent_id = sc.agents[0].id;
    agent.robot = sc.agents[0].robot;
    agent.role = plan.initial_roles[0];
    agent.published_conf_cost = conf_cost(agent.role, plan.negotiation.environment->sdf, agent.robot);
    ch.publish(agent.agent_id, agent.role);
    std::vector<AgentRuntime> agents{agent};
    const ProblemThresholds thresholds;

    CHECK(detect_problem(*ch.snapshot(), agents, env, thresholds).action == ProblemAction::none);

    agents[0].distress = true;
    CHECK(detect_problem(*ch.snapshot(), agents, env, thresholds).action == ProblemAction::replan);
    CHECK(detect_problem(*ch.snapshot(), agents, env, thresholds, [] { return false; }).action ==
          ProblemAction::abort);
    agents[0].distress = false;

    OccupancyGrid blocked = sc.grid;
    blocked.fill_box(Vec2(1.2, 1.2), Vec2(2.0, 2.0), true);
    ch.publish_environment(std::make_shared<const Environment>(Environment{blocked, compute_sdf(blocked)}));
    const ProblemReport changed = detect_problem(*ch.snapshot(), agents, env, thresholds);
    CHECK(changed.action == ProblemAction::replan);
    // With the new map acknowledged, the role now cutting through the box still trips the conflict cost rule.
    const ProblemReport costly = detect_problem(*ch.snapshot(), agents, ch.snapshot()->environment_version, thresholds);
    CHECK(costly.action == ProblemAction::replan);
    CHECK(costly.reason.find("conflict cost") != std::string::npos);
}

TEST_CASE("scenario validation rejects bad input") {
    Scenario sc = bundled("open_pair");
    sc.roles.push_back({"extra", Vec2(1, 1)});
    sc.roles.push_back({"extra2", Vec2(1, 2)});
    CHECK_THROWS_AS(sc.validate(), InputError);
    Scenario outside = bundled("single_agent");
    outside.agents[0].start = Vec2(50, 50);
    CHECK_THROWS_AS(outside.validate(), InputError);
    Scenario dup = bundled("open_pair");
    dup.agents[1].id = dup.agents[0].id;
    CHECK_THROWS_AS(dup.validate(), InputError);
}

TEST_CASE("straight initialisation skips the E-Map") {
    Scenario sc = bundled("init_env1_boxes");
    sc.init = InitMode::straight;
    const NegotiationResult neg = role_negotiation(sc);
    for (const auto& row : neg.init_paths)
        for (const auto& p : row)
            if (p)
                CHECK(p->waypoints.size() == 2);
}
