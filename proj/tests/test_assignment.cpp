#include <doctest.h>

#include <set>

#include "property_checks.hpp"
#include "role_engine/assignment.hpp"
#include "role_engine/scenario.hpp"

using namespace role_engine;

namespace {

void check_matching(const Assignment& a, size_t m, size_t n) {
    REQUIRE(a.t_r.size() == n);
    REQUIRE(a.t_c.size() == n);
    std::set<size_t> rows(a.t_r.begin(), a.t_r.end()), cols(a.t_c.begin(), a.t_c.end());
    CHECK(rows.size() == n);
    CHECK(cols.size() == n);
    for (size_t r : rows)
        CHECK(r < m);
    for (size_t c : cols)
        CHECK(c < n);
}

} // namespace

TEST_CASE("hungarian on a 2x2 example") {
    Eigen::MatrixXd q(2, 2);
    q << 1, 2, 2, 1;
    const Assignment a = hungarian_assign(q);
    CHECK(a.total_cost == 2.0);
    CHECK(a.role_of(0) == 0u);
    CHECK(a.role_of(1) == 1u);
}

TEST_CASE("hungarian equals brute force for every m = n up to 7") {
    std::mt19937 rng(77);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    std::uniform_int_distribution<int> small(0, 3);
    for (int n = 1; n <= 7; ++n)
        for (int trial = 0; trial < 40; ++trial) {
            Eigen::MatrixXd q(n, n);
            for (int r = 0; r < n; ++r)
                for (int c = 0; c < n; ++c) {
                    // Integer costs produce many ties; a few forbidden pairs too.
                    q(r, c) = trial % 2 ? u(rng) : small(rng);
                    if (trial % 5 == 0 && (r + c + trial) % 7 == 0)
                        q(r, c) = kInfeasible;
                }
            const double best = oracles::brute_force_assignment(q);
            if (!std::isfinite(best)) {
                CHECK_THROWS_AS(hungarian_assign(q), InfeasibleError);
                continue;
            }
            const Assignment a = hungarian_assign(q);
            check_matching(a, static_cast<size_t>(n), static_cast<size_t>(n));
            CHECK(a.total_cost == doctest::Approx(best).epsilon(1e-12));
            CHECK(matching_cost(q, a) == doctest::Approx(best).epsilon(1e-12));
        }
}

TEST_CASE("rectangular matrices leave extra agents unassigned") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(0.0, 5.0);
    for (int trial = 0; trial < 30; ++trial) {
        Eigen::MatrixXd q(5, 3);
        for (int r = 0; r < 5; ++r)
            for (int c = 0; c < 3; ++c)
                q(r, c) = u(rng);
        const Assignment a = hungarian_assign(q);
        check_matching(a, 5, 3);
        CHECK(a.total_cost == doctest::Approx(oracles::brute_force_assignment(q)));
    }
    CHECK_THROWS_AS(hungarian_assign(Eigen::MatrixXd::Zero(2, 3)), InputError);
}

TEST_CASE("ties resolve to the lexicographically smallest role sequence") {
    const Eigen::MatrixXd q = Eigen::MatrixXd::Ones(3, 3);
    const Assignment a = hungarian_assign(q);
    CHECK(a.t_r == std::vector<size_t>{0, 1, 2});
    CHECK(a.t_c == std::vector<size_t>{0, 1, 2});
    Eigen::MatrixXd p(2, 2);
    p << 1, 1, 1, 1;
    CHECK(hungarian_assign(p).t_c == std::vector<size_t>{0, 1});
}

TEST_CASE("an all-infeasible row makes a square problem infeasible") {
    Eigen::MatrixXd q(3, 3);
    q << 1, 2, 3, kInfeasible, kInfeasible, kInfeasible, 4, 5, 6;
    CHECK_THROWS_AS(hungarian_assign(q), InfeasibleError);
}

TEST_CASE("nearest neighbour baseline") {
    const Assignment one = nn_assign({Vec2(0, 0)}, {Vec2(3, 4)});
    CHECK(one.role_of(0) == 0u);
    CHECK(one.total_cost == doctest::Approx(5.0));
    const Assignment two = nn_assign({Vec2(0, 0), Vec2(10, 0)}, {Vec2(1, 0), Vec2(9, 0)});
    CHECK(two.role_of(0) == 0u);
    CHECK(two.role_of(1) == 1u);
}

TEST_CASE("GRA never costs more than NN under the same Q") {
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> u(0.0, 5.0);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 2 + trial % 5;
        std::vector<Vec2> agents, roles;
        for (int i = 0; i < n; ++i) {
            agents.emplace_back(u(rng), u(rng));
            roles.emplace_back(u(rng), u(rng));
        }
        Eigen::MatrixXd q(n, n);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c)
                q(r, c) = (agents[static_cast<size_t>(r)] - roles[static_cast<size_t>(c)]).squaredNorm() + u(rng);
        const Assignment gra = hungarian_assign(q);
        const Assignment nn = nn_assign(agents, roles);
        CHECK(gra.total_cost <= matching_cost(q, nn) + 1e-12);
    }
}

TEST_CASE("stored qualification values reproduce from their optimized roles") {
    const Scenario sc = load_scenario(checks::data_path("scenarios/four_robots.scn"));
    const RunResult res = plan_scenario(sc);
    REQUIRE(res.qualification);
    const QualificationMatrix& q = *res.qualification;
    CHECK(q.m() == 4);
    CHECK(q.n() == 4);
    const StaticDistanceField field(res.negotiation.environment->sdf);
    for (size_t a = 0; a < q.m(); ++a)
        for (size_t r = 0; r < q.n(); ++r) {
            REQUIRE(q.feasible(a, r));
            const ProcessRole& role = *q.optimized_roles[a][r];
            const double again = qualification_cost(role, sc.qc, sc.lambda, field, sc.agents[a].robot);
            CHECK(again == doctest::Approx(q.q(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(r))).epsilon(1e-9));
        }
    REQUIRE(res.assignment);
    CHECK(res.assignment->total_cost == doctest::Approx(oracles::brute_force_assignment(q.q)));
}

TEST_CASE("a walled-off destination gets an infinite qualification") {
    Scenario sc = load_scenario(checks::data_path("scenarios/sealed_role.scn"));
    const NegotiationResult neg = role_negotiation(sc);
    CHECK_FALSE(neg.feasible);
    QualificationInput input;
    input.agents = sc.agents;
    input.roles = sc.roles;
    for (size_t a = 0; a < sc.agents.size(); ++a)
        input.agent_sdf.push_back(&neg.environment->sdf);
    input.paths = neg.init_paths;
    const QualificationMatrix q = evaluate_qualifications(input);
    bool any_inf = false;
    for (size_t r = 0; r < q.n(); ++r) {
        bool column_inf = true;
        for (size_t a = 0; a < q.m(); ++a)
            column_inf = column_inf && !q.feasible(a, r);
        any_inf = any_inf || column_inf;
    }
    CHECK(any_inf);
    CHECK_THROWS_AS(gra_solve(q), InfeasibleError);
}

TEST_CASE("single agent single role on an open map") {
    const Scenario sc = load_scenario(checks::data_path("scenarios/single_agent.scn"));
    const RunResult res = plan_scenario(sc);
    REQUIRE(res.qualification);
    CHECK(res.qualification->m() == 1);
    CHECK(std::isfinite(res.qualification->q(0, 0)));
}
