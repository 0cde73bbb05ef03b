#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "property_checks.hpp"
#include "role_engine/bench.hpp"
#include "role_engine/io.hpp"
#include "role_engine/scenario.hpp"

using namespace role_engine;
namespace fs = std::filesystem;

namespace {

const std::string kMaps = checks::data_path("maps");

std::string scenario_text(const std::string& extra = "") {
    return "name = t\n"
           "map = open64.pgm\n"
           "resolution = 0.05\n"
           "lambda = 1.0\n"
           "steps = 20\n"
           "total_time = 4.0\n"
           "agent a radius=0.1 start=0.5,0.5\n"
           "role r dest=2.5,2.5\n" +
           extra;
}

Scenario parse(const std::string& text) {
    std::istringstream in(text);
    return parse_scenario(in, kMaps, "t.scn");
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("role_engine_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string("\"") + ROLE_ENGINE_CLI + "\" " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST_CASE("scenario parsing reads keys, agents and roles") {
    const Scenario sc = parse(scenario_text("seed = 11\nsigma_obs = 0.2\n# comment\n\n"));
    CHECK(sc.name == "t");
    CHECK(sc.steps == 20);
    CHECK(sc.seed == 11u);
    REQUIRE(sc.agents.size() == 1);
    CHECK(sc.agents[0].robot.sigma_obs == 0.2);
    CHECK(sc.agents[0].id == "a");
    CHECK(sc.agents[0].robot.radius == 0.1);
    CHECK(sc.agents[0].start == Vec2(0.5, 0.5));
    REQUIRE(sc.roles.size() == 1);
    CHECK(sc.roles[0].destination == Vec2(2.5, 2.5));
    CHECK(sc.grid.width() == 64);
}

TEST_CASE("parse errors carry the source and line") {
    try {
        parse(scenario_text("steps = many\n"));
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 9);
        CHECK(std::string(e.what()).find("t.scn:9") != std::string::npos);
    }
    CHECK_THROWS_AS(parse(scenario_text("bogus_key = 1\n")), ParseError);
    CHECK_THROWS_AS(parse(scenario_text("agent b radius=0.1\n")), ParseError);
    CHECK_THROWS_AS(parse(scenario_text("role q dest=1\n")), ParseError);
    CHECK_THROWS_AS(parse("name = x\n"), ParseError);
    CHECK_THROWS_AS(parse("map = open64.pgm\nresolution = 0.05\nagent a radius=0.1 start=0.5,0.5\n"), ParseError);
    CHECK_THROWS_AS(parse(scenario_text("map = missing.pgm\n")), InputError);
}

TEST_CASE("command-line overrides replace scenario values") {
    Scenario sc = parse(scenario_text());
    ScenarioOverrides ov;
    ov.seed = 99;
    ov.init = InitMode::straight;
    ov.assign = AssignMode::nn;
    ov.sharing = SharingMode::pairwise_factor;
    ov.sigma_obs = 0.15;
    ov.output_dir = "elsewhere";
    apply_overrides(sc, ov);
    CHECK(sc.seed == 99u);
    CHECK(sc.init == InitMode::straight);
    CHECK(sc.assign == AssignMode::nn);
    CHECK(sc.conflict.sharing == SharingMode::pairwise_factor);
    CHECK(sc.agents[0].robot.sigma_obs == 0.15);
    CHECK(sc.output_dir == "elsewhere");
}

TEST_CASE("suite files resolve scenarios and mode lists") {
    const BenchSuite suite = load_suite(checks::data_path("suites/sharing.suite"));
    CHECK(suite.name == "sharing");
    CHECK(suite.scenario_paths.size() == 2);
    for (const std::string& p : suite.scenario_paths)
        CHECK(fs::exists(p));
    CHECK(suite.sharings.size() == 3);
    CHECK(suite.simulate);
    std::istringstream empty("name = x\n");
    CHECK_THROWS_AS(parse_suite(empty, kMaps, "x.suite"), ParseError);
}

TEST_CASE("numbers format with nine significant digits") {
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(1.0 / 3.0) == "0.333333333");
    CHECK(format_number(kInfeasible) == "inf");
}

TEST_CASE("written CSVs satisfy their schemas and broken ones do not") {
    const Scenario sc = load_scenario(checks::data_path("scenarios/single_agent.scn"));
    const RunResult res = run_central(sc);
    REQUIRE(res.trace);
    const fs::path dir = scratch("csv");
    auto write = [&](const std::string& name, auto&& f) {
        std::ostringstream s;
        f(s);
        write_text_file((dir / name).string(), s.str());
        return (dir / name).string();
    };
    CHECK(validate_csv(write("q.csv", [&](auto& s) { write_q_csv(s, *res.qualification); }), CsvSchema::q_matrix) == "");
    CHECK(validate_csv(write("a.csv", [&](auto& s) { write_assignment_csv(s, *res.qualification, *res.assignment); }),
                       CsvSchema::assignment) == "");
    CHECK(validate_csv(write("tr.csv", [&](auto& s) { write_trace_csv(s, *res.trace); }), CsvSchema::trace) == "");
    CHECK(validate_csv(write("j.csv", [&](auto& s) { write_trajectories_csv(s, res.trace->final_roles); }),
                       CsvSchema::trajectory) == "");
    CHECK(validate_csv(write("m.csv", [&](auto& s) { write_metrics_csv(s, {metrics_row(sc, res)}); }),
                       CsvSchema::metrics) == "");

    CHECK(validate_csv(write("bad1.csv", [](auto& s) { s << "agent_id,role_id\na,r\n"; }), CsvSchema::assignment) != "");
    CHECK(validate_csv(write("bad2.csv", [](auto& s) { s << "agent_id,role_id,cost\na,r,cheap\n"; }),
                       CsvSchema::assignment) != "");
    CHECK(validate_csv(write("bad3.csv", [](auto& s) { s << "agent_id,role_id,cost\na,r\n"; }), CsvSchema::assignment) !=
          "");
    CHECK(validate_csv((dir / "missing.csv").string(), CsvSchema::trace) != "");
}

TEST_CASE("the run report carries the documented keys") {
    const Scenario sc = load_scenario(checks::data_path("scenarios/single_agent.scn"));
    const RunResult res = run_central(sc);
    const nlohmann::json j = nlohmann::json::parse(run_report_json(sc, res, "simulate"));
    for (const char* key : {"command", "scenario", "mode", "seed", "feasible", "uncoverable_roles", "aborted",
                            "abort_reason", "trajectories_clear", "robot_types", "total_cost", "iterations_mean",
                            "assignment", "final_cost", "metrics", "replans", "solver_failures"})
        CHECK_MESSAGE(j.contains(key), key);
    CHECK(j["command"] == "simulate");
    CHECK(j["mode"]["sharing"] == "conflict_field");
}

TEST_CASE("bench aggregation averages per mode and sigma") {
    std::vector<BenchCell> cells(3);
    cells[0].sigma_obs = 0.1;
    cells[0].row = {"s1", "emap/gra/conflict_field", true, 2.0, 10.0, 0.5, 0.1, 0};
    cells[1].sigma_obs = 0.1;
    cells[1].row = {"s2", "emap/gra/conflict_field", false, kInfeasible, 20.0, 0.3, 0.3, 2};
    cells[2].sigma_obs = 0.2;
    cells[2].row = {"s1", "emap/gra/conflict_field", true, 4.0, 30.0, 0.4, 0.2, 0};
    const std::vector<BenchAggregate> rows = aggregate_bench(cells);
    const BenchAggregate* all = nullptr;
    const BenchAggregate* low = nullptr;
    for (const BenchAggregate& r : rows) {
        if (r.sigma_obs == "all")
            all = &r;
        if (r.sigma_obs == "0.1")
            low = &r;
    }
    REQUIRE(all);
    REQUIRE(low);
    CHECK(all->runs == 3);
    CHECK(all->feasibility_pct == doctest::Approx(200.0 / 3.0));
    CHECK(all->mean_total_cost == doctest::Approx(3.0));
    CHECK(all->mean_iterations == doctest::Approx(20.0));
    CHECK(all->min_dist == doctest::Approx(0.3));
    CHECK(all->collision_frames == 2);
    CHECK(low->runs == 2);
    CHECK(low->feasibility_pct == doctest::Approx(50.0));
}

TEST_CASE("command-line exit codes") {
    const fs::path dir = scratch("cli");
    const std::string scn = checks::data_path("scenarios/single_agent.scn");
    const std::string out = " --out-dir \"" + dir.string() + "\"";
    CHECK(run_cli("") == 1);
    CHECK(run_cli("fly " + scn) == 1);
    CHECK(run_cli("plan " + scn + " --mode-init sideways" + out) == 2);
    CHECK(run_cli("plan " + (dir / "nope.scn").string() + out) == 2);
    {
        std::ofstream bad(dir / "bad.scn");
        bad << "name = bad\nsteps = 3 4\n";
    }
    CHECK(run_cli("plan " + (dir / "bad.scn").string() + out) == 2);
    CHECK(run_cli("plan " + checks::data_path("scenarios/sealed_role.scn") + out) == 3);
    CHECK(run_cli("negotiate " + checks::data_path("scenarios/sealed_role.scn") + out) == 3);
    CHECK(run_cli("negotiate " + scn + out) == 0);
    CHECK(run_cli("plan " + scn + " --validate-schemas" + out) == 0);
    CHECK(fs::exists(dir / "q_matrix.csv"));
    CHECK(fs::exists(dir / "assignment.csv"));
    CHECK(fs::exists(dir / "report.json"));
    CHECK(run_cli("simulate " + scn + " --validate-schemas --seed 3" + out) == 0);
    CHECK(fs::exists(dir / "trace.csv"));
}

TEST_CASE("simulate writes identical traces for a fixed seed") {
    const std::string scn = checks::data_path("scenarios/four_robots.scn");
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    REQUIRE(run_cli("simulate " + scn + " --seed 5 --out-dir \"" + a.string() + "\"") == 0);
    REQUIRE(run_cli("simulate " + scn + " --seed 5 --out-dir \"" + b.string() + "\"") == 0);
    const std::string ta = slurp(a / "trace.csv");
    CHECK_FALSE(ta.empty());
    CHECK(ta == slurp(b / "trace.csv"));
}
