#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "role_engine/bench.hpp"
#include "role_engine/io.hpp"
#include "role_engine/log.hpp"
#include "role_engine/render.hpp"
#include "role_engine/scenario.hpp"

using namespace role_engine;
namespace fs = std::filesystem;

namespace {

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kParseError = 2,
    kInfeasibleExit = 3,
    kSolverFailure = 4,
    kSchemaViolation = 5,
};

struct Options {
    std::string file;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    std::string mode_init, mode_assign, mode_sharing;
    std::optional<double> sigma_obs;
    bool validate_schemas = false;
    std::string log_level = "warning";
};

ScenarioOverrides overrides_from(const Options& o) {
    ScenarioOverrides ov;
    ov.seed = o.seed;
    if (!o.out_dir.empty())
        ov.output_dir = o.out_dir;
    if (!o.mode_init.empty())
        ov.init = parse_init_mode(o.mode_init);
    if (!o.mode_assign.empty())
        ov.assign = parse_assign_mode(o.mode_assign);
    if (!o.mode_sharing.empty())
        ov.sharing = parse_sharing_mode(o.mode_sharing);
    ov.sigma_obs = o.sigma_obs;
    return ov;
}

Scenario load(const Options& o) {
    Scenario sc = load_scenario(o.file);
    apply_overrides(sc, overrides_from(o));
    if (sc.output_dir.empty())
        sc.output_dir = (fs::path("out") / sc.name).string();
    return sc;
}

std::string out_path(const Scenario& sc, const std::string& name) {
    return (fs::path(sc.output_dir) / name).string();
}

template <typename F>
std::string render_to_string(F&& f) {
    std::ostringstream s;
    f(s);
    return s.str();
}

class SchemaCheck {
public:
    explicit SchemaCheck(bool enabled) : enabled_(enabled) {}

    void add(const std::string& path, CsvSchema schema) {
        if (enabled_)
            files_.emplace_back(path, schema);
    }

    bool run() const {
        bool ok = true;
        for (const auto& [path, schema] : files_) {
            const std::string problem = validate_csv(path, schema);
            if (!problem.empty()) {
                std::cerr << "schema violation: " << problem << '\n';
                ok = false;
            }
        }
        if (enabled_ && ok)
            std::cout << "schemas: " << files_.size() << " file(s) conform\n";
        return ok;
    }

private:
    bool enabled_;
    std::vector<std::pair<std::string, CsvSchema>> files_;
};

void write_plan_artifacts(const Scenario& sc, const RunResult& res, SchemaCheck& check) {
    if (!res.qualification)
        return;
    write_text_file(out_path(sc, "q_matrix.csv"), render_to_string([&](auto& s) { write_q_csv(s, *res.qualification); }));
    check.add(out_path(sc, "q_matrix.csv"), CsvSchema::q_matrix);
    if (!res.assignment)
        return;
    write_text_file(out_path(sc, "assignment.csv"),
                    render_to_string([&](auto& s) { write_assignment_csv(s, *res.qualification, *res.assignment); }));
    check.add(out_path(sc, "assignment.csv"), CsvSchema::assignment);
    write_text_file(out_path(sc, "initial_roles.csv"),
                    render_to_string([&](auto& s) { write_trajectories_csv(s, res.initial_roles); }));
    check.add(out_path(sc, "initial_roles.csv"), CsvSchema::trajectory);
    std::vector<Vec2> sources, dests;
    for (const AgentSpec& a : sc.agents)
        sources.push_back(a.start);
    for (const RoleSpec& r : sc.roles)
        dests.push_back(r.destination);
    write_text_file(out_path(sc, "plan.svg"), render_plan_svg(sc.grid, sources, dests, res.initial_roles));
}

int cmd_negotiate(const Options& o) {
    const Scenario sc = load(o);
    RunResult res;
    res.negotiation = role_negotiation(sc);
    for (const TypeEnvironment& t : res.negotiation.types) {
        write_text_file(out_path(sc, "emap_" + t.robot.id + ".txt"), emap_to_text(t.emap));
        write_pgm(out_path(sc, "feasible_" + t.robot.id + ".pgm"), grid_to_image(t.feasible));
    }
    write_pgm(out_path(sc, "sdf.pgm"), sdf_heat_image(res.negotiation.environment->sdf));
    write_text_file(out_path(sc, "report.json"), run_report_json(sc, res, "negotiate"));
    std::cout << "feasible: " << (res.negotiation.feasible ? "true" : "false") << '\n';
    for (const std::string& r : res.negotiation.uncoverable_roles)
        std::cout << "uncoverable role: " << r << '\n';
    std::cout << "robot types: " << res.negotiation.types.size() << '\n';
    return res.negotiation.feasible ? kOk : kInfeasibleExit;
}

int cmd_plan(const Options& o) {
    const Scenario sc = load(o);
    const RunResult res = plan_scenario(sc);
    SchemaCheck check(o.validate_schemas);
    write_plan_artifacts(sc, res, check);
    write_text_file(out_path(sc, "report.json"), run_report_json(sc, res, "plan"));
    if (res.aborted) {
        std::cout << "infeasible: " << res.abort_reason << '\n';
        return kInfeasibleExit;
    }
    std::cout << "assignment total cost: " << format_number(res.total_cost) << '\n';
    std::cout << "trajectories clear of dilated obstacles: " << (res.feasible ? "true" : "false") << '\n';
    return check.run() ? kOk : kSchemaViolation;
}

int cmd_simulate(const Options& o) {
    const Scenario sc = load(o);
    const RunResult res = run_central(sc);
    SchemaCheck check(o.validate_schemas);
    write_plan_artifacts(sc, res, check);
    write_text_file(out_path(sc, "report.json"), run_report_json(sc, res, "simulate"));
    if (res.trace) {
        write_text_file(out_path(sc, "trace.csv"), render_to_string([&](auto& s) { write_trace_csv(s, *res.trace); }));
        check.add(out_path(sc, "trace.csv"), CsvSchema::trace);
        write_text_file(out_path(sc, "trajectories.csv"),
                        render_to_string([&](auto& s) { write_trajectories_csv(s, res.trace->final_roles); }));
        check.add(out_path(sc, "trajectories.csv"), CsvSchema::trajectory);
        write_text_file(out_path(sc, "metrics.csv"),
                        render_to_string([&](auto& s) { write_metrics_csv(s, {metrics_row(sc, res)}); }));
        check.add(out_path(sc, "metrics.csv"), CsvSchema::metrics);
        std::vector<Vec2> dests;
        for (const RoleSpec& r : sc.roles)
            dests.push_back(r.destination);
        write_text_file(out_path(sc, "simulation.svg"), render_trace_svg(sc.grid, dests, *res.trace));
    }
    if (res.metrics)
        std::cout << "min distance: " << format_number(res.metrics->min_inter_robot_distance)
                  << "  avg jerk: " << format_number(res.metrics->avg_jerk)
                  << "  collision frames: " << res.metrics->collision_frames << "  replans: " << res.replans << '\n';
    if (res.aborted) {
        std::cout << "aborted: " << res.abort_reason << '\n';
        return kInfeasibleExit;
    }
    return check.run() ? kOk : kSchemaViolation;
}

int cmd_bench(const Options& o) {
    const BenchSuite suite = load_suite(o.file);
    ScenarioOverrides ov = overrides_from(o);
    // Mode and sigma flags narrow the suite matrix instead of overriding each cell.
    BenchSuite run = suite;
    if (ov.init)
        run.inits = {*ov.init};
    if (ov.assign)
        run.assigns = {*ov.assign};
    if (ov.sharing)
        run.sharings = {*ov.sharing};
    if (ov.sigma_obs)
        run.sigma_obs = {*ov.sigma_obs};
    ov.init.reset();
    ov.assign.reset();
    ov.sharing.reset();
    ov.sigma_obs.reset();
    ov.output_dir.reset();
    const std::vector<BenchCell> cells = run_bench(run, ov, [](const BenchCell& c) {
        std::cerr << c.row.scenario << ' ' << c.row.mode << " sigma_obs="
                  << (c.sigma_obs ? format_number(*c.sigma_obs) : "scenario")
                  << " feasible=" << (c.row.feasible ? "true" : "false");
        if (!c.error.empty())
            std::cerr << " (" << c.error << ')';
        std::cerr << '\n';
    });
    const std::string dir = o.out_dir.empty() ? (fs::path("out") / suite.name).string() : o.out_dir;
    std::vector<MetricsRow> rows;
    for (const BenchCell& c : cells)
        rows.push_back(c.row);
    const std::string runs_path = (fs::path(dir) / "bench_runs.csv").string();
    const std::string bench_path = (fs::path(dir) / "bench.csv").string();
    write_text_file(runs_path, render_to_string([&](auto& s) { write_metrics_csv(s, rows); }));
    const std::string table = render_to_string([&](auto& s) { write_bench_csv(s, aggregate_bench(cells)); });
    write_text_file(bench_path, table);
    std::cout << table;
    SchemaCheck check(o.validate_schemas);
    check.add(runs_path, CsvSchema::metrics);
    check.add(bench_path, CsvSchema::bench);
    return check.run() ? kOk : kSchemaViolation;
}

log::Level parse_level(const std::string& s) {
    if (s == "debug")
        return log::Level::debug;
    if (s == "info")
        return log::Level::info;
    if (s == "warning")
        return log::Level::warning;
    if (s == "error")
        return log::Level::error;
    if (s == "off")
        return log::Level::off;
    throw InputError("unknown log level '" + s + "'");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Role engine for collaborative multi-robot path planning"};
    app.require_subcommand(1);
    Options o;
    app.add_option("--seed", o.seed, "Random seed (overrides the scenario)");
    app.add_option("--out-dir", o.out_dir, "Output directory (overrides the scenario)");
    app.add_option("--mode-init", o.mode_init, "Initial path mode: emap or straight");
    app.add_option("--mode-assign", o.mode_assign, "Assignment mode: gra or nn");
    app.add_option("--mode-sharing", o.mode_sharing, "Sharing mode: conflict_field, last_position or pairwise_factor");
    app.add_option("--sigma-obs", o.sigma_obs, "Obstacle factor sigma for every agent");
    app.add_flag("--validate-schemas", o.validate_schemas, "Check every written CSV against its schema");
    app.add_option("--log-level", o.log_level, "debug, info, warning, error or off");

    struct Command {
        const char* name;
        const char* help;
        int (*run)(const Options&);
    };
    const Command commands[] = {
        {"negotiate", "Feasibility report, E-Map dumps and SDF render", cmd_negotiate},
        {"plan", "Qualification matrix, assignment and initial roles", cmd_plan},
        {"simulate", "Full run with role-playing; trace and metrics", cmd_simulate},
        {"bench", "Run a benchmark suite and aggregate metrics", cmd_bench},
    };
    std::vector<std::pair<CLI::App*, int (*)(const Options&)>> subs;
    for (const Command& c : commands) {
        CLI::App* sub = app.add_subcommand(c.name, c.help);
        sub->add_option("file", o.file, c.run == cmd_bench ? "Suite file" : "Scenario file")->required();
        sub->fallthrough();
        subs.emplace_back(sub, c.run);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        log::set_level(parse_level(o.log_level));
        for (const auto& [sub, run] : subs)
            if (sub->parsed())
                return run(o);
    } catch (const SolverFailure& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return kSolverFailure;
    } catch (const InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << '\n';
        return kInfeasibleExit;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kParseError;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kUsage;
    }
    return kUsage;
}
