#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "role_engine/bench.hpp"

namespace role_engine {

RunResult run_cell(const Scenario& scenario, bool simulate) {
    if (simulate)
        return run_central(scenario);
    RunResult res = plan_scenario(scenario);
    if (res.aborted || res.initial_roles.empty())
        return res;
    SimulationTrace trace;
    trace.dt = res.initial_roles.front().dt;
    for (std::size_t a = 0; a < scenario.agents.size(); ++a) {
        trace.agent_ids.push_back(scenario.agents[a].id);
        trace.radii.push_back(scenario.agents[a].robot.radius);
    }
    const std::size_t frames = res.initial_roles.front().states.size();
    for (std::size_t k = 0; k < frames; ++k) {
        std::vector<State> frame;
        for (const ProcessRole& r : res.initial_roles)
            frame.push_back(r.states[std::min(k, r.states.size() - 1)]);
        trace.executed.push_back(std::move(frame));
    }
    trace.final_roles = res.initial_roles;
    res.metrics = compute_metrics(trace);
    return res;
}

std::vector<BenchCell> run_bench(const BenchSuite& suite, const ScenarioOverrides& overrides,
                                 const std::function<void(const BenchCell&)>& progress) {
    std::vector<std::optional<double>> sigmas;
    if (suite.sigma_obs.empty())
        sigmas.emplace_back();
    for (double s : suite.sigma_obs)
        sigmas.emplace_back(s);

    std::vector<BenchCell> cells;
    for (const std::string& path : suite.scenario_paths) {
        std::optional<Scenario> base;
        std::string load_error;
        try {
            base = load_scenario(path);
        } catch (const InputError& e) {
            load_error = e.what();
        }
        for (InitMode init : suite.inits)
            for (AssignMode assign : suite.assigns)
                for (SharingMode sharing : suite.sharings)
                    for (const std::optional<double>& sigma : sigmas) {
                        BenchCell cell;
                        cell.scenario_path = path;
                        cell.init = init;
                        cell.assign = assign;
                        cell.sharing = sharing;
                        cell.sigma_obs = sigma;
                        cell.row.mode = to_string(init) + "/" + to_string(assign) + "/" + to_string(sharing);
                        cell.row.total_cost = kInfeasible;
                        cell.row.min_dist = kInfeasible;
                        if (!base) {
                            cell.row.scenario = path;
                            cell.error = load_error;
                        } else {
                            Scenario sc = *base;
                            ScenarioOverrides o = overrides;
                            o.init = init;
                            o.assign = assign;
                            o.sharing = sharing;
                            if (sigma)
                                o.sigma_obs = sigma;
                            try {
                                apply_overrides(sc, o);
                                const RunResult res = run_cell(sc, suite.simulate);
                                cell.row = metrics_row(sc, res);
                                if (res.aborted)
                                    cell.error = res.abort_reason;
                            } catch (const std::exception& e) {
                                cell.row.scenario = sc.name;
                                cell.error = e.what();
                            }
                        }
                        if (progress)
                            progress(cell);
                        cells.push_back(std::move(cell));
                    }
    }
    return cells;
}

std::vector<BenchAggregate> aggregate_bench(const std::vector<BenchCell>& cells) {
    struct Acc {
        std::size_t runs = 0, feasible = 0, costed = 0, collisions = 0;
        double cost = 0.0, iterations = 0.0, jerk = 0.0;
        double min_dist = std::numeric_limits<double>::infinity();
    };
    std::vector<std::pair<std::string, std::string>> order;
    std::map<std::pair<std::string, std::string>, Acc> groups;
    auto add = [&](const std::pair<std::string, std::string>& key, const BenchCell& c) {
        if (!groups.count(key))
            order.push_back(key);
        Acc& g = groups[key];
        ++g.runs;
        g.feasible += c.row.feasible ? 1 : 0;
        if (std::isfinite(c.row.total_cost)) {
            g.cost += c.row.total_cost;
            ++g.costed;
        }
        g.iterations += c.row.iterations_mean;
        g.jerk += c.row.avg_jerk;
        g.min_dist = std::min(g.min_dist, c.row.min_dist);
        g.collisions += c.row.collision_frames;
    };
    for (const BenchCell& c : cells) {
        const std::string sigma = c.sigma_obs ? format_number(*c.sigma_obs) : "scenario";
        add({c.row.mode, sigma}, c);
    }
    for (const BenchCell& c : cells)
        add({c.row.mode, "all"}, c);

    std::vector<BenchAggregate> out;
    for (const auto& key : order) {
        const Acc& g = groups.at(key);
        BenchAggregate a;
        a.mode = key.first;
        a.sigma_obs = key.second;
        a.runs = g.runs;
        a.feasibility_pct = 100.0 * static_cast<double>(g.feasible) / static_cast<double>(g.runs);
        a.mean_total_cost = g.costed > 0 ? g.cost / static_cast<double>(g.costed) : kInfeasible;
        a.mean_iterations = g.iterations / static_cast<double>(g.runs);
        a.min_dist = g.min_dist;
        a.avg_jerk = g.jerk / static_cast<double>(g.runs);
        a.collision_frames = g.collisions;
        out.push_back(a);
    }
    return out;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchAggregate>& rows) {
    out << kBenchHeader << '\n';
    for (const BenchAggregate& r : rows)
        out << r.mode << ',' << r.sigma_obs << ',' << r.runs << ',' << format_number(r.feasibility_pct) << ','
            << format_number(r.mean_total_cost) << ',' << format_number(r.mean_iterations) << ','
            << format_number(r.min_dist) << ',' << format_number(r.avg_jerk) << ',' << r.collision_frames << '\n';
}

} // namespace role_engine
