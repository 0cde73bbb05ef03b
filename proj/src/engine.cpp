#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <Eigen/LU>

#include "role_engine/engine.hpp"
#include "role_engine/log.hpp"

namespace role_engine {

std::string to_string(InitMode mode) {
    return mode == InitMode::emap ? "emap" : "straight";
}

std::string to_string(AssignMode mode) {
    return mode == AssignMode::gra ? "gra" : "nn";
}

InitMode parse_init_mode(const std::string& text) {
    if (text == "emap")
        return InitMode::emap;
    if (text == "straight")
        return InitMode::straight;
    throw InputError("unknown init mode '" + text + "' (expected emap or straight)");
}

AssignMode parse_assign_mode(const std::string& text) {
    if (text == "gra")
        return AssignMode::gra;
    if (text == "nn")
        return AssignMode::nn;
    throw InputError("unknown assign mode '" + text + "' (expected gra or nn)");
}

void Scenario::validate() const {
    if (grid.empty())
        throw InputError("scenario has no map");
    if (agents.empty())
        throw InputError("scenario has no agents");
    if (agents.size() < roles.size())
        throw InputError("scenario has fewer agents than roles");
    std::set<std::string> ids;
    for (const AgentSpec& a : agents) {
        if (!ids.insert(a.id).second)
            throw InputError("duplicate agent id '" + a.id + "'");
        a.robot.validate();
        if (!grid.contains(a.start))
            throw InputError("agent '" + a.id + "' starts outside the map");
    }
    ids.clear();
    for (const RoleSpec& r : roles) {
        if (!ids.insert(r.id).second)
            throw InputError("duplicate role id '" + r.id + "'");
        if (!grid.contains(r.destination))
            throw InputError("role '" + r.id + "' destination is outside the map");
    }
    if (steps < 1)
        throw InputError("steps must be at least 1");
    if (!(total_time > 0.0))
        throw InputError("total_time must be positive");
    if (!(lambda >= 0.0))
        throw InputError("lambda must be non-negative");
    if (!(qc(0, 0) > 0.0) || !(qc.determinant() > 0.0) || qc(0, 1) != qc(1, 0))
        throw InputError("qc must be symmetric positive definite");
    if (!(noise_std >= 0.0))
        throw InputError("noise must be non-negative");
    solver.validate();
}

std::vector<RobotType> robot_types(const std::vector<AgentSpec>& agents, std::vector<std::size_t>* agent_type) {
    std::vector<RobotType> types;
    std::vector<std::size_t> mapping;
    for (const AgentSpec& a : agents) {
        const RobotType& r = a.robot;
        auto it = std::find_if(types.begin(), types.end(), [&](const RobotType& t) {
            return t.radius == r.radius && t.v_max == r.v_max && t.sigma_obs == r.sigma_obs &&
                   t.epsilon_safe == r.epsilon_safe;
        });
        if (it == types.end()) {
            RobotType t = r;
            std::ostringstream id;
            id << "type" << types.size() << "_r" << r.radius;
            t.id = id.str();
            types.push_back(t);
            it = types.end() - 1;
        }
        mapping.push_back(static_cast<std::size_t>(it - types.begin()));
    }
    if (agent_type != nullptr)
        *agent_type = std::move(mapping);
    return types;
}

NegotiationResult role_negotiation(const Scenario& scenario) {
    scenario.validate();
    NegotiationResult out;
    out.environment = std::make_shared<const Environment>(Environment{scenario.grid, compute_sdf(scenario.grid)});
    const std::vector<RobotType> types = robot_types(scenario.agents, &out.agent_type);
    for (const RobotType& t : types) {
        TypeEnvironment env;
        env.robot = t;
        env.feasible = dilate_for_robot(scenario.grid, t);
        env.emap = build_emap(env.feasible);
        out.types.push_back(std::move(env));
    }

    const std::size_t m = scenario.agents.size();
    const std::size_t n = scenario.roles.size();
    out.init_paths.assign(m, std::vector<std::optional<InitialPath>>(n));
    std::vector<char> covered(n, 0);
    for (std::size_t a = 0; a < m; ++a) {
        const AgentSpec& agent = scenario.agents[a];
        const TypeEnvironment& env = out.types[out.agent_type[a]];
        for (std::size_t r = 0; r < n; ++r) {
            const RoleSpec& role = scenario.roles[r];
            const std::optional<AuxNodes> aux = find_aux_nodes(env.emap, env.feasible, agent.start, role.destination);
            if (!aux)
                continue;
            std::vector<Vec2> nodes;
            if (scenario.init == InitMode::emap)
                nodes = reduce_nodes(aux->waypoints, env.feasible, agent.start, role.destination);
            else
                nodes = {agent.start, role.destination};
            InitialPath path = make_init_path(nodes, scenario.steps, scenario.total_time);
            path.agent_id = agent.id;
            path.role_id = role.id;
            out.init_paths[a][r] = std::move(path);
            covered[r] = 1;
        }
    }
    for (std::size_t r = 0; r < n; ++r)
        if (!covered[r])
            out.uncoverable_roles.push_back(scenario.roles[r].id);
    out.feasible = out.uncoverable_roles.empty();
    return out;
}

bool trajectory_feasible(const ProcessRole& role, const OccupancyGrid& feasible) {
    const double step = 0.25 * feasible.resolution();
    auto clear = [&](Vec2 p) { return feasible.contains(p) && feasible.free(feasible.cell_at(p)); };
    for (std::size_t k = 0; k < role.states.size(); ++k) {
        if (!clear(role.position(k)))
            return false;
        if (k == 0)
            continue;
        const Vec2 a = role.position(k - 1);
        const Vec2 b = role.position(k);
        const int samples = static_cast<int>(std::ceil((b - a).norm() / step));
        for (int i = 1; i < samples; ++i)
            if (!clear(a + (b - a) * (static_cast<double>(i) / samples)))
                return false;
    }
    return true;
}

ProblemReport detect_problem(const ChannelSnapshot& snapshot, const std::vector<AgentRuntime>& agents,
                             std::uint64_t known_environment_version, const ProblemThresholds& thresholds,
                             const std::function<bool()>& negotiable) {
    ProblemReport report;
    for (const AgentRuntime& a : agents)
        if (a.distress) {
            report.action = ProblemAction::replan;
            report.reason = "agent '" + a.agent_id + "' is in distress";
            break;
        }
    if (report.action == ProblemAction::none && snapshot.environment_version > known_environment_version) {
        report.action = ProblemAction::replan;
        report.reason = "map changed";
    }
    if (report.action == ProblemAction::none && snapshot.environment) {
        const StaticDistanceField field(snapshot.environment->sdf);
        for (const AgentRuntime& a : agents) {
            const ChannelEntry* entry = snapshot.find(a.agent_id);
            if (entry == nullptr || !entry->role)
                continue;
            const double current = conf_cost(*entry->role, field, a.robot);
            const double limit = std::max(thresholds.conf_factor * a.published_conf_cost, thresholds.conf_floor);
            if (current > limit) {
                std::ostringstream msg;
                msg << "conflict cost of agent '" << a.agent_id << "' rose to " << current;
                report.action = ProblemAction::replan;
                report.reason = msg.str();
                break;
            }
        }
    }
    if (report.action == ProblemAction::replan && negotiable && !negotiable()) {
        report.action = ProblemAction::abort;
        report.reason += "; renegotiation from current positions is infeasible";
    }
    return report;
}

namespace {

ProcessRole stationary_role(const AgentSpec& agent, int steps, double dt) {
    ProcessRole r;
    r.agent_id = agent.id;
    State s;
    s << agent.start, 0.0, 0.0;
    r.states.assign(static_cast<std::size_t>(steps) + 1, s);
    r.dt = dt;
    return r;
}

} // namespace

RunResult plan_scenario(const Scenario& scenario) {
    RunResult res;
    res.negotiation = role_negotiation(scenario);
    if (!res.negotiation.feasible) {
        res.aborted = true;
        std::ostringstream msg;
        msg << "no feasible initial path for role(s):";
        for (const std::string& id : res.negotiation.uncoverable_roles)
            msg << ' ' << id;
        res.abort_reason = msg.str();
        return res;
    }

    QualificationInput input;
    input.agents = scenario.agents;
    input.roles = scenario.roles;
    input.agent_sdf.assign(scenario.agents.size(), &res.negotiation.environment->sdf);
    input.paths = res.negotiation.init_paths;
    input.lambda = scenario.lambda;
    input.qc = scenario.qc;
    input.params = scenario.solver;
    input.options = scenario.problem;
    res.qualification = evaluate_qualifications(input);
    const QualificationMatrix& q = *res.qualification;

    double iterations = 0.0;
    std::size_t pairs = 0;
    for (std::size_t a = 0; a < q.m(); ++a)
        for (std::size_t r = 0; r < q.n(); ++r)
            if (q.feasible(a, r)) {
                iterations += q.iterations[a][r];
                ++pairs;
            }
    res.iterations_mean = pairs > 0 ? iterations / static_cast<double>(pairs) : 0.0;

    try {
        if (scenario.assign == AssignMode::gra) {
            res.assignment = gra_solve(q);
        } else {
            std::vector<Vec2> starts, dests;
            for (const AgentSpec& a : scenario.agents)
                starts.push_back(a.start);
            for (const RoleSpec& r : scenario.roles)
                dests.push_back(r.destination);
            Assignment nn = nn_assign(starts, dests);
            nn.total_cost = matching_cost(q.q, nn);
            if (!std::isfinite(nn.total_cost))
                throw InfeasibleError("nearest-neighbor matching uses an infeasible pair");
            res.assignment = nn;
        }
    } catch (const InfeasibleError& e) {
        res.aborted = true;
        res.abort_reason = e.what();
        return res;
    }
    res.total_cost = res.assignment->total_cost;

    const double dt = scenario.total_time / scenario.steps;
    res.feasible = true;
    for (std::size_t a = 0; a < scenario.agents.size(); ++a) {
        const std::optional<std::size_t> r = res.assignment->role_of(a);
        if (!r) {
            res.initial_roles.push_back(stationary_role(scenario.agents[a], scenario.steps, dt));
            continue;
        }
        ProcessRole role = *q.optimized_roles[a][*r];
        const OccupancyGrid& feasible = res.negotiation.types[res.negotiation.agent_type[a]].feasible;
        if (!trajectory_feasible(role, feasible)) {
            res.feasible = false;
            log::info("trajectory of agent '" + role.agent_id + "' for role '" + role.role_id +
                      "' enters the dilated obstacle map");
        }
        res.initial_roles.push_back(std::move(role));
    }
    return res;
}

std::optional<RunResult> replan(const Scenario& scenario, const std::vector<Vec2>& positions, int remaining_steps) {
    if (positions.size() != scenario.agents.size())
        throw InputError("replan needs one position per agent");
    if (remaining_steps < 1)
        return std::nullopt;
    Scenario next = scenario;
    for (std::size_t a = 0; a < positions.size(); ++a)
        next.agents[a].start = positions[a];
    next.total_time = scenario.total_time * remaining_steps / scenario.steps;
    next.steps = remaining_steps;
    RunResult res = plan_scenario(next);
    if (res.aborted)
        return std::nullopt;
    return res;
}

RunResult run_central(const Scenario& scenario) {
    RunResult res = plan_scenario(scenario);
    if (res.aborted)
        return res;

    SharedChannel channel;
    std::uint64_t known_environment = channel.publish_environment(res.negotiation.environment);

    std::vector<AgentRuntime> agents;
    StepSettings settings;
    settings.conflict = scenario.conflict;
    settings.replan_every_step = scenario.replan_every_step;
    settings.distress_after = scenario.distress_after;
    for (std::size_t a = 0; a < scenario.agents.size(); ++a) {
        const AgentSpec& spec = scenario.agents[a];
        AgentRuntime rt;
        rt.agent_id = spec.id;
        rt.robot = spec.robot;
        rt.role = res.initial_roles[a];
        rt.position = spec.start;
        rt.params = scenario.solver;
        rt.qc = scenario.qc;
        rt.lambda = scenario.lambda;
        rt.problem = scenario.problem;
        rt.noise_std = scenario.noise_std;
        rt.rng.seed(scenario.seed * 1000003ULL + a);
        rt.published_conf_cost = conf_cost(rt.role, res.negotiation.environment->sdf, rt.robot);
        settings.radii[spec.id] = spec.robot.radius;
        channel.publish(spec.id, rt.role, 0);
        agents.push_back(std::move(rt));
    }

    Scenario current = scenario;
    const ProblemThresholds thresholds{scenario.conf_factor, scenario.conf_floor};
    std::size_t replans = 0;
    const StepMonitor monitor = [&](std::size_t step, std::vector<AgentRuntime>& live, SharedChannel& ch,
                                    SimulationTrace& trace) {
        for (const MapEvent& ev : current.map_events)
            if (ev.step == step) {
                current.grid.fill_box(ev.lo, ev.hi, true);
                ch.publish_environment(
                    std::make_shared<const Environment>(Environment{current.grid, compute_sdf(current.grid)}));
                std::ostringstream msg;
                msg << "map event at step " << step;
                log::info(msg.str());
            }
        const std::size_t k = step + 1;
        const int remaining = current.steps - static_cast<int>(k);
        if (remaining < 1)
            return true;
        const std::shared_ptr<const ChannelSnapshot> snap = ch.snapshot();
        std::optional<RunResult> pending;
        const auto negotiable = [&] {
            std::vector<Vec2> positions;
            for (const AgentRuntime& a : live)
                positions.push_back(a.role.position(k));
            pending = replan(current, positions, remaining);
            return pending.has_value();
        };
        const ProblemReport report = detect_problem(*snap, live, known_environment, thresholds, negotiable);
        if (report.action == ProblemAction::none)
            return true;
        if (report.action == ProblemAction::abort) {
            trace.abort_reason = report.reason;
            return false;
        }
        known_environment = snap->environment_version;
        for (std::size_t a = 0; a < live.size(); ++a) {
            AgentRuntime& agent = live[a];
            const ProcessRole& fresh = pending->initial_roles[a];
            std::copy(fresh.states.begin(), fresh.states.end(),
                      agent.role.states.begin() + static_cast<std::ptrdiff_t>(k));
            agent.role.role_id = fresh.role_id;
            agent.distress = false;
            agent.consecutive_failures = 0;
            const StaticDistanceField field(snap->environment->sdf);
            agent.role.cost = qualification_cost(agent.role, agent.qc, agent.lambda, field, agent.robot);
            agent.published_conf_cost = conf_cost(agent.role, field, agent.robot);
            ch.publish(agent.agent_id, agent.role, step);
        }
        trace.replan_steps.push_back(step);
        ++replans;
        std::ostringstream msg;
        msg << "replanned at step " << step << ": " << report.reason;
        log::info(msg.str());
        return true;
    };

    SimulationTrace trace =
        run_simulation(agents, channel, static_cast<std::size_t>(scenario.steps), scenario.schedule, settings, monitor);
    res.replans = replans;
    if (trace.aborted) {
        res.aborted = true;
        res.abort_reason = trace.abort_reason;
    }
    res.metrics = compute_metrics(trace);
    res.trace = std::move(trace);
    return res;
}

} // namespace role_engine
