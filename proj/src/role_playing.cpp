#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

#include "role_engine/log.hpp"
#include "role_engine/role_playing.hpp"

namespace role_engine {

std::string to_string(SharingMode mode) {
    switch (mode) {
    case SharingMode::conflict_field:
        return "conflict_field";
    case SharingMode::last_position:
        return "last_position";
    case SharingMode::pairwise_factor:
        return "pairwise_factor";
    }
    return "unknown";
}

SharingMode parse_sharing_mode(const std::string& text) {
    if (text == "conflict_field")
        return SharingMode::conflict_field;
    if (text == "last_position")
        return SharingMode::last_position;
    if (text == "pairwise_factor")
        return SharingMode::pairwise_factor;
    throw InputError("unknown sharing mode '" + text + "' (expected conflict_field, last_position or pairwise_factor)");
}

ConflictField::ConflictField(const SignedDistanceField& base, std::vector<ConflictTrack> tracks, std::size_t window)
    : base_(&base), tracks_(std::move(tracks)), window_(window) {
    for (const ConflictTrack& t : tracks_)
        if (t.positions.empty())
            throw InputError("conflict track for '" + t.agent_id + "' has no positions");
}

double ConflictField::distance(std::size_t time_index, Vec2 p, Vec2* gradient) const {
    return stamp(time_index, p, base_->value(p, gradient), gradient);
}

double ConflictField::stamp(std::size_t time_index, Vec2 p, double best, Vec2* gradient) const {
    for (const ConflictTrack& track : tracks_) {
        const std::size_t lo = std::max(track.first, time_index >= window_ ? time_index - window_ : 0);
        const std::size_t hi = std::min(track.last, time_index + window_);
        for (std::size_t t = lo; t <= hi; ++t) {
            const std::size_t idx = track.time_invariant ? 0 : std::min(t, track.positions.size() - 1);
            const Vec2 diff = p - track.positions[idx];
            const double dist = diff.norm();
            const double value = dist - track.radius;
            if (value < best) {
                best = value;
                if (gradient != nullptr)
                    *gradient = dist > 0.0 ? Vec2(diff / dist) : Vec2(1.0, 0.0);
            }
            if (track.time_invariant)
                break;
        }
    }
    return best;
}

SignedDistanceField ConflictField::rasterize(std::size_t time_index) const {
    std::vector<double> values(static_cast<std::size_t>(base_->width()) * base_->height());
    const double res = base_->resolution();
    for (int r = 0; r < base_->height(); ++r)
        for (int c = 0; c < base_->width(); ++c) {
            values[static_cast<std::size_t>(r) * base_->width() + c] =
                stamp(time_index, Vec2((c + 0.5) * res, (r + 0.5) * res), base_->at(c, r), nullptr);
        }
    return SignedDistanceField(base_->width(), base_->height(), res, std::move(values));
}

ConflictField make_conflict_field(const ChannelSnapshot& snapshot, const std::string& agent_id, const RobotType& robot,
                                  const std::map<std::string, double>& radii, const SignedDistanceField& sdf,
                                  std::size_t k, const ConflictOptions& options) {
    std::vector<ConflictTrack> tracks;
    if (options.sharing == SharingMode::pairwise_factor)
        return ConflictField(sdf, std::move(tracks), options.time_window);
    const std::size_t last =
        options.horizon ? k + *options.horizon : std::numeric_limits<std::size_t>::max() - options.time_window - 1;
    for (const auto& [other_id, entry] : snapshot.roles) {
        if (other_id == agent_id || !entry.role)
            continue;
        const auto radius_it = radii.find(other_id);
        const double other_radius = radius_it != radii.end() ? radius_it->second : robot.radius;
        const ProcessRole& role = *entry.role;
        ConflictTrack track;
        track.agent_id = other_id;
        track.radius = robot.radius + other_radius + robot.epsilon_safe;
        track.first = k;
        track.last = last;
        bool stale = false;
        if (options.horizon && entry.step + *options.horizon < k) {
            stale = true;
            std::ostringstream msg;
            msg << "role of '" << other_id << "' published at step " << entry.step << " is stale at step " << k
                << "; using its last position only";
            log::warning(msg.str());
        }
        if (options.sharing == SharingMode::last_position || stale) {
            track.time_invariant = true;
            track.positions = {role.position(std::min(k, role.steps()))};
        } else {
            track.positions.reserve(role.states.size());
            for (std::size_t t = 0; t < role.states.size(); ++t)
                track.positions.push_back(role.position(t));
        }
        tracks.push_back(std::move(track));
    }
    return ConflictField(sdf, std::move(tracks), options.time_window);
}

Vec2 track_position(const ProcessRole& role, std::size_t k, double noise_std, std::mt19937_64& rng) {
    if (k > role.steps())
        throw InputError("tracking step is past the end of the role");
    Vec2 p = role.position(k);
    if (noise_std > 0.0) {
        std::normal_distribution<double> noise(0.0, noise_std);
        p.x() += noise(rng);
        p.y() += noise(rng);
    }
    return p;
}

namespace {

bool has_conflict(const FactorGraph& graph, const std::vector<State>& theta) {
    for (const Factor& factor : graph.factors) {
        if (const auto* obstacle = std::get_if<ObstacleFactor>(&factor)) {
            if (obstacle_residual(theta[obstacle->k], *graph.field, graph.time_offset + obstacle->k, graph.robot).value >
                0.0)
                return true;
        } else if (const auto* pair = std::get_if<PairwiseConflictFactor>(&factor)) {
            if (pairwise_conflict_residual(theta[pair->k], pair->other, graph.robot.radius, pair->other_radius,
                                           graph.robot.epsilon_safe)
                    .value > 0.0)
                return true;
        }
    }
    return false;
}

} // namespace

std::uint64_t role_play_step(AgentRuntime& agent, const ChannelSnapshot& snapshot, SharedChannel& channel,
                             const StepSettings& settings) {
    if (!snapshot.environment)
        throw InputError("channel has no environment");
    const SignedDistanceField& sdf = snapshot.environment->sdf;
    const StaticDistanceField static_field(sdf);
    ProcessRole& role = agent.role;
    const std::size_t k = agent.k;
    const std::size_t n = role.steps();

    agent.position = track_position(role, std::min(k, n), agent.noise_std, agent.rng);
    agent.last_iterations = 0;

    if (k < n) {
        const std::size_t count = n - k + 1;
        std::vector<State> sub(role.states.begin() + static_cast<std::ptrdiff_t>(k), role.states.end());
        sub.front().head<2>() = agent.position;

        const ConflictField field =
            make_conflict_field(snapshot, agent.agent_id, agent.robot, settings.radii, sdf, k, settings.conflict);
        FactorGraph graph = make_trajectory_graph(count, role.dt, agent.qc, agent.robot, field, sub.front(),
                                                  role.states.back(), agent.problem);
        graph.time_offset = k;
        if (settings.conflict.sharing == SharingMode::pairwise_factor) {
            for (const auto& [other_id, entry] : snapshot.roles) {
                if (other_id == agent.agent_id || !entry.role)
                    continue;
                const auto radius_it = settings.radii.find(other_id);
                const double other_radius = radius_it != settings.radii.end() ? radius_it->second : agent.robot.radius;
                for (std::size_t i = 1; i < count; ++i) {
                    const std::size_t t = std::min(k + i, entry.role->steps());
                    graph.factors.emplace_back(
                        PairwiseConflictFactor{i, entry.role->states[t], other_radius, settings.conflict.sigma_pairwise});
                }
            }
        }

        if (settings.replan_every_step || has_conflict(graph, sub)) {
            ProcessRole init = role;
            init.states = sub;
            try {
                const SolveResult result = solve_lm(graph, init, agent.params, agent.lambda);
                std::copy(result.role.states.begin(), result.role.states.end(),
                          role.states.begin() + static_cast<std::ptrdiff_t>(k));
                agent.last_iterations = result.iterations;
                agent.consecutive_failures = 0;
            } catch (const SolverFailure& e) {
                ++agent.consecutive_failures;
                std::ostringstream msg;
                msg << "agent '" << agent.agent_id << "' failed to re-solve at step " << k << ": " << e.what();
                log::warning(msg.str());
                if (agent.consecutive_failures >= settings.distress_after)
                    agent.distress = true;
            }
        }
    }

    role.cost = qualification_cost(role, agent.qc, agent.lambda, static_field, agent.robot);
    agent.published_conf_cost = conf_cost(role, static_field, agent.robot);
    const std::uint64_t version = channel.publish(agent.agent_id, role, k);
    agent.k = k + 1;
    return version;
}

SimulationTrace run_simulation(std::vector<AgentRuntime>& agents, SharedChannel& channel, std::size_t total_steps,
                               Schedule schedule, const StepSettings& settings, const StepMonitor& monitor) {
    SimulationTrace trace;
    std::vector<std::size_t> order(agents.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return agents[a].agent_id < agents[b].agent_id; });
    for (const AgentRuntime& a : agents) {
        trace.agent_ids.push_back(a.agent_id);
        trace.radii.push_back(a.robot.radius);
    }
    if (!agents.empty())
        trace.dt = agents.front().role.dt;

    for (std::size_t step = 0; step <= total_steps; ++step) {
        const std::shared_ptr<const ChannelSnapshot> snap = channel.snapshot();
        std::vector<State> executed(agents.size());
        for (std::size_t i = 0; i < agents.size(); ++i)
            executed[i] = agents[i].role.states[std::min(agents[i].k, agents[i].role.steps())];
        std::vector<std::uint64_t> versions(agents.size(), 0);
        std::vector<int> failures_before(agents.size());
        for (std::size_t i = 0; i < agents.size(); ++i)
            failures_before[i] = agents[i].consecutive_failures;

        if (schedule == Schedule::round_robin) {
            for (std::size_t i : order)
                versions[i] = role_play_step(agents[i], *snap, channel, settings);
        } else {
            std::vector<std::thread> workers;
            std::vector<std::exception_ptr> errors(agents.size());
            for (std::size_t i : order)
                workers.emplace_back([&, i] {
                    try {
                        versions[i] = role_play_step(agents[i], *snap, channel, settings);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                });
            for (std::thread& w : workers)
                w.join();
            for (const std::exception_ptr& e : errors)
                if (e)
                    std::rethrow_exception(e);
        }

        for (std::size_t i = 0; i < agents.size(); ++i)
            if (agents[i].consecutive_failures > failures_before[i])
                ++trace.solver_failures;
        for (std::size_t i : order)
            trace.rows.push_back(TraceRow{step, agents[i].agent_id, executed[i], versions[i]});
        trace.executed.push_back(std::move(executed));

        if (monitor && !monitor(step, agents, channel, trace)) {
            trace.aborted = true;
            break;
        }
    }
    for (const AgentRuntime& a : agents)
        trace.final_roles.push_back(a.role);
    return trace;
}

Metrics compute_metrics(const SimulationTrace& trace) {
    if (trace.executed.empty())
        throw InputError("metrics need a non-empty trace");
    Metrics m;
    m.min_inter_robot_distance = std::numeric_limits<double>::infinity();
    const std::size_t agents = trace.agent_ids.size();
    for (const std::vector<State>& frame : trace.executed) {
        bool collision = false;
        for (std::size_t a = 0; a < agents; ++a)
            for (std::size_t b = a + 1; b < agents; ++b) {
                const double d = (frame[a].head<2>() - frame[b].head<2>()).norm();
                m.min_inter_robot_distance = std::min(m.min_inter_robot_distance, d);
                if (d < trace.radii[a] + trace.radii[b])
                    collision = true;
            }
        if (collision)
            ++m.collision_frames;
    }

    double jerk_sum = 0.0;
    std::size_t jerk_count = 0;
    const double dt3 = trace.dt * trace.dt * trace.dt;
    for (std::size_t a = 0; a < agents && dt3 > 0.0; ++a)
        for (std::size_t k = 0; k + 3 < trace.executed.size(); ++k) {
            const Vec2 j = trace.executed[k + 3][a].head<2>() - 3.0 * trace.executed[k + 2][a].head<2>() +
                           3.0 * trace.executed[k + 1][a].head<2>() - trace.executed[k][a].head<2>();
            jerk_sum += j.norm() / dt3;
            ++jerk_count;
        }
    m.avg_jerk = jerk_count > 0 ? jerk_sum / static_cast<double>(jerk_count) : 0.0;
    for (const ProcessRole& r : trace.final_roles)
        m.per_agent_cost.push_back(r.cost);
    return m;
}

} // namespace role_engine
