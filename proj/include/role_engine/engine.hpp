#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "role_engine/assignment.hpp"
#include "role_engine/envmap.hpp"
#include "role_engine/role_playing.hpp"

namespace role_engine {

enum class InitMode { emap, straight };
enum class AssignMode { gra, nn };

std::string to_string(InitMode mode);
std::string to_string(AssignMode mode);
InitMode parse_init_mode(const std::string& text);
AssignMode parse_assign_mode(const std::string& text);

/// Box of cells filled at the start of the given step's monitoring pass.
struct MapEvent {
    std::size_t step = 0;
    Vec2 lo = Vec2::Zero();
    Vec2 hi = Vec2::Zero();
};

struct Scenario {
    std::string name;
    std::string map_path;
    OccupancyGrid grid;
    std::vector<AgentSpec> agents;
    std::vector<RoleSpec> roles;

    double lambda = 1.0;
    Eigen::Matrix2d qc = Eigen::Matrix2d::Identity();
    int steps = 99;
    double total_time = 10.0;
    SolverParams solver;
    ProblemOptions problem;

    InitMode init = InitMode::emap;
    AssignMode assign = AssignMode::gra;
    Schedule schedule = Schedule::round_robin;
    ConflictOptions conflict;
    bool replan_every_step = true;
    int distress_after = 5;
    double noise_std = 0.0;
    std::uint64_t seed = 1;

    double conf_factor = 10.0; // replan when conf_cost exceeds this multiple of its published value
    double conf_floor = 0.25;  // ... and this absolute value
    std::vector<MapEvent> map_events;
    std::string output_dir;

    /// Throws InputError for empty maps, duplicate ids, fewer agents than roles,
    /// positions outside the grid and invalid hyperparameters.
    void validate() const;
};

/// Per robot type: the robot parameters, its feasible-location map and E-Map.
struct TypeEnvironment {
    RobotType robot;
    OccupancyGrid feasible;
    EMapGraph emap;
};

struct NegotiationResult {
    bool feasible = false;
    std::vector<std::string> uncoverable_roles;
    std::shared_ptr<const Environment> environment;
    std::vector<TypeEnvironment> types;
    std::vector<std::size_t> agent_type; // index into types, per agent
    std::vector<std::vector<std::optional<InitialPath>>> init_paths; // [agent][role]
};

/// Agents sharing radius, speed and obstacle weights share one type.
std::vector<RobotType> robot_types(const std::vector<AgentSpec>& agents, std::vector<std::size_t>* agent_type);

NegotiationResult role_negotiation(const Scenario& scenario);

/// True iff every support state and the segment between consecutive states keeps
/// the robot center in free cells of the feasible-location map.
bool trajectory_feasible(const ProcessRole& role, const OccupancyGrid& feasible);

enum class ProblemAction { none, replan, abort };

struct ProblemReport {
    ProblemAction action = ProblemAction::none;
    std::string reason;
};

struct ProblemThresholds {
    double conf_factor = 10.0;
    double conf_floor = 0.25;
};

/// Replan on distress, on a role whose conf_cost against the current map exceeds
/// max(conf_factor x published value, conf_floor), or on a map version newer than
/// `known_environment_version`. A trigger becomes an abort when `negotiable`
/// is given and returns false.
ProblemReport detect_problem(const ChannelSnapshot& snapshot, const std::vector<AgentRuntime>& agents,
                             std::uint64_t known_environment_version, const ProblemThresholds& thresholds,
                             const std::function<bool()>& negotiable = {});

struct RunResult {
    NegotiationResult negotiation;
    std::optional<QualificationMatrix> qualification;
    std::optional<Assignment> assignment;
    std::vector<ProcessRole> initial_roles; // per agent, after assignment
    std::optional<SimulationTrace> trace;
    std::optional<Metrics> metrics;
    bool aborted = false;
    std::string abort_reason;
    bool feasible = false;             // every assigned initial role clears the dilated map
    double total_cost = 0.0;           // summed qualification cost of the assignment
    double iterations_mean = 0.0;      // mean LM iterations over feasible qualification pairs
    std::size_t replans = 0;
};

/// Negotiation, qualification and assignment only.
RunResult plan_scenario(const Scenario& scenario);

/// Full pipeline: plan, publish, role-play with monitoring and replanning.
RunResult run_central(const Scenario& scenario);

/// Renegotiates from `positions` with `remaining_steps` steps left. Returns the new
/// plan or nullopt if renegotiation or assignment is infeasible.
std::optional<RunResult> replan(const Scenario& scenario, const std::vector<Vec2>& positions, int remaining_steps);

} // namespace role_engine
