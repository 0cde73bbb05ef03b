#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "role_engine/gp.hpp"

namespace role_engine {

/// Grid plus its SDF, published as one unit so readers never see a mismatched pair.
struct Environment {
    OccupancyGrid grid;
    SignedDistanceField sdf;
};

struct ChannelEntry {
    std::shared_ptr<const ProcessRole> role;
    std::uint64_t version = 0;
    std::size_t step = 0; // simulation step at which the role was published
};

/// Immutable view of the channel at one instant.
struct ChannelSnapshot {
    std::map<std::string, ChannelEntry> roles;
    std::shared_ptr<const Environment> environment;
    std::uint64_t environment_version = 0;

    const ChannelEntry* find(const std::string& agent_id) const;
};

/// Latest-value store of process roles. Writers copy the current snapshot, edit
/// the copy and swap it in; readers only copy a shared pointer, so a reader never
/// sees a partially written entry.
class SharedChannel {
public:
    SharedChannel();

    /// Stores `role` as agent_id's latest entry and returns its version. Versions
    /// are drawn from one counter and strictly increase across all publishes.
    std::uint64_t publish(const std::string& agent_id, ProcessRole role, std::size_t step = 0);
    std::uint64_t publish_environment(std::shared_ptr<const Environment> environment);

    std::optional<ChannelEntry> subscribe(const std::string& agent_id) const;
    std::shared_ptr<const ChannelSnapshot> snapshot() const;

private:
    mutable std::mutex mutex_;
    std::shared_ptr<const ChannelSnapshot> current_;
    std::uint64_t counter_ = 0;
};

/// Another agent's predicted positions on the global time axis. Indices past the
/// end hold the last position (the agent rests at its goal).
struct ConflictTrack {
    std::string agent_id;
    std::vector<Vec2> positions;
    double radius = 0.0;           // stamp radius r_j + r_i' + epsilon
    bool time_invariant = false;   // true: positions[0] is stamped at every time index
    std::size_t first = 0;         // stamping window [first, last] on the global axis
    std::size_t last = 0;
};

/// Static SDF min-combined with space-time discs of other agents. A disc centred
/// at c with radius R contributes |p - c| - R at the time index it is aligned to;
/// `window` widens the alignment to t - window .. t + window.
class ConflictField final : public DistanceField {
public:
    ConflictField(const SignedDistanceField& base, std::vector<ConflictTrack> tracks, std::size_t window = 0);

    double distance(std::size_t time_index, Vec2 p, Vec2* gradient) const override;

    /// The field at time index t sampled at every cell center.
    SignedDistanceField rasterize(std::size_t time_index) const;

    const std::vector<ConflictTrack>& tracks() const { return tracks_; }

private:
    /// Lowers `best` by every disc aligned with `time_index`; `gradient` follows the winner.
    double stamp(std::size_t time_index, Vec2 p, double best, Vec2* gradient) const;

    const SignedDistanceField* base_;
    std::vector<ConflictTrack> tracks_;
    std::size_t window_;
};

enum class SharingMode { conflict_field, last_position, pairwise_factor };
enum class Schedule { round_robin, concurrent };

std::string to_string(SharingMode mode);
SharingMode parse_sharing_mode(const std::string& text);

struct ConflictOptions {
    SharingMode sharing = SharingMode::conflict_field;
    std::optional<std::size_t> horizon; // steps past k; empty means the whole remaining role
    std::size_t time_window = 0;
    double sigma_pairwise = 0.05;
};

/// Builds agent j's conflict field at step k from a snapshot. Agents missing from
/// the snapshot are ignored; entries published more than `horizon` steps before k
/// are treated as last-position only (with a warning).
ConflictField make_conflict_field(const ChannelSnapshot& snapshot, const std::string& agent_id, const RobotType& robot,
                                  const std::map<std::string, double>& radii, const SignedDistanceField& sdf,
                                  std::size_t k, const ConflictOptions& options);

struct AgentRuntime {
    std::string agent_id;
    RobotType robot;
    ProcessRole role;
    std::size_t k = 0;
    Vec2 position = Vec2::Zero();
    SolverParams params;
    Eigen::Matrix2d qc = Eigen::Matrix2d::Identity();
    double lambda = 1.0;
    ProblemOptions problem;
    double noise_std = 0.0;
    std::mt19937_64 rng;
    int consecutive_failures = 0;
    bool distress = false;
    int last_iterations = 0;
    double published_conf_cost = 0.0; // conf_cost against the static map when last published
};

/// Executed position x_j(k) plus zero-mean Gaussian noise of standard deviation noise_std.
Vec2 track_position(const ProcessRole& role, std::size_t k, double noise_std, std::mt19937_64& rng);

struct StepSettings {
    ConflictOptions conflict;
    std::map<std::string, double> radii; // every agent's radius, for stamping
    bool replan_every_step = true;
    int distress_after = 5;
};

/// One role-playing iteration for `agent` against `snapshot`: track, build the
/// conflict view, re-solve states k..N with state k fixed, publish, advance k.
/// On solver failure the previous role is republished and the failure counted.
/// Returns the published version.
std::uint64_t role_play_step(AgentRuntime& agent, const ChannelSnapshot& snapshot, SharedChannel& channel,
                             const StepSettings& settings);

struct TraceRow {
    std::size_t step = 0;
    std::string agent_id;
    State state = State::Zero();
    std::uint64_t published_version = 0;
};

struct SimulationTrace {
    std::vector<std::string> agent_ids;
    std::vector<double> radii;
    double dt = 0.0;
    std::vector<std::vector<State>> executed; // [step][agent]
    std::vector<TraceRow> rows;
    std::vector<ProcessRole> final_roles;
    std::vector<std::size_t> replan_steps;
    int solver_failures = 0;
    bool aborted = false;
    std::string abort_reason;
};

/// Called after every step; may mutate agents (replanning) and returns false to abort.
using StepMonitor = std::function<bool(std::size_t step, std::vector<AgentRuntime>& agents, SharedChannel& channel,
                                       SimulationTrace& trace)>;

/// Runs steps 0..total_steps. Agents must hold their initial roles and have been
/// published to the channel. Every agent of a step reads the snapshot taken at
/// the start of that step.
SimulationTrace run_simulation(std::vector<AgentRuntime>& agents, SharedChannel& channel, std::size_t total_steps,
                               Schedule schedule, const StepSettings& settings, const StepMonitor& monitor = {});

struct Metrics {
    double min_inter_robot_distance = 0.0; // +inf with fewer than two agents
    double avg_jerk = 0.0;
    std::vector<double> per_agent_cost;
    std::size_t collision_frames = 0;
};

Metrics compute_metrics(const SimulationTrace& trace);

} // namespace role_engine
