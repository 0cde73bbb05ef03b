#pragma once

#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "role_engine/grid.hpp"
#include "role_engine/sdf.hpp"

namespace role_engine {

/// Support state [x, y, vx, vy].
using State = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;
using Row4 = Eigen::Matrix<double, 1, 4>;

/// A process role: the trajectory of N+1 support states an agent follows for a role.
struct ProcessRole {
    std::string agent_id;
    std::string role_id;
    std::vector<State> states;
    double dt = 0.0;
    double cost = 0.0;

    size_t steps() const { return states.empty() ? 0 : states.size() - 1; }
    Vec2 position(size_t k) const { return states[k].head<2>(); }
    Vec2 velocity(size_t k) const { return states[k].tail<2>(); }
    void validate() const;

    friend bool operator==(const ProcessRole&, const ProcessRole&) = default;
};

class SolverFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Constant-velocity transition [[I, dt I], [0, I]].
Mat4 transition(double dt);

/// White-noise-acceleration process noise over an interval dt; rejects dt <= 0.
Mat4 process_noise(double dt, const Eigen::Matrix2d& qc);

struct PriorResidual {
    State residual;  // theta_{k+1} - Phi theta_k
    Mat4 weight;     // Q^-1
};

PriorResidual gp_prior_residual(const State& from, const State& to, const Mat4& phi, const Mat4& q);

/// Hinge obstacle cost: epsilon - d inside the safety band (d <= epsilon), else 0.
double hinge_cost(double d, double epsilon);

struct ScalarResidual {
    double value = 0.0;
    Row4 jacobian = Row4::Zero();
};

/// Unweighted obstacle residual hinge(d(x) - radius, epsilon) with d from `field` at `time_index`.
ScalarResidual obstacle_residual(const State& state, const DistanceField& field, size_t time_index,
                                 const RobotType& robot);
ScalarResidual obstacle_residual(const State& state, const SignedDistanceField& sdf, const RobotType& robot);

struct FixResidual {
    State value;
    Mat4 jacobian;
};
FixResidual fix_state_residual(const State& state, const State& target);

/// max(0, |v| - v_max).
ScalarResidual velocity_limit_residual(const State& state, double v_max);

struct PairwiseResidual {
    double value = 0.0;
    Row4 jacobian_self = Row4::Zero();
    Row4 jacobian_other = Row4::Zero();
};

/// hinge(|x - x'| - (r + r'), epsilon). Coincident positions take +x as the separating direction.
PairwiseResidual pairwise_conflict_residual(const State& self, const State& other, double radius_self,
                                            double radius_other, double epsilon);

/// Arc-length weighted obstacle cost sum_k c(x_k) |v_k| dt.
double conf_cost(const ProcessRole& role, const DistanceField& field, const RobotType& robot, size_t time_offset = 0);
double conf_cost(const ProcessRole& role, const SignedDistanceField& sdf, const RobotType& robot);

enum class FactorKind { gp_prior, obstacle, fix_state, velocity_limit, pairwise_conflict };

struct GpPriorFactor {
    size_t k = 0; // connects k and k+1
};
struct ObstacleFactor {
    size_t k = 0;
};
struct FixStateFactor {
    size_t k = 0;
    State target = State::Zero();
    double sigma = 1e-4;
};
struct VelocityLimitFactor {
    size_t k = 0;
    double v_max = 1.0;
    double sigma = 0.05;
};
/// Conflict with another agent's state held fixed (the other agent optimizes its own role).
struct PairwiseConflictFactor {
    size_t k = 0;
    State other = State::Zero();
    double other_radius = 0.1;
    double sigma = 0.05;
};

using Factor = std::variant<GpPriorFactor, ObstacleFactor, FixStateFactor, VelocityLimitFactor, PairwiseConflictFactor>;

FactorKind kind_of(const Factor& factor);

/// One agent's MAP problem over `num_states` consecutive support states.
struct FactorGraph {
    size_t num_states = 0;
    double dt = 0.0;
    Eigen::Matrix2d qc = Eigen::Matrix2d::Identity();
    RobotType robot;
    const DistanceField* field = nullptr;
    size_t time_offset = 0; // global time index of local state 0
    std::vector<Factor> factors;

    void validate() const;
};

struct ProblemOptions {
    double sigma_fix = 1e-4;
    bool velocity_limit = false;
    double sigma_velocity = 0.05;
};

/// Prior between every consecutive pair, an obstacle factor on every state and
/// tight fix_state factors on the first and last state.
FactorGraph make_trajectory_graph(size_t num_states, double dt, const Eigen::Matrix2d& qc, const RobotType& robot,
                                  const DistanceField& field, const State& start, const State& goal,
                                  const ProblemOptions& options = {});

struct Linearization {
    Eigen::SparseMatrix<double> A; // weighted Jacobian, one row per scalar residual
    Eigen::VectorXd b;             // negated weighted residuals
    double error() const { return 0.5 * b.squaredNorm(); }
};

/// Gauss-Newton model: 0.5 |A d - b|^2 approximates the objective at theta + d.
Linearization linearize(const FactorGraph& graph, const std::vector<State>& theta);

/// 0.5 * sum of weighted squared residuals.
double total_error(const FactorGraph& graph, const std::vector<State>& theta);

/// F_gp = 0.5 sum_k |theta_{k+1} - Phi theta_k|^2 in the Q^-1 metric. Zero exactly on
/// constant-velocity rollouts, the prior mean.
double prior_cost(const std::vector<State>& theta, double dt, const Eigen::Matrix2d& qc);

/// lambda * F_gp + F_conf.
double qualification_cost(const ProcessRole& role, const Eigen::Matrix2d& qc, double lambda, const DistanceField& field,
                          const RobotType& robot, size_t time_offset = 0);

struct SolverParams {
    int max_iterations = 100;
    double rel_tol = 1e-4;
    double step_tol = 1e-6;
    double lambda_init = 1e-2;
    double lambda_up = 10.0;
    double lambda_down = 10.0;
    double lambda_max = 1e10;

    void validate() const;
};

/// Stopping rule: true iff the step norm is below step_tol, the error decreased by a
/// relative amount below rel_tol, or `iteration` reached the iteration cap. An error
/// increase never counts as convergence on its own.
bool convergence(double step_norm, int iteration, double err, double prev_err, const SolverParams& params);

struct SolveResult {
    ProcessRole role;
    int iterations = 0;
    double initial_error = 0.0;
    double final_error = 0.0;
    std::vector<double> error_history; // error after every iteration, starting with the initial error
};

/// Levenberg-Marquardt with identity damping. The returned role's cost is the
/// qualification value lambda * F_gp + F_conf evaluated on the graph's field.
/// Throws SolverFailure when the objective becomes non-finite.
SolveResult solve_lm(const FactorGraph& graph, const ProcessRole& init, const SolverParams& params,
                     double lambda = 1.0);

/// Constant-velocity rollout from `start` (the GP prior mean).
std::vector<State> constant_velocity_rollout(const State& start, size_t num_states, double dt);

} // namespace role_engine
