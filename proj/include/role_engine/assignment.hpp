#pragma once

#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "role_engine/envmap.hpp"
#include "role_engine/gp.hpp"

namespace role_engine {

/// Marks an infeasible agent-role pair in a qualification matrix.
inline constexpr double kInfeasible = std::numeric_limits<double>::infinity();

/// No perfect matching of finite cost exists.
class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct AgentSpec {
    std::string id;
    RobotType robot;
    Vec2 start = Vec2::Zero();
};

struct RoleSpec {
    std::string id;
    Vec2 destination = Vec2::Zero();
};

struct QualificationMatrix {
    std::vector<std::string> agent_ids;
    std::vector<std::string> role_ids;
    Eigen::MatrixXd q; // m x n, kInfeasible for infeasible pairs
    std::vector<std::vector<std::optional<ProcessRole>>> optimized_roles;
    std::vector<std::vector<int>> iterations; // LM iterations per pair, 0 when infeasible

    size_t m() const { return agent_ids.size(); }
    size_t n() const { return role_ids.size(); }
    bool feasible(size_t a, size_t r) const { return q(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(r)) < kInfeasible; }
};

/// Paired agent and role indices, sorted by agent index.
struct Assignment {
    std::vector<size_t> t_r;
    std::vector<size_t> t_c;
    double total_cost = 0.0;

    /// Role index assigned to agent `a`, if any.
    std::optional<size_t> role_of(size_t a) const;
};

struct QualificationInput {
    std::vector<AgentSpec> agents;
    std::vector<RoleSpec> roles;
    std::vector<const SignedDistanceField*> agent_sdf;          // per agent, the SDF of its robot type
    std::vector<std::vector<std::optional<InitialPath>>> paths; // [agent][role]
    double lambda = 1.0;
    Eigen::Matrix2d qc = Eigen::Matrix2d::Identity();
    SolverParams params;
    ProblemOptions options;
};

/// Optimizes every feasible pair's initial path and records lambda * F_gp + F_conf.
/// Pairs without a path, and pairs whose solve fails, get kInfeasible.
QualificationMatrix evaluate_qualifications(const QualificationInput& input);

/// Minimum-cost matching that covers every column of `cost` (rows >= columns).
/// Entries equal to +inf are forbidden. Among equal-cost matchings the one with the
/// lexicographically smallest role sequence in agent order wins.
/// Throws InfeasibleError when no finite matching exists.
Assignment hungarian_assign(const Eigen::MatrixXd& cost);

Assignment gra_solve(const QualificationMatrix& q);

/// Greedy baseline: repeatedly match the globally closest unmatched agent-role pair.
/// total_cost is the summed Euclidean distance.
Assignment nn_assign(const std::vector<Vec2>& agent_positions, const std::vector<Vec2>& role_positions);

/// Sum of q over the assignment's pairs (kInfeasible if any pair is infeasible).
double matching_cost(const Eigen::MatrixXd& q, const Assignment& assignment);

} // namespace role_engine
