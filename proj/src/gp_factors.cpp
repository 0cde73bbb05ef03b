#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "role_engine/gp.hpp"

namespace role_engine {

void ProcessRole::validate() const {
    if (states.size() < 2)
        throw InputError("process role '" + role_id + "' needs at least two support states");
    if (!(dt > 0.0))
        throw InputError("process role '" + role_id + "' needs a positive dt");
    for (const State& s : states)
        if (!s.allFinite())
            throw InputError("process role '" + role_id + "' has a non-finite state");
}

Mat4 transition(double dt) {
    if (dt < 0.0)
        throw InputError("transition interval must be non-negative");
    Mat4 phi = Mat4::Identity();
    phi(0, 2) = dt;
    phi(1, 3) = dt;
    return phi;
}

Mat4 process_noise(double dt, const Eigen::Matrix2d& qc) {
    if (!(dt > 0.0))
        throw InputError("process noise needs a positive interval");
    Mat4 q;
    q.topLeftCorner<2, 2>() = dt * dt * dt / 3.0 * qc;
    q.topRightCorner<2, 2>() = dt * dt / 2.0 * qc;
    q.bottomLeftCorner<2, 2>() = dt * dt / 2.0 * qc;
    q.bottomRightCorner<2, 2>() = dt * qc;
    return q;
}

PriorResidual gp_prior_residual(const State& from, const State& to, const Mat4& phi, const Mat4& q) {
    return {to - phi * from, q.inverse()};
}

double hinge_cost(double d, double epsilon) {
    return d <= epsilon ? epsilon - d : 0.0;
}

ScalarResidual obstacle_residual(const State& state, const DistanceField& field, size_t time_index,
                                 const RobotType& robot) {
    Vec2 gradient;
    const double d = field.distance(time_index, state.head<2>(), &gradient) - robot.radius;
    ScalarResidual out;
    if (d <= robot.epsilon_safe) {
        out.value = robot.epsilon_safe - d;
        out.jacobian.head<2>() = -gradient.transpose();
    }
    return out;
}

ScalarResidual obstacle_residual(const State& state, const SignedDistanceField& sdf, const RobotType& robot) {
    return obstacle_residual(state, StaticDistanceField(sdf), 0, robot);
}

FixResidual fix_state_residual(const State& state, const State& target) {
    return {state - target, Mat4::Identity()};
}

ScalarResidual velocity_limit_residual(const State& state, double v_max) {
    ScalarResidual out;
    const Vec2 v = state.tail<2>();
    const double speed = v.norm();
    if (speed > v_max) {
        out.value = speed - v_max;
        out.jacobian.tail<2>() = (v / speed).transpose();
    }
    return out;
}

PairwiseResidual pairwise_conflict_residual(const State& self, const State& other, double radius_self,
                                            double radius_other, double epsilon) {
    const Vec2 diff = self.head<2>() - other.head<2>();
    const double dist = diff.norm();
    const Vec2 direction = dist > 0.0 ? Vec2(diff / dist) : Vec2(1.0, 0.0);
    const double clearance = dist - (radius_self + radius_other);
    PairwiseResidual out;
    if (clearance <= epsilon) {
        out.value = epsilon - clearance;
        out.jacobian_self.head<2>() = -direction.transpose();
        out.jacobian_other.head<2>() = direction.transpose();
    }
    return out;
}

double conf_cost(const ProcessRole& role, const DistanceField& field, const RobotType& robot, size_t time_offset) {
    double total = 0.0;
    for (size_t k = 0; k < role.states.size(); ++k) {
        const double d = field.distance(time_offset + k, role.position(k), nullptr) - robot.radius;
        total += hinge_cost(d, robot.epsilon_safe) * role.velocity(k).norm() * role.dt;
    }
    return total;
}

double conf_cost(const ProcessRole& role, const SignedDistanceField& sdf, const RobotType& robot) {
    return conf_cost(role, StaticDistanceField(sdf), robot, 0);
}

FactorKind kind_of(const Factor& factor) {
    return std::visit(
        [](const auto& f) {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, GpPriorFactor>)
                return FactorKind::gp_prior;
            else if constexpr (std::is_same_v<T, ObstacleFactor>)
                return FactorKind::obstacle;
            else if constexpr (std::is_same_v<T, FixStateFactor>)
                return FactorKind::fix_state;
            else if constexpr (std::is_same_v<T, VelocityLimitFactor>)
                return FactorKind::velocity_limit;
            else
                return FactorKind::pairwise_conflict;
        },
        factor);
}

void FactorGraph::validate() const {
    if (num_states < 2)
        throw InputError("factor graph needs at least two states");
    if (!(dt > 0.0))
        throw InputError("factor graph needs a positive dt");
    robot.validate();
    for (const Factor& f : factors) {
        const bool ok = std::visit(
            [&](const auto& x) {
                using T = std::decay_t<decltype(x)>;
                if constexpr (std::is_same_v<T, GpPriorFactor>)
                    return x.k + 1 < num_states;
                else
                    return x.k < num_states;
            },
            f);
        if (!ok)
            throw InputError("factor references a state outside the trajectory");
        if (kind_of(f) == FactorKind::obstacle && field == nullptr)
            throw InputError("obstacle factors need a distance field");
    }
}

FactorGraph make_trajectory_graph(size_t num_states, double dt, const Eigen::Matrix2d& qc, const RobotType& robot,
                                  const DistanceField& field, const State& start, const State& goal,
                                  const ProblemOptions& options) {
    FactorGraph g;
    g.num_states = num_states;
    g.dt = dt;
    g.qc = qc;
    g.robot = robot;
    g.field = &field;
    g.factors.reserve(3 * num_states + 2);
    for (size_t k = 0; k + 1 < num_states; ++k)
        g.factors.emplace_back(GpPriorFactor{k});
    for (size_t k = 0; k < num_states; ++k)
        g.factors.emplace_back(ObstacleFactor{k});
    g.factors.emplace_back(FixStateFactor{0, start, options.sigma_fix});
    g.factors.emplace_back(FixStateFactor{num_states - 1, goal, options.sigma_fix});
    if (options.velocity_limit)
        for (size_t k = 0; k < num_states; ++k)
            g.factors.emplace_back(VelocityLimitFactor{k, robot.v_max, options.sigma_velocity});
    return g;
}

namespace {

// Whitening for the prior: W = L^-1 with Q = L L^T, so |W r|^2 = r^T Q^-1 r.
Mat4 prior_whitener(double dt, const Eigen::Matrix2d& qc) {
    const Mat4 q = process_noise(dt, qc);
    const Eigen::LLT<Mat4> llt(q);
    if (llt.info() != Eigen::Success)
        throw InputError("process noise is not positive definite (check qc)");
    return llt.matrixL().solve(Mat4::Identity());
}

size_t residual_rows(const Factor& f) {
    switch (kind_of(f)) {
    case FactorKind::gp_prior:
    case FactorKind::fix_state:
        return 4;
    default:
        return 1;
    }
}

template <typename Emit>
void for_each_weighted(const FactorGraph& graph, const std::vector<State>& theta, const Mat4& phi, const Mat4& whitener,
                       bool with_jacobians, Emit&& emit) {
    const double sigma_obs = graph.robot.sigma_obs;
    for (const Factor& factor : graph.factors) {
        std::visit(
            [&](const auto& f) {
                using T = std::decay_t<decltype(f)>;
                if constexpr (std::is_same_v<T, GpPriorFactor>) {
                    const State r = whitener * (theta[f.k + 1] - phi * theta[f.k]);
                    if (with_jacobians)
                        emit.block(r, f.k, Mat4(-whitener * phi), f.k + 1, whitener);
                    else
                        emit.value(r);
                } else if constexpr (std::is_same_v<T, ObstacleFactor>) {
                    const ScalarResidual res =
                        obstacle_residual(theta[f.k], *graph.field, graph.time_offset + f.k, graph.robot);
                    emit.scalar(res.value / sigma_obs, f.k, Row4(res.jacobian / sigma_obs));
                } else if constexpr (std::is_same_v<T, FixStateFactor>) {
                    const State r = (theta[f.k] - f.target) / f.sigma;
                    if (with_jacobians)
                        emit.unary(r, f.k, Mat4(Mat4::Identity() / f.sigma));
                    else
                        emit.value(r);
                } else if constexpr (std::is_same_v<T, VelocityLimitFactor>) {
                    const ScalarResidual res = velocity_limit_residual(theta[f.k], f.v_max);
                    emit.scalar(res.value / f.sigma, f.k, Row4(res.jacobian / f.sigma));
                } else {
                    const PairwiseResidual res = pairwise_conflict_residual(
                        theta[f.k], f.other, graph.robot.radius, f.other_radius, graph.robot.epsilon_safe);
                    emit.scalar(res.value / f.sigma, f.k, Row4(res.jacobian_self / f.sigma));
                }
            },
            factor);
    }
}

} // namespace

Linearization linearize(const FactorGraph& graph, const std::vector<State>& theta) {
    if (theta.size() != graph.num_states)
        throw InputError("trajectory length does not match the factor graph");
    size_t rows = 0;
    for (const Factor& f : graph.factors)
        rows += residual_rows(f);
    const Mat4 phi = transition(graph.dt);
    const Mat4 whitener = prior_whitener(graph.dt, graph.qc);

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(rows * 8);
    Eigen::VectorXd b(static_cast<Eigen::Index>(rows));
    struct Emitter {
        std::vector<Eigen::Triplet<double>>& triplets;
        Eigen::VectorXd& b;
        Eigen::Index row = 0;

        void put(const Mat4& j, size_t state, Eigen::Index r0, int nrows) {
            for (int i = 0; i < nrows; ++i)
                for (int c = 0; c < 4; ++c)
                    if (j(i, c) != 0.0)
                        triplets.emplace_back(r0 + i, static_cast<Eigen::Index>(4 * state + c), j(i, c));
        }
        void block(const State& r, size_t k0, const Mat4& j0, size_t k1, const Mat4& j1) {
            put(j0, k0, row, 4);
            put(j1, k1, row, 4);
            b.segment<4>(row) = -r;
            row += 4;
        }
        void unary(const State& r, size_t k, const Mat4& j) {
            put(j, k, row, 4);
            b.segment<4>(row) = -r;
            row += 4;
        }
        void scalar(double r, size_t k, const Row4& j) {
            for (int c = 0; c < 4; ++c)
                if (j(c) != 0.0)
                    triplets.emplace_back(row, static_cast<Eigen::Index>(4 * k + c), j(c));
            b(row) = -r;
            ++row;
        }
        void value(const State&) {}
    } emitter{triplets, b};
    for_each_weighted(graph, theta, phi, whitener, true, emitter);

    Linearization lin;
    lin.A.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(4 * graph.num_states));
    lin.A.setFromTriplets(triplets.begin(), triplets.end());
    lin.b = std::move(b);
    return lin;
}

double total_error(const FactorGraph& graph, const std::vector<State>& theta) {
    if (theta.size() != graph.num_states)
        throw InputError("trajectory length does not match the factor graph");
    const Mat4 phi = transition(graph.dt);
    const Mat4 whitener = prior_whitener(graph.dt, graph.qc);
    struct Accumulator {
        double sum = 0.0;
        void block(const State& r, size_t, const Mat4&, size_t, const Mat4&) { sum += r.squaredNorm(); }
        void unary(const State& r, size_t, const Mat4&) { sum += r.squaredNorm(); }
        void scalar(double r, size_t, const Row4&) { sum += r * r; }
        void value(const State& r) { sum += r.squaredNorm(); }
    } acc;
    for_each_weighted(graph, theta, phi, whitener, false, acc);
    return 0.5 * acc.sum;
}

double prior_cost(const std::vector<State>& theta, double dt, const Eigen::Matrix2d& qc) {
    if (theta.size() < 2)
        return 0.0;
    const Mat4 phi = transition(dt);
    const Mat4 whitener = prior_whitener(dt, qc);
    double sum = 0.0;
    for (size_t k = 0; k + 1 < theta.size(); ++k)
        sum += (whitener * (theta[k + 1] - phi * theta[k])).squaredNorm();
    return 0.5 * sum;
}

double qualification_cost(const ProcessRole& role, const Eigen::Matrix2d& qc, double lambda, const DistanceField& field,
                          const RobotType& robot, size_t time_offset) {
    return lambda * prior_cost(role.states, role.dt, qc) + conf_cost(role, field, robot, time_offset);
}

std::vector<State> constant_velocity_rollout(const State& start, size_t num_states, double dt) {
    std::vector<State> out;
    out.reserve(num_states);
    const Mat4 phi = transition(dt);
    State s = start;
    for (size_t k = 0; k < num_states; ++k) {
        out.push_back(s);
        s = phi * s;
    }
    return out;
}

} // namespace role_engine
