#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/SparseCholesky>

#include "role_engine/gp.hpp"
#include "role_engine/log.hpp"

namespace role_engine {

void SolverParams::validate() const {
    if (max_iterations < 1)
        throw InputError("solver needs at least one iteration");
    if (!(rel_tol > 0.0) || !(step_tol >= 0.0))
        throw InputError("solver tolerances must be positive");
    if (!(lambda_init > 0.0) || !(lambda_up > 1.0) || !(lambda_down > 1.0) || !(lambda_max >= lambda_init))
        throw InputError("solver damping schedule is invalid");
}

bool convergence(double step_norm, int iteration, double err, double prev_err, const SolverParams& params) {
    if (iteration >= params.max_iterations)
        return true;
    if (step_norm < params.step_tol)
        return true;
    const double decrease = prev_err - err;
    if (decrease < 0.0)
        return false;
    return decrease / std::max(prev_err, 1e-300) < params.rel_tol;
}

namespace {

std::vector<State> apply_step(const std::vector<State>& theta, const Eigen::VectorXd& delta) {
    std::vector<State> out(theta.size());
    for (size_t k = 0; k < theta.size(); ++k)
        out[k] = theta[k] + delta.segment<4>(static_cast<Eigen::Index>(4 * k));
    return out;
}

} // namespace

SolveResult solve_lm(const FactorGraph& graph, const ProcessRole& init, const SolverParams& params, double lambda) {
    graph.validate();
    params.validate();
    if (init.states.size() != graph.num_states)
        throw InputError("initial role length does not match the factor graph");

    std::vector<State> theta = init.states;
    double err = total_error(graph, theta);
    if (!std::isfinite(err)) {
        std::ostringstream msg;
        msg << "non-finite initial error for agent '" << init.agent_id << "' role '" << init.role_id << "'";
        throw SolverFailure(msg.str());
    }

    SolveResult result;
    result.initial_error = err;
    result.error_history.push_back(err);

    const auto n = static_cast<Eigen::Index>(4 * graph.num_states);
    Eigen::SparseMatrix<double> identity(n, n);
    identity.setIdentity();
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
    double damping = params.lambda_init;
    int iteration = 0;

    while (iteration < params.max_iterations && err > 0.0) {
        const Linearization lin = linearize(graph, theta);
        const Eigen::SparseMatrix<double> at = lin.A.transpose();
        const Eigen::SparseMatrix<double> h = at * lin.A;
        const Eigen::VectorXd g = at * lin.b;
        ++iteration;
        // Hinge activity changes the sparsity pattern, so the symbolic analysis is
        // redone per linearization and shared across damping retries.
        bool analyzed = false;

        bool accepted = false;
        double step_norm = 0.0;
        double new_err = err;
        while (damping <= params.lambda_max) {
            const Eigen::SparseMatrix<double> damped = h + damping * identity;
            if (!analyzed) {
                ldlt.analyzePattern(damped);
                analyzed = true;
            }
            ldlt.factorize(damped);
            if (ldlt.info() == Eigen::Success) {
                const Eigen::VectorXd delta = ldlt.solve(g);
                if (delta.allFinite()) {
                    std::vector<State> trial = apply_step(theta, delta);
                    const double trial_err = total_error(graph, trial);
                    if (std::isfinite(trial_err) && trial_err < err) {
                        theta = std::move(trial);
                        new_err = trial_err;
                        step_norm = delta.norm();
                        accepted = true;
                        damping = std::max(damping / params.lambda_down, 1e-12);
                        break;
                    }
                }
            }
            damping *= params.lambda_up;
        }
        if (!accepted) {
            result.error_history.push_back(err);
            break;
        }
        const double prev_err = err;
        err = new_err;
        result.error_history.push_back(err);
        if (convergence(step_norm, iteration, err, prev_err, params))
            break;
    }

    result.iterations = iteration;
    result.final_error = err;
    result.role = init;
    result.role.states = std::move(theta);
    result.role.dt = graph.dt;
    if (graph.field != nullptr)
        result.role.cost = qualification_cost(result.role, graph.qc, lambda, *graph.field, graph.robot, graph.time_offset);
    else
        result.role.cost = lambda * prior_cost(result.role.states, graph.dt, graph.qc);
    if (!std::isfinite(result.role.cost))
        throw SolverFailure("non-finite qualification cost for agent '" + init.agent_id + "'");
    return result;
}

} // namespace role_engine
