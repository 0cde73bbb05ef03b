#include <sstream>

#include "role_engine/assignment.hpp"
#include "role_engine/log.hpp"

namespace role_engine {

QualificationMatrix evaluate_qualifications(const QualificationInput& input) {
    const size_t m = input.agents.size();
    const size_t n = input.roles.size();
    if (input.agent_sdf.size() != m || input.paths.size() != m)
        throw InputError("qualification input needs one SDF and one path row per agent");

    QualificationMatrix out;
    out.q = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n), kInfeasible);
    out.optimized_roles.assign(m, std::vector<std::optional<ProcessRole>>(n));
    out.iterations.assign(m, std::vector<int>(n, 0));
    for (const AgentSpec& a : input.agents)
        out.agent_ids.push_back(a.id);
    for (const RoleSpec& r : input.roles)
        out.role_ids.push_back(r.id);

    for (size_t a = 0; a < m; ++a) {
        if (input.paths[a].size() != n)
            throw InputError("qualification input needs one path per role");
        if (input.agent_sdf[a] == nullptr)
            throw InputError("qualification input is missing an SDF");
        const StaticDistanceField field(*input.agent_sdf[a]);
        for (size_t r = 0; r < n; ++r) {
            const std::optional<InitialPath>& path = input.paths[a][r];
            if (!path)
                continue;
            ProcessRole init;
            init.agent_id = input.agents[a].id;
            init.role_id = input.roles[r].id;
            init.states = path->states;
            init.dt = path->dt;
            try {
                const FactorGraph graph =
                    make_trajectory_graph(init.states.size(), init.dt, input.qc, input.agents[a].robot, field,
                                          init.states.front(), init.states.back(), input.options);
                SolveResult result = solve_lm(graph, init, input.params, input.lambda);
                out.q(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(r)) = result.role.cost;
                out.iterations[a][r] = result.iterations;
                out.optimized_roles[a][r] = std::move(result.role);
            } catch (const SolverFailure& e) {
                std::ostringstream msg;
                msg << "qualification of agent '" << init.agent_id << "' for role '" << init.role_id
                    << "' failed: " << e.what();
                log::warning(msg.str());
            }
        }
    }
    return out;
}

} // namespace role_engine
