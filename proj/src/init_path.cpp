#include <algorithm>
#include <cmath>

#include "role_engine/envmap.hpp"

namespace role_engine {

InitialPath make_init_path(const std::vector<Vec2>& nodes, int steps, double total_time) {
    if (nodes.empty())
        throw InputError("initial path needs at least a source and a destination");
    if (steps < 1)
        throw InputError("initial path needs at least one step");
    if (!(total_time > 0.0))
        throw InputError("initial path total time must be positive");

    InitialPath path;
    path.waypoints = nodes;
    path.dt = total_time / steps;

    std::vector<double> cumulative{0.0};
    for (size_t i = 1; i < nodes.size(); ++i)
        cumulative.push_back(cumulative.back() + (nodes[i] - nodes[i - 1]).norm());
    const double total = cumulative.back();

    std::vector<Vec2> positions(static_cast<size_t>(steps) + 1, nodes.front());
    if (total > 0.0) {
        size_t seg = 0;
        for (int k = 0; k <= steps; ++k) {
            const double s = total * k / steps;
            while (seg + 2 < cumulative.size() && cumulative[seg + 1] < s)
                ++seg;
            const double len = cumulative[seg + 1] - cumulative[seg];
            const double t = len > 0.0 ? std::clamp((s - cumulative[seg]) / len, 0.0, 1.0) : 0.0;
            positions[static_cast<size_t>(k)] = nodes[seg] + t * (nodes[seg + 1] - nodes[seg]);
        }
        positions.back() = nodes.back();
    }

    path.states.resize(positions.size());
    for (size_t k = 0; k < positions.size(); ++k) {
        Vec2 velocity = Vec2::Zero();
        if (total > 0.0) {
            if (k == 0)
                velocity = (positions[1] - positions[0]) / path.dt;
            else if (k + 1 == positions.size())
                velocity = (positions[k] - positions[k - 1]) / path.dt;
            else
                velocity = (positions[k + 1] - positions[k - 1]) / (2.0 * path.dt);
        }
        path.states[k] << positions[k], velocity;
    }
    return path;
}

} // namespace role_engine
