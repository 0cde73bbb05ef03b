#pragma once

#include <string>
#include <vector>

#include "role_engine/engine.hpp"

namespace role_engine {

/// Top-down plan view: obstacles in gray, sources green, destinations blue and one
/// polyline per trajectory. World y grows downward to match the image rows.
std::string render_plan_svg(const OccupancyGrid& grid, const std::vector<Vec2>& sources,
                            const std::vector<Vec2>& destinations, const std::vector<ProcessRole>& roles);

/// Plan view plus one disc per agent animated along its executed positions.
std::string render_trace_svg(const OccupancyGrid& grid, const std::vector<Vec2>& destinations,
                             const SimulationTrace& trace);

/// Grayscale heat map of an SDF: black at the most negative value, white at the largest.
GrayImage sdf_heat_image(const SignedDistanceField& sdf);

} // namespace role_engine
