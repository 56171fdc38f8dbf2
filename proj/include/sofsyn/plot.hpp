#pragma once

#include "sofsyn/simulate.hpp"

#include <string>

namespace sofsyn {

/// Minimal SVG 1.1 line chart of the state trajectories: axes, tick labels
/// and one polyline per state component.
void write_trajectory_svg(const Trajectory& trajectory, const std::string& path);

}  // namespace sofsyn
