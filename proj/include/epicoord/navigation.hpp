#pragma once

#include <optional>
#include <vector>

#include "epicoord/grid_world.hpp"

namespace epicoord {

/// 8-connected A* over cells not known to be Occupied (Unknown counts as passable), without
/// cutting corners. Cells next to obstacles cost a little more. Returns the waypoints after
/// the start cell, ending with `goal` itself; nullopt when no route exists.
std::optional<std::vector<Vec2>> plan_path(const BeliefMap& map, Vec2 start, Vec2 goal);

}  // namespace epicoord
