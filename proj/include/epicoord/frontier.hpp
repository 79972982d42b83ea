#pragma once

#include <optional>
#include <span>
#include <vector>

#include "epicoord/geometry.hpp"
#include "epicoord/grid_world.hpp"

namespace epicoord {

struct FrontierCell {
  int index = 0;
  Vec2 center;
  friend bool operator==(const FrontierCell&, const FrontierCell&) = default;
};

/// Free cells with at least one Unknown 8-neighbor, in ascending index order.
struct FrontierSet {
  std::vector<FrontierCell> cells;
  bool empty() const { return cells.empty(); }
};

FrontierSet extract_frontiers(const BeliefMap& belief);

/// Dispersion rule: the frontier whose bearing from self is most opposite the mean
/// displacement to the peer estimates. Falls back to the nearest frontier when the mean
/// displacement vanishes. Ties resolve by distance to self, then by lower cell index.
/// Returns nullopt when the set is empty (exploration complete).
std::optional<FrontierCell> select_frontier(const FrontierSet& frontiers, const Pose& self,
                                            std::span<const Vec2> peer_estimates);

/// Repulsive rule: the frontier whose bearing is most opposite `repel_from`. When
/// `repel_from` coincides with self, falls back to select_frontier over `fallback_peers`.
std::optional<FrontierCell> select_repulsive_frontier(const FrontierSet& frontiers, const Pose& self,
                                                      Vec2 repel_from,
                                                      std::span<const Vec2> fallback_peers = {});

/// Shared argmin of unit(x(f) - self) . direction with the module's tie-break order.
/// A frontier at the robot's own position scores 0.
std::optional<FrontierCell> argmin_bearing(const FrontierSet& frontiers, Vec2 self, Vec2 direction);
std::optional<FrontierCell> nearest_frontier(const FrontierSet& frontiers, Vec2 self);

}  // namespace epicoord
