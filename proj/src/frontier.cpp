#include "epicoord/frontier.hpp"

#include <tuple>

namespace epicoord {

FrontierSet extract_frontiers(const BeliefMap& belief) {
  FrontierSet out;
  const GridGeometry& g = belief.grid;
  const int nx = g.nx();
  const int ny = g.ny();
  for (int cy = 0; cy < ny; ++cy) {
    for (int cx = 0; cx < nx; ++cx) {
      const int idx = cy * nx + cx;
      if (belief.cells[idx] != Cell::Free) continue;
      bool frontier = false;
      for (int oy = -1; oy <= 1 && !frontier; ++oy) {
        for (int ox = -1; ox <= 1; ++ox) {
          if (ox == 0 && oy == 0) continue;
          const int x = cx + ox;
          const int y = cy + oy;
          if (x < 0 || y < 0 || x >= nx || y >= ny) continue;
          if (belief.cells[y * nx + x] == Cell::Unknown) {
            frontier = true;
            break;
          }
        }
      }
      if (frontier) out.cells.push_back({idx, g.center(idx)});
    }
  }
  return out;
}

namespace {

// (score, squared distance, index) ordered lexicographically.
using Key = std::tuple<double, double, int>;

double bearing_score(Vec2 self, Vec2 target, Vec2 direction) {
  const auto u = unit_direction(self, target);
  return u ? u->dot(direction) : 0.0;
}

}  // namespace

std::optional<FrontierCell> argmin_bearing(const FrontierSet& frontiers, Vec2 self, Vec2 direction) {
  std::optional<FrontierCell> best;
  Key best_key{};
  for (const auto& f : frontiers.cells) {
    const Key key{bearing_score(self, f.center, direction), (f.center - self).squared_norm(), f.index};
    if (!best || key < best_key) {
      best = f;
      best_key = key;
    }
  }
  return best;
}

std::optional<FrontierCell> nearest_frontier(const FrontierSet& frontiers, Vec2 self) {
  std::optional<FrontierCell> best;
  std::tuple<double, int> best_key{};
  for (const auto& f : frontiers.cells) {
    const std::tuple<double, int> key{(f.center - self).squared_norm(), f.index};
    if (!best || key < best_key) {
      best = f;
      best_key = key;
    }
  }
  return best;
}

std::optional<FrontierCell> select_frontier(const FrontierSet& frontiers, const Pose& self,
                                            std::span<const Vec2> peer_estimates) {
  if (frontiers.empty()) return std::nullopt;
  const Vec2 me = self.position();
  Vec2 mean{};
  for (const Vec2& p : peer_estimates) mean = mean + (p - me);
  if (!peer_estimates.empty()) mean = (1.0 / static_cast<double>(peer_estimates.size())) * mean;
  const auto dir = unit_direction({0.0, 0.0}, mean);
  if (!dir) return nearest_frontier(frontiers, me);
  return argmin_bearing(frontiers, me, *dir);
}

std::optional<FrontierCell> select_repulsive_frontier(const FrontierSet& frontiers, const Pose& self,
                                                      Vec2 repel_from,
                                                      std::span<const Vec2> fallback_peers) {
  if (frontiers.empty()) return std::nullopt;
  const auto dir = unit_direction(self.position(), repel_from);
  if (!dir) return select_frontier(frontiers, self, fallback_peers);
  return argmin_bearing(frontiers, self.position(), *dir);
}

}  // namespace epicoord
