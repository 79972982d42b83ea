#include "epicoord/navigation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <tuple>

namespace epicoord {

std::optional<std::vector<Vec2>> plan_path(const BeliefMap& map, Vec2 start, Vec2 goal) {
  const GridGeometry& g = map.grid;
  const auto s = g.index_of(start);
  const auto t = g.index_of(goal);
  if (!s || !t) return std::nullopt;
  if (map.cells[*t] == Cell::Occupied) return std::nullopt;
  if (*s == *t) return std::vector<Vec2>{goal};

  auto blocked = [&](CellCoord c) { return !g.in_bounds(c) || map.cells[g.index(c)] == Cell::Occupied; };
  auto near_obstacle = [&](CellCoord c) {
    for (int oy = -1; oy <= 1; ++oy) {
      for (int ox = -1; ox <= 1; ++ox) {
        const CellCoord n{c.cx + ox, c.cy + oy};
        if (g.in_bounds(n) && map.cells[g.index(n)] == Cell::Occupied) return true;
      }
    }
    return false;
  };

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> cost(g.size(), inf);
  std::vector<int> parent(g.size(), -1);
  using Item = std::tuple<double, int>;  // (f, index); index breaks ties deterministically
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  const CellCoord tc = g.coord(*t);
  auto h = [&](CellCoord c) { return std::hypot(c.cx - tc.cx, c.cy - tc.cy) * g.resolution(); };
  cost[*s] = 0.0;
  open.emplace(h(g.coord(*s)), *s);
  while (!open.empty()) {
    const auto [f, idx] = open.top();
    open.pop();
    const CellCoord c = g.coord(idx);
    if (f > cost[idx] + h(c) + 1e-9) continue;
    if (idx == *t) break;
    for (int oy = -1; oy <= 1; ++oy) {
      for (int ox = -1; ox <= 1; ++ox) {
        if (!ox && !oy) continue;
        const CellCoord n{c.cx + ox, c.cy + oy};
        if (blocked(n)) continue;
        if (ox && oy && (blocked({c.cx + ox, c.cy}) || blocked({c.cx, c.cy + oy}))) continue;
        const int ni = g.index(n);
        const double step = ((ox && oy) ? std::sqrt(2.0) : 1.0) * g.resolution() + (near_obstacle(n) ? 0.5 : 0.0);
        if (cost[idx] + step < cost[ni]) {
          cost[ni] = cost[idx] + step;
          parent[ni] = idx;
          open.emplace(cost[ni] + h(n), ni);
        }
      }
    }
  }
  if (parent[*t] < 0) return std::nullopt;
  std::vector<Vec2> path;
  for (int v = parent[*t]; v != *s; v = parent[v]) path.push_back(g.center(v));
  std::reverse(path.begin(), path.end());
  path.push_back(goal);
  return path;
}

}  // namespace epicoord
