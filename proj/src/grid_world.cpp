#include "epicoord/grid_world.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "epicoord/error.hpp"

namespace epicoord {

GridGeometry::GridGeometry(double width_m, double height_m, double resolution)
    : width_m_(width_m), height_m_(height_m), resolution_(resolution) {
  if (!(width_m > 0.0) || !(height_m > 0.0) || !(resolution > 0.0)) {
    throw ConfigError("grid: width, height and resolution must be positive");
  }
  nx_ = static_cast<int>(std::ceil(width_m / resolution - 1e-9));
  ny_ = static_cast<int>(std::ceil(height_m / resolution - 1e-9));
}

bool GridGeometry::contains(Vec2 p) const {
  return p.x >= 0.0 && p.y >= 0.0 && p.x < width_m_ && p.y < height_m_;
}

CellCoord GridGeometry::coord_of(Vec2 p) const {
  return {static_cast<int>(std::floor(p.x / resolution_)),
          static_cast<int>(std::floor(p.y / resolution_))};
}

std::optional<int> GridGeometry::index_of(Vec2 p) const {
  if (!contains(p)) return std::nullopt;
  const CellCoord c = coord_of(p);
  if (!in_bounds(c)) return std::nullopt;
  return index(c);
}

Vec2 GridGeometry::center(int idx) const {
  const CellCoord c = coord(idx);
  return {(c.cx + 0.5) * resolution_, (c.cy + 0.5) * resolution_};
}

WorldMap WorldMap::open(double width_m, double height_m, double resolution, Vec2 task,
                        double completion_radius) {
  WorldMap w;
  w.grid = GridGeometry(width_m, height_m, resolution);
  w.cells.assign(w.grid.size(), Cell::Free);
  w.task_position = task;
  w.completion_radius = completion_radius;
  return w;
}

void WorldMap::add_square_obstacle(Vec2 center, double side) {
  const double h = side / 2.0;
  for (int i = 0; i < static_cast<int>(cells.size()); ++i) {
    const Vec2 c = grid.center(i);
    if (std::abs(c.x - center.x) <= h && std::abs(c.y - center.y) <= h) cells[i] = Cell::Occupied;
  }
}

bool WorldMap::is_free(Vec2 p) const {
  const auto idx = grid.index_of(p);
  return idx && cells[*idx] == Cell::Free;
}

void WorldMap::validate() const {
  if (cells.size() != grid.size()) throw ConfigError("world: cell count does not match grid");
  if (!(completion_radius > 0.0)) throw ConfigError("world: completion_radius must be positive");
  if (!is_free(task_position)) throw ConfigError("world: task must lie in a free cell");
}

BeliefMap BeliefMap::unknown(const GridGeometry& grid) {
  BeliefMap b;
  b.grid = grid;
  b.cells.assign(grid.size(), Cell::Unknown);
  return b;
}

std::size_t BeliefMap::unknown_count() const {
  return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), Cell::Unknown));
}

bool line_of_sight(const GridGeometry& grid, std::span<const Cell> cells, Vec2 a, Vec2 b) {
  if (std::tie(b.x, b.y) < std::tie(a.x, a.y)) std::swap(a, b);
  const CellCoord ca = grid.coord_of(a);
  const CellCoord cb = grid.coord_of(b);
  bool clear = true;
  traverse_cells(grid, a, b, [&](CellCoord c) {
    if (c == ca || c == cb) return true;
    if (!grid.in_bounds(c) || cells[grid.index(c)] == Cell::Occupied) {
      clear = false;
      return false;
    }
    return true;
  });
  return clear;
}

namespace {

// Per-thread visit stamps make deduplication O(revealed) instead of a sort.
struct StampBuffer {
  std::vector<std::uint32_t> stamp;
  std::uint32_t generation = 0;

  void begin(std::size_t n) {
    if (stamp.size() != n) {
      stamp.assign(n, 0);
      generation = 0;
    }
    if (++generation == 0) {
      std::fill(stamp.begin(), stamp.end(), 0);
      generation = 1;
    }
  }
  bool first_visit(int idx) {
    if (stamp[idx] == generation) return false;
    stamp[idx] = generation;
    return true;
  }
};

}  // namespace

std::vector<RevealedCell> cast_rays(const GridGeometry& grid, std::span<const Cell> truth,
                                    Vec2 origin, double range, int n_rays) {
  thread_local StampBuffer stamps;
  stamps.begin(grid.size());
  std::vector<RevealedCell> out;
  const double range_sq = range * range;
  const double step = 2.0 * std::numbers::pi / std::max(1, n_rays);
  for (int r = 0; r < n_rays; ++r) {
    const double a = r * step;
    const Vec2 end{origin.x + range * std::cos(a), origin.y + range * std::sin(a)};
    traverse_cells(grid, origin, end, [&](CellCoord c) {
      if (!grid.in_bounds(c)) return false;
      const int idx = grid.index(c);
      if ((grid.center(idx) - origin).squared_norm() > range_sq) return false;
      const Cell state = truth[idx];
      if (stamps.first_visit(idx)) out.push_back({idx, state});
      return state != Cell::Occupied;
    });
  }
  return out;
}

SensorScan sense(const WorldMap& world, std::span<const Pose> true_poses, int self_id,
                 double sensing_range, int n_rays) {
  if (self_id < 0 || self_id >= static_cast<int>(true_poses.size())) {
    throw InvalidStateError("sense: unknown robot id");
  }
  const Pose& self = true_poses[self_id];
  if (!world.grid.contains(self.position())) {
    throw InvalidStateError("sense: pose outside world bounds");
  }
  SensorScan scan;
  scan.origin = self;
  scan.revealed = cast_rays(world.grid, world.cells, self.position(), sensing_range, n_rays);
  for (int j = 0; j < static_cast<int>(true_poses.size()); ++j) {
    if (j == self_id) continue;
    const Vec2 p = true_poses[j].position();
    if (distance(self.position(), p) <= sensing_range &&
        line_of_sight(world.grid, world.cells, self.position(), p)) {
      scan.robots_seen.push_back({j, true_poses[j]});
    }
  }
  if (task_in_range(self, world.task_position, sensing_range) &&
      line_of_sight(world.grid, world.cells, self.position(), world.task_position)) {
    scan.task_seen = world.task_position;
  }
  return scan;
}

void integrate_cells(BeliefMap& belief, std::span<const RevealedCell> revealed) {
  for (const auto& rc : revealed) {
    Cell& c = belief.cells[rc.index];
    if (c == Cell::Unknown) c = rc.state;
  }
}

void integrate_scan_in_place(BeliefMap& belief, const SensorScan& scan) {
  integrate_cells(belief, scan.revealed);
  if (scan.task_seen) {
    belief.task_known = true;
    belief.task_position = scan.task_seen;
  }
}

BeliefMap integrate_scan(BeliefMap belief, const SensorScan& scan) {
  integrate_scan_in_place(belief, scan);
  return belief;
}

bool task_in_range(const Pose& pose, Vec2 task, double sensing_range) {
  return distance(pose.position(), task) <= sensing_range;
}

std::string to_pgm(const GridGeometry& grid, std::span<const Cell> cells) {
  std::ostringstream os;
  os << "P2\n" << grid.nx() << ' ' << grid.ny() << "\n255\n";
  for (int cy = grid.ny() - 1; cy >= 0; --cy) {
    for (int cx = 0; cx < grid.nx(); ++cx) {
      const Cell c = cells[grid.index({cx, cy})];
      os << (c == Cell::Free ? 255 : c == Cell::Occupied ? 0 : 128);
      os << (cx + 1 == grid.nx() ? '\n' : ' ');
    }
  }
  return os.str();
}

}  // namespace epicoord
