#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "epicoord/geometry.hpp"

namespace epicoord {

enum class Cell : std::uint8_t { Unknown = 0, Free = 1, Occupied = 2 };

struct CellCoord {
  int cx = 0;
  int cy = 0;
  friend bool operator==(CellCoord, CellCoord) = default;
};

/// Regular grid over [0, width_m) x [0, height_m); cell (cx, cy) has index cy * nx + cx.
class GridGeometry {
 public:
  GridGeometry() = default;
  GridGeometry(double width_m, double height_m, double resolution);

  double width_m() const { return width_m_; }
  double height_m() const { return height_m_; }
  double resolution() const { return resolution_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  std::size_t size() const { return static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_); }

  bool contains(Vec2 p) const;
  bool in_bounds(CellCoord c) const { return c.cx >= 0 && c.cy >= 0 && c.cx < nx_ && c.cy < ny_; }
  /// Cell containing the point (may be out of bounds).
  CellCoord coord_of(Vec2 p) const;
  std::optional<int> index_of(Vec2 p) const;
  int index(CellCoord c) const { return c.cy * nx_ + c.cx; }
  CellCoord coord(int index) const { return {index % nx_, index / nx_}; }
  Vec2 center(int index) const;

  friend bool operator==(const GridGeometry&, const GridGeometry&) = default;

 private:
  double width_m_ = 0.0;
  double height_m_ = 0.0;
  double resolution_ = 1.0;
  int nx_ = 0;
  int ny_ = 0;
};

/// Ground truth: static obstacles plus the single task.
struct WorldMap {
  GridGeometry grid;
  std::vector<Cell> cells;  // Free or Occupied only
  Vec2 task_position;
  double completion_radius = 1.0;

  static WorldMap open(double width_m, double height_m, double resolution, Vec2 task,
                       double completion_radius);
  /// Marks every cell whose center lies inside the axis-aligned square as Occupied.
  void add_square_obstacle(Vec2 center, double side);
  bool is_free(Vec2 p) const;
  /// Throws ConfigError if an invariant is broken.
  void validate() const;
};

/// One robot's (or believed robot's) occupancy and task knowledge.
struct BeliefMap {
  GridGeometry grid;
  std::vector<Cell> cells;
  bool task_known = false;
  std::optional<Vec2> task_position;

  static BeliefMap unknown(const GridGeometry& grid);
  std::size_t unknown_count() const;
  friend bool operator==(const BeliefMap&, const BeliefMap&) = default;
};

struct RevealedCell {
  int index = 0;
  Cell state = Cell::Unknown;
  friend bool operator==(RevealedCell, RevealedCell) = default;
};

struct SeenRobot {
  int id = 0;
  Pose pose;
};

struct SensorScan {
  Pose origin;
  std::vector<RevealedCell> revealed;
  std::vector<SeenRobot> robots_seen;
  std::optional<Vec2> task_seen;
};

/// Walks every grid cell crossed by the segment a -> b (Amanatides-Woo traversal).
/// `visit(CellCoord)` returns false to stop early.
template <class Visit>
void traverse_cells(const GridGeometry& grid, Vec2 a, Vec2 b, Visit&& visit);

/// True iff no Occupied cell lies strictly between the cells of a and b.
/// Endpoints are canonically ordered so the test is symmetric.
bool line_of_sight(const GridGeometry& grid, std::span<const Cell> cells, Vec2 a, Vec2 b);

/// Casts `n_rays` equally spaced rays against `truth`; each ray stops at the first
/// Occupied cell (which is revealed) or at `range`. Cells are deduplicated.
std::vector<RevealedCell> cast_rays(const GridGeometry& grid, std::span<const Cell> truth,
                                    Vec2 origin, double range, int n_rays);

/// Lidar model: revealed cells, peers in range with line of sight, the task if visible.
SensorScan sense(const WorldMap& world, std::span<const Pose> true_poses, int self_id,
                 double sensing_range, int n_rays);

BeliefMap integrate_scan(BeliefMap belief, const SensorScan& scan);
void integrate_scan_in_place(BeliefMap& belief, const SensorScan& scan);
/// Writes revealed cells only where the belief is still Unknown.
void integrate_cells(BeliefMap& belief, std::span<const RevealedCell> revealed);

bool task_in_range(const Pose& pose, Vec2 task, double sensing_range);

/// Plain-text PGM (P2): Unknown=128, Free=255, Occupied=0, row 0 at the top.
std::string to_pgm(const GridGeometry& grid, std::span<const Cell> cells);

// ---------------------------------------------------------------------------

template <class Visit>
void traverse_cells(const GridGeometry& grid, Vec2 a, Vec2 b, Visit&& visit) {
  const double res = grid.resolution();
  CellCoord c = grid.coord_of(a);
  const CellCoord end = grid.coord_of(b);
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const int step_x = dx > 0 ? 1 : (dx < 0 ? -1 : 0);
  const int step_y = dy > 0 ? 1 : (dy < 0 ? -1 : 0);
  constexpr double kInf = 1e300;
  double t_max_x = step_x != 0 ? ((step_x > 0 ? (c.cx + 1) * res : c.cx * res) - a.x) / dx : kInf;
  double t_max_y = step_y != 0 ? ((step_y > 0 ? (c.cy + 1) * res : c.cy * res) - a.y) / dy : kInf;
  const double t_delta_x = step_x != 0 ? res / std::abs(dx) : kInf;
  const double t_delta_y = step_y != 0 ? res / std::abs(dy) : kInf;
  const int n = std::abs(end.cx - c.cx) + std::abs(end.cy - c.cy);
  for (int i = 0; i <= n; ++i) {
    if (!visit(c)) return;
    if (i == n) break;
    const bool move_x = step_x != 0 && (step_y == 0 || t_max_x <= t_max_y) && c.cx != end.cx;
    if (move_x || c.cy == end.cy) {
      c.cx += step_x;
      t_max_x += t_delta_x;
    } else {
      c.cy += step_y;
      t_max_y += t_delta_y;
    }
  }
}

}  // namespace epicoord
