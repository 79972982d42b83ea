#include "epicoord/agent.hpp"

#include <algorithm>

namespace epicoord {

std::string to_string(const BehaviorPrimitive& b) {
  switch (b.tag) {
    case BehaviorTag::Explore: return "e";
    case BehaviorTag::CompleteTask: return "c";
    case BehaviorTag::Fetch: return "f" + std::to_string(b.robot);
    case BehaviorTag::ModifiedExplore: return "ebar" + std::to_string(b.robot);
  }
  return "?";
}

AgentSnapshot snapshot(const AgentState& a) {
  return {a.pose, a.behavior, a.target_cell, a.map.task_known, a.exploration_complete};
}

namespace {

bool still_frontier(const BeliefMap& m, int idx) {
  if (m.cells[idx] != Cell::Free) return false;
  const CellCoord c = m.grid.coord(idx);
  for (int oy = -1; oy <= 1; ++oy) {
    for (int ox = -1; ox <= 1; ++ox) {
      const CellCoord n{c.cx + ox, c.cy + oy};
      if ((ox || oy) && m.grid.in_bounds(n) && m.cells[m.grid.index(n)] == Cell::Unknown) return true;
    }
  }
  return false;
}

}  // namespace

void select_target(AgentState& a, std::span<const Vec2> peers, const ExplorationParams& p) {
  FrontierSet all = extract_frontiers(a.map);
  FrontierSet usable;
  usable.cells.reserve(all.cells.size());
  const Vec2 me = a.pose.position();
  for (const auto& f : all.cells) {
    if (distance(f.center, me) <= p.reach_tolerance) continue;
    if (std::find(a.blacklist.begin(), a.blacklist.end(), f.index) != a.blacklist.end()) continue;
    usable.cells.push_back(f);
  }
  std::optional<FrontierCell> pick;
  if (a.behavior.tag == BehaviorTag::ModifiedExplore) {
    pick = select_repulsive_frontier(usable, a.pose, a.behavior.repel_point, peers);
  } else {
    pick = select_frontier(usable, a.pose, peers);
  }
  a.target_cell = pick ? pick->index : -1;
  a.exploration_complete = !pick && all.empty();
}

void refresh_target(AgentState& a, double time_s, std::span<const Vec2> peers, const ExplorationParams& p) {
  if (!a.behavior.is_exploring()) return;
  if (a.behavior.tag == BehaviorTag::ModifiedExplore && time_s >= a.behavior.expiry_s) {
    a.behavior = BehaviorPrimitive::explore();
    a.target_cell = -1;
  }
  if (a.target_cell >= 0) {
    const bool reached = distance(a.map.grid.center(a.target_cell), a.pose.position()) <= p.reach_tolerance;
    if (reached && a.behavior.tag == BehaviorTag::ModifiedExplore) a.behavior = BehaviorPrimitive::explore();
    if (reached || !still_frontier(a.map, a.target_cell)) a.target_cell = -1;
  }
  if (a.target_cell < 0) select_target(a, peers, p);
}

void update_decisions(AgentState& a, int tick, std::span<const Vec2> peers, const ExplorationParams& p) {
  if (!is_scan_tick(tick, p) && !a.needs_target) return;
  refresh_target(a, tick * p.dt, peers, p);
  a.needs_target = false;
}

void set_behavior(AgentState& a, const BehaviorPrimitive& b) {
  a.behavior = b;
  a.target_cell = -1;
  a.needs_target = true;
}

void adopt_task(AgentState& a, Vec2 task) {
  a.map.task_known = true;
  a.map.task_position = task;
  set_behavior(a, BehaviorPrimitive::complete_task());
}

std::optional<Vec2> goal_point(const AgentState& a, const ExplorationParams& p) {
  if (a.behavior.tag == BehaviorTag::CompleteTask || a.behavior.tag == BehaviorTag::Fetch) {
    if (!a.map.task_position) return std::nullopt;
    if (distance(*a.map.task_position, a.pose.position()) <= p.task_stop_radius) return std::nullopt;
    return a.map.task_position;
  }
  if (a.target_cell < 0) return std::nullopt;
  return a.map.grid.center(a.target_cell);
}

ControlInput exploration_control(const AgentState& a, const RobotSpec& spec, const ExplorationParams& p,
                                 double speed) {
  const auto goal = goal_point(a, p);
  if (!goal) return {};
  return track_waypoint(a.pose, *goal, speed, spec.omega_max, p.dt, p.gains);
}

}  // namespace epicoord
