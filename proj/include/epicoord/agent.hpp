#pragma once

#include <span>
#include <vector>

#include "epicoord/behavior.hpp"
#include "epicoord/dynamics.hpp"
#include "epicoord/frontier.hpp"
#include "epicoord/grid_world.hpp"

namespace epicoord {

/// Knobs of the exploration model shared by real robots and every predicted robot.
struct ExplorationParams {
  double dt = 0.1;
  int scan_period_ticks = 10;     // map updates happen on ticks divisible by this
  int n_rays = 360;
  double reach_tolerance = 0.5;   // m; a frontier this close counts as reached
  double repulse_duration_s = 15.0;
  double task_stop_radius = 0.5;  // m; CompleteTask holds once this close to the task
  TrackingGains gains;
};

/// Exploration-level state of one robot, real or believed.
struct AgentState {
  int id = 0;
  Pose pose;
  BeliefMap map;
  BehaviorPrimitive behavior;
  int target_cell = -1;  // current frontier cell, -1 when none
  bool exploration_complete = false;
  bool needs_target = true;    // behavior changed since the last selection
  std::vector<int> blacklist;  // frontier cells abandoned as unreachable
};

/// Everything in AgentState except the map; enough to rebuild the map from a pose history.
struct AgentSnapshot {
  Pose pose;
  BehaviorPrimitive behavior;
  int target_cell = -1;
  bool task_known = false;
  bool exploration_complete = false;
  friend bool operator==(const AgentSnapshot&, const AgentSnapshot&) = default;
};

AgentSnapshot snapshot(const AgentState& a);

inline bool is_scan_tick(int tick, const ExplorationParams& p) { return tick % p.scan_period_ticks == 0; }

/// Picks a new frontier for the current behavior (dispersion for Explore, repulsive for
/// ModifiedExplore). Frontiers within reach_tolerance or blacklisted are skipped.
void select_target(AgentState& a, std::span<const Vec2> peers, const ExplorationParams& p);

/// Called after the map update of a scan tick (or whenever the behavior changed):
/// expires ModifiedExplore, drops reached/stale frontiers and reselects.
void refresh_target(AgentState& a, double time_s, std::span<const Vec2> peers, const ExplorationParams& p);

/// Per-tick decision step shared by real and predicted robots: refreshes the target on
/// scan ticks or right after a behavior change.
void update_decisions(AgentState& a, int tick, std::span<const Vec2> peers, const ExplorationParams& p);

/// Switches behavior and forces a target reselection on the next decision step.
void set_behavior(AgentState& a, const BehaviorPrimitive& b);

/// Marks the task known and switches to CompleteTask.
void adopt_task(AgentState& a, Vec2 task);

/// Point the agent is currently driving to, if any.
std::optional<Vec2> goal_point(const AgentState& a, const ExplorationParams& p);

/// Turn-then-drive toward goal_point at `speed`; zero control when idle.
ControlInput exploration_control(const AgentState& a, const RobotSpec& spec, const ExplorationParams& p,
                                 double speed);

}  // namespace epicoord
