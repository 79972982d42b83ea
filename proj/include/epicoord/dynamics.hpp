#pragma once

#include <functional>
#include <vector>

#include "epicoord/geometry.hpp"

namespace epicoord {

struct ControlInput {
  double v = 0.0;      // m/s
  double omega = 0.0;  // rad/s
  friend bool operator==(const ControlInput&, const ControlInput&) = default;
};

struct RobotSpec {
  int id = 0;
  double v_nominal = 1.0;
  double v_max_burst = 1.25;
  double omega_max = 1.0;
  double sensing_range = 20.0;

  /// Throws ConfigError when an invariant is broken.
  void validate() const;
};

/// Unicycle update over one interval.
Pose step(const Pose& pose, const ControlInput& u, double dt);

/// Clamps |v| to v_max_burst and |omega| to omega_max; `clamped` reports whether it bit.
ControlInput clamp_control(const ControlInput& u, const RobotSpec& spec, bool* clamped = nullptr);

struct TrackingGains {
  double heading_tolerance = 0.2;  // rad; rotate in place above this
  double heading_gain = 2.0;       // proportional correction while driving
  double arrive_tolerance = 0.05;  // m
};

/// Turn-then-drive waypoint tracker. Never overshoots the target within one tick.
ControlInput track_waypoint(const Pose& pose, Vec2 target, double speed, double omega_max,
                            double dt, const TrackingGains& gains = {});

using Policy = std::function<ControlInput(const Pose& pose, int tick)>;

Policy hold_position();
Policy waypoint_policy(Vec2 target, double speed, double omega_max, double dt,
                       TrackingGains gains = {});

/// Returns horizon + 1 poses; pose k+1 = step(pose k, policy(pose k, k), dt).
std::vector<Pose> propagate(const Pose& start, const Policy& policy, int horizon, double dt);

/// Straight-line time at v_max plus heading-alignment time at omega_max.
double dubins_time(const Pose& from, Vec2 to, double v_max, double omega_max);

}  // namespace epicoord
