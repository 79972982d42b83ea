#include "epicoord/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "epicoord/error.hpp"

namespace epicoord {

void RobotSpec::validate() const {
  if (!(v_nominal > 0.0) || !(v_nominal <= v_max_burst)) {
    throw ConfigError("robot " + std::to_string(id) + ": need 0 < v_nominal <= v_max_burst");
  }
  if (!(omega_max > 0.0)) throw ConfigError("robot " + std::to_string(id) + ": omega_max must be positive");
  if (!(sensing_range > 0.0)) {
    throw ConfigError("robot " + std::to_string(id) + ": sensing_range must be positive");
  }
}

Pose step(const Pose& pose, const ControlInput& u, double dt) {
  return {pose.x + u.v * std::cos(pose.theta) * dt, pose.y + u.v * std::sin(pose.theta) * dt,
          normalize_angle(pose.theta + u.omega * dt)};
}

ControlInput clamp_control(const ControlInput& u, const RobotSpec& spec, bool* clamped) {
  const ControlInput out{std::clamp(u.v, -spec.v_max_burst, spec.v_max_burst),
                         std::clamp(u.omega, -spec.omega_max, spec.omega_max)};
  if (clamped) *clamped = !(out == u);
  return out;
}

ControlInput track_waypoint(const Pose& pose, Vec2 target, double speed, double omega_max,
                            double dt, const TrackingGains& gains) {
  const Vec2 d = target - pose.position();
  const double dist = d.norm();
  if (dist <= gains.arrive_tolerance) return {};
  const double err = normalize_angle(std::atan2(d.y, d.x) - pose.theta);
  // Rotation that would exactly cancel the error this tick, bounded by omega_max.
  const double omega_exact = std::clamp(err / dt, -omega_max, omega_max);
  if (std::abs(err) > gains.heading_tolerance) return {0.0, omega_exact};
  const double omega = std::clamp(gains.heading_gain * err, -std::abs(omega_exact), std::abs(omega_exact));
  return {std::min(speed, dist / dt), omega};
}

Policy hold_position() {
  return [](const Pose&, int) { return ControlInput{}; };
}

Policy waypoint_policy(Vec2 target, double speed, double omega_max, double dt, TrackingGains gains) {
  return [=](const Pose& p, int) { return track_waypoint(p, target, speed, omega_max, dt, gains); };
}

std::vector<Pose> propagate(const Pose& start, const Policy& policy, int horizon, double dt) {
  if (horizon < 0) throw PreconditionError("propagate: negative horizon");
  std::vector<Pose> traj;
  traj.reserve(static_cast<std::size_t>(horizon) + 1);
  traj.push_back(start);
  for (int k = 0; k < horizon; ++k) traj.push_back(step(traj.back(), policy(traj.back(), k), dt));
  return traj;
}

double dubins_time(const Pose& from, Vec2 to, double v_max, double omega_max) {
  if (!(v_max > 0.0) || !(omega_max > 0.0)) {
    throw PreconditionError("dubins_time: v_max and omega_max must be positive");
  }
  const auto dir = unit_direction(from.position(), to);
  if (!dir) return 0.0;
  const double straight = distance(from.position(), to) / v_max;
  const double c = std::clamp(from.heading().dot(*dir), -1.0, 1.0);
  return straight + std::acos(c) / omega_max;
}

}  // namespace epicoord
