#pragma once

#include <cmath>
#include <numbers>
#include <optional>

namespace epicoord {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Vec2 a, Vec2 b) = default;

  double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double norm() const { return std::hypot(x, y); }
  double squared_norm() const { return x * x + y * y; }
};

inline double distance(Vec2 a, Vec2 b) { return (b - a).norm(); }

/// Maps any angle onto (-pi, pi].
inline double normalize_angle(double a) {
  constexpr double kPi = std::numbers::pi;
  a = std::remainder(a, 2.0 * kPi);  // [-pi, pi]
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

struct Pose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Vec2 position() const { return {x, y}; }
  Vec2 heading() const { return {std::cos(theta), std::sin(theta)}; }
  friend bool operator==(const Pose&, const Pose&) = default;
};

/// Unit bearing from `from` to `to`; empty when the points coincide.
inline std::optional<Vec2> unit_direction(Vec2 from, Vec2 to) {
  const Vec2 d = to - from;
  const double n = d.norm();
  if (n == 0.0 || !std::isfinite(n)) return std::nullopt;
  return Vec2{d.x / n, d.y / n};
}

}  // namespace epicoord
