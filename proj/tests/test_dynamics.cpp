#include <random>

#include "doctest.h"
#include "epicoord/dynamics.hpp"
#include "epicoord/error.hpp"
#include "oracles.hpp"

using namespace epicoord;

TEST_SUITE("dynamics") {
  TEST_CASE("unicycle step matches the Euler closed form") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int i = 0; i < 1000; ++i) {
      const Pose p{u(rng) * 10, u(rng) * 10, u(rng)};
      const ControlInput c{u(rng), u(rng)};
      const Pose q = step(p, c, 0.1);
      CHECK(q.x == doctest::Approx(p.x + 0.1 * c.v * std::cos(p.theta)).epsilon(1e-14));
      CHECK(q.y == doctest::Approx(p.y + 0.1 * c.v * std::sin(p.theta)).epsilon(1e-14));
      CHECK(q.theta > -std::numbers::pi);
      CHECK(q.theta <= std::numbers::pi);
      CHECK(std::cos(q.theta) == doctest::Approx(std::cos(p.theta + 0.1 * c.omega)));
    }
  }

  TEST_CASE("angles normalize onto (-pi, pi]") {
    CHECK(normalize_angle(std::numbers::pi) == std::numbers::pi);
    CHECK(normalize_angle(-std::numbers::pi) == std::numbers::pi);
    CHECK(normalize_angle(3 * std::numbers::pi) == doctest::Approx(std::numbers::pi));
    CHECK(normalize_angle(0.5 + 4 * std::numbers::pi) == doctest::Approx(0.5));
  }

  TEST_CASE("straight-line waypoint 10 m ahead is reached within one cell") {
    const auto traj = propagate({0.0, 0.0, 0.0}, waypoint_policy({10.0, 0.0}, 1.0, 1.0, 1.0), 10, 1.0);
    REQUIRE(traj.size() == 11);
    CHECK(distance(traj.back().position(), {10.0, 0.0}) <= 1.0);
    for (std::size_t k = 1; k < traj.size(); ++k) CHECK(traj[k].x >= traj[k - 1].x);
  }

  TEST_CASE("a waypoint behind the robot is reached by turning in place first") {
    const auto traj = propagate({0.0, 0.0, 0.0}, waypoint_policy({-5.0, 0.0}, 1.0, 1.0, 0.1), 200, 0.1);
    int k = 1;
    while (k < static_cast<int>(traj.size()) && traj[k].position() == traj[0].position()) ++k;
    // pi - heading_tolerance radians at 1 rad/s before any translation
    CHECK(k >= 29);
    CHECK(std::abs(normalize_angle(traj[k - 1].theta - std::numbers::pi)) <= 0.2 + 1e-12);
    CHECK(distance(traj.back().position(), {-5.0, 0.0}) <= 0.05 + 1e-9);
  }

  TEST_CASE("the tracker never overshoots within a tick") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int i = 0; i < 1000; ++i) {
      const Pose p{u(rng), u(rng), u(rng)};
      const Vec2 goal{u(rng), u(rng)};
      const ControlInput c = track_waypoint(p, goal, 1.25, 1.0, 0.1);
      CHECK(c.v >= 0.0);
      CHECK(c.v * 0.1 <= distance(p.position(), goal) + 1e-12);
      CHECK(std::abs(c.omega) <= 1.0);
    }
  }

  TEST_CASE("hold_position keeps the pose") {
    const Pose p{3.0, 4.0, 1.0};
    const auto traj = propagate(p, hold_position(), 50, 0.1);
    for (const Pose& q : traj) CHECK(q == p);
    CHECK_THROWS_AS(propagate(p, hold_position(), -1, 0.1), PreconditionError);
  }

  TEST_CASE("control clamping") {
    const RobotSpec spec;
    bool clamped = false;
    const ControlInput c = clamp_control({3.0, -4.0}, spec, &clamped);
    CHECK(clamped);
    CHECK(c == ControlInput{1.25, -1.0});
    const ControlInput d = clamp_control({0.5, 0.5}, spec, &clamped);
    CHECK_FALSE(clamped);
    CHECK(d == ControlInput{0.5, 0.5});
  }

  TEST_CASE("robot spec validation") {
    RobotSpec s;
    CHECK_NOTHROW(s.validate());
    s.v_nominal = 2.0;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s = RobotSpec{};
    s.omega_max = 0.0;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s = RobotSpec{};
    s.sensing_range = -1.0;
    CHECK_THROWS_AS(s.validate(), ConfigError);
  }

  TEST_CASE("dubins time equals the closed form on 1000 random instances") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> pos(-50.0, 50.0), th(-std::numbers::pi, std::numbers::pi),
        v(0.2, 3.0), w(0.2, 3.0);
    for (int i = 0; i < 1000; ++i) {
      const Pose from{pos(rng), pos(rng), th(rng)};
      const Vec2 to{pos(rng), pos(rng)};
      const double vm = v(rng), wm = w(rng);
      CHECK(std::abs(dubins_time(from, to, vm, wm) - oracle::dubins(from.x, from.y, from.theta, to, vm, wm)) <= 1e-9);
    }
    CHECK(dubins_time({1.0, 1.0, 0.3}, {1.0, 1.0}, 1.0, 1.0) == 0.0);
    CHECK_THROWS_AS(dubins_time({}, {1.0, 0.0}, 0.0, 1.0), PreconditionError);
  }
}
