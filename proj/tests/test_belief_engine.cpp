#include "doctest.h"
#include "epicoord/belief_engine.hpp"
#include "epicoord/error.hpp"

using namespace epicoord;

namespace {

PredictionContext open_context(int n, double size = 50.0) {
  return PredictionContext::make(GridGeometry(size, size, 1.0), std::vector<RobotSpec>(n), ExplorationParams{});
}

const std::vector<Pose> kCorners{{5, 5, 0}, {95, 5, 1.5}, {5, 95, -1.5}};

}  // namespace

TEST_SUITE("belief_engine") {
  TEST_CASE("particle counts per observer") {
    for (int n = 2; n <= 5; ++n) {
      const PredictionContext ctx = open_context(n);
      std::vector<Pose> starts;
      for (int k = 0; k < n; ++k) starts.push_back({5.0 + 8.0 * k, 5.0, 0.0});
      ParticleCounts total;
      for (int i = 0; i < n; ++i) {
        const ParticleCounts c = count_particles(init_particles(i, starts, ctx));
        CHECK(c.first == n - 1);
        total.first += c.first;
        total.second += c.second;
        total.third += c.third;
      }
      CHECK(total.first == n * (n - 1));
      CHECK(total.second == n * (n - 1));
      CHECK(total.third == n * (n - 1) * (n - 2));
    }
    CHECK_THROWS_AS(init_particles(0, {{1, 1, 0}}, open_context(2)), PreconditionError);
  }

  TEST_CASE("order accessors address the right agent of each perspective") {
    const PredictionContext ctx = open_context(3);
    const ParticleStore s = init_particles(1, {{5, 5, 0}, {20, 5, 0}, {35, 5, 0}}, ctx);
    CHECK_FALSE(s.has_perspective(1));
    CHECK(s.first_order(0).id == 0);
    CHECK(s.second_order(0).id == 1);
    CHECK(s.third_order(0, 2).id == 2);
    CHECK(s.perspective(2).perspective() == 2);
    CHECK(s.perspective(2).observer() == 1);
    CHECK(s.first_order_positions() == std::vector<Vec2>{{5, 5}, {35, 5}});
  }

  TEST_CASE("without observations, empathy equals the peer's own estimate bit for bit") {
    const PredictionContext ctx = open_context(3, 100.0);
    std::vector<ParticleStore> stores;
    for (int i = 0; i < 3; ++i) stores.push_back(init_particles(i, kCorners, ctx));
    for (int t = 0; t < 300; ++t) {
      for (auto& s : stores) s.step(ctx);
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
          if (i == j) continue;
          REQUIRE(stores[i].second_order(j).pose == stores[j].first_order(i).pose);
          for (int k = 0; k < 3; ++k) {
            if (k == i || k == j) continue;
            REQUIRE(stores[i].third_order(j, k).pose == stores[j].first_order(k).pose);
          }
        }
      }
    }
  }

  TEST_CASE("materialized trajectories are the future of the live rollout") {
    const PredictionContext ctx = open_context(3, 100.0);
    ParticleStore store = init_particles(0, kCorners, ctx);
    for (int t = 0; t < 25; ++t) store.step(ctx);
    const auto particles = materialize_particles(store, 40, ctx);
    CHECK(particles.size() == 2 + 2 + 2);
    ParticleStore live = store;
    std::vector<std::vector<Pose>> future(3);
    for (int k = 0; k <= 40; ++k) {
      for (int id = 0; id < 3; ++id) future[id].push_back(live.perspective(1).agent(id).pose);
      live.step(ctx);
    }
    int checked = 0;
    for (const auto& p : particles) {
      CHECK(p.start_tick == 25);
      REQUIRE(p.trajectory.size() == 41);
      if (p.order == 1 && p.subject == 1) {
        CHECK(p.trajectory == future[1]);
        ++checked;
      }
      if (p.order == 2 && p.subject == 1) {
        CHECK(p.trajectory == future[0]);
        ++checked;
      }
    }
    CHECK(checked == 2);
  }

  TEST_CASE("a CompleteTask hypothesis reaches a task 5 m ahead in about 5 s") {
    const PredictionContext ctx = open_context(2);
    ParticleStore store = init_particles(0, {{40, 40, 0}, {10, 10, 0}}, ctx);
    store.set_task({15, 10});
    int ticks = 0;
    while (distance(store.first_order(1).pose.position(), {15, 10}) > 1.0 && ticks < 200) {
      store.step(ctx);
      ++ticks;
    }
    CHECK(store.first_order(1).behavior.tag == BehaviorTag::CompleteTask);
    CHECK(ticks * 0.1 == doctest::Approx(4.0).epsilon(0.25));
  }

  TEST_CASE("only the perspective robot learns the task first-hand") {
    const PredictionContext ctx = open_context(2);
    ParticleStore store = init_particles(0, {{12, 10, 0}, {45, 45, 0}}, ctx);
    store.set_task({15, 10});
    store.step(ctx);
    // agent 0 in R_0^1 is next to the task but robot 1 does not know it yet
    CHECK_FALSE(store.second_order(1).map.task_known);
    CHECK(store.second_order(1).behavior.tag == BehaviorTag::Explore);
  }

  TEST_CASE("residual ignores heading") {
    CHECK(residual({0, 0, 0}, {3, 4, 2}) == 5.0);
  }

  TEST_CASE("observations re-anchor and model reactions of moving parties") {
    const PredictionContext ctx = open_context(2);
    const std::vector<Pose> starts{{10, 10, 0}, {20, 10, 0}};
    ParticleStore s = init_particles(0, starts, ctx);
    const auto up = apply_observation(s, 1, {26, 10, 0}, {10, 13, 0}, true, 2.0, 4.0, ctx, true);
    CHECK(up.residual == 6.0);
    CHECK(up.predicted_peer_surprise == 3.0);
    CHECK(s.first_order(1).pose == Pose{26, 10, 0});
    CHECK(s.second_order(1).pose == Pose{10, 13, 0});
    CHECK(s.first_order(1).behavior.tag == BehaviorTag::ModifiedExplore);
    CHECK(s.first_order(1).behavior.robot == 0);
    CHECK(s.first_order(1).behavior.expiry_s == 4.0 + ctx.params.repulse_duration_s);
    CHECK(s.second_order(1).behavior.tag == BehaviorTag::ModifiedExplore);

    ParticleStore parked = init_particles(0, starts, ctx);
    apply_observation(parked, 1, {26, 10, 0}, {10, 13, 0}, true, 2.0, 4.0, ctx, true, Motion{false, false});
    CHECK(parked.first_order(1).behavior.tag == BehaviorTag::Explore);
    CHECK(parked.second_order(1).behavior.tag == BehaviorTag::Explore);
    CHECK(parked.first_order(1).pose == Pose{26, 10, 0});

    ParticleStore blind = init_particles(0, starts, ctx);
    apply_observation(blind, 1, {21, 10, 0}, {10, 13, 0}, false, 2.0, 4.0, ctx, true);
    CHECK(blind.second_order(1).pose == starts[0]);
    CHECK(blind.first_order(1).behavior.tag == BehaviorTag::Explore);
  }

  TEST_CASE("empathy waypoint follows the closest teammate expectation") {
    const PredictionContext ctx = open_context(3);
    const std::vector<Pose> starts{{10, 10, 0}, {40, 10, 0}, {10, 40, 0}};
    ParticleStore s = init_particles(0, starts, ctx);
    CHECK_FALSE(empathy_waypoint(s, {10.5, 10, 0}, 1.0, 50, ctx).has_value());

    // equal deviations: lower perspective id
    auto w = empathy_waypoint(s, {13, 10, 0}, 1.0, 50, ctx);
    REQUIRE(w);
    CHECK(w->perspective == 1);
    CHECK(w->deviation == 3.0);
    CHECK(w->arrive_tick == 50);
    CHECK(w->point == s.perspective(1).forecast(0, 50, ctx).back().position());

    s.perspective(2).agent(0).pose = {11.5, 10, 0};
    w = empathy_waypoint(s, {13, 10, 0}, 1.0, 50, ctx);
    REQUIRE(w);
    CHECK(w->perspective == 2);
    CHECK(w->deviation == 1.5);

    // an expectation that is no longer exploring is ignored
    set_behavior(s.perspective(2).agent(0), BehaviorPrimitive::complete_task());
    w = empathy_waypoint(s, {13, 10, 0}, 1.0, 50, ctx);
    REQUIRE(w);
    CHECK(w->perspective == 1);
  }

  TEST_CASE("reconstruction replays history exactly") {
    const PredictionContext ctx = open_context(3, 100.0);
    ParticleStore store = init_particles(0, kCorners, ctx);
    std::vector<AgentSnapshot> at30;
    for (int t = 0; t < 60; ++t) {
      if (t == 30) {
        for (int id = 0; id < 3; ++id) at30.push_back(snapshot(store.perspective(1).agent(id)));
      }
      store.step(ctx);
    }
    const PerspectiveRollout past = store.perspective(1).reconstruct_at(30, ctx);
    CHECK(past.tick() == 30);
    for (int id = 0; id < 3; ++id) {
      CHECK(snapshot(past.agent(id)) == at30[id]);
      CHECK(store.perspective(1).snapshot_at(id, 30) == at30[id]);
    }
  }
}
