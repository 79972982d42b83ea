#include <set>

#include "doctest.h"
#include "epicoord/error.hpp"
#include "epicoord/sim_engine.hpp"
#include "epicoord/trial_io.hpp"
#include "oracles.hpp"

using namespace epicoord;

namespace {

ScenarioConfig small(int team, std::uint64_t seed) {
  ScenarioConfig c = default_config(team);
  c.width_m = c.height_m = 30.0;
  c.seed = seed;
  return c;
}

bool all_at_task(const TickRecord& t, const ScenarioConfig& c, Vec2 task) {
  for (int k : c.required_set())
    if (distance(t.poses[k].position(), task) > c.completion_radius) return false;
  return true;
}

}  // namespace

TEST_SUITE("sim_engine") {
  TEST_CASE("a single robot drives straight to a task 5 m ahead") {
    ScenarioConfig c = default_config(1);
    c.robots[0].start = Pose{10, 10, 0};
    c.task = Vec2{15, 10};
    const TrialLog log = run_trial(c);
    REQUIRE(log.outcome.completed);
    const double travel = (5.0 - c.completion_radius) / c.robots[0].spec.v_nominal;
    CHECK(std::abs(*log.outcome.completion_time_s - travel) <= 2.0);
  }

  TEST_CASE("robots starting on the task complete at t = 0; zero duration is censored") {
    ScenarioConfig c = default_config(2);
    c.robots[0].start = Pose{10.2, 10.5, 0};
    c.robots[1].start = Pose{11.2, 10.5, 0};
    c.task = Vec2{10.7, 10.5};
    const TrialLog log = run_trial(c);
    REQUIRE(log.outcome.completed);
    CHECK(*log.outcome.completion_time_s == 0.0);

    ScenarioConfig z = small(2, 4);
    z.max_duration_s = 0.0;
    const TrialLog none = run_trial(z);
    CHECK_FALSE(none.outcome.completed);
    CHECK_FALSE(none.outcome.completion_time_s.has_value());
  }

  TEST_CASE("completion time is the first tick with every required robot at the task") {
    for (std::uint64_t seed : {1, 2, 3}) {
      for (PolicyKind policy : {PolicyKind::Epistemic, PolicyKind::Baseline}) {
        ScenarioConfig c = small(3, seed);
        c.policy = policy;
        const TrialLog log = run_trial(c);
        REQUIRE(log.outcome.completed);
        const Vec2 task = log.instance.world.task_position;
        int first = -1;
        for (const auto& t : log.ticks) {
          if (all_at_task(t, c, task)) {
            first = t.tick;
            break;
          }
        }
        REQUIRE(first >= 0);
        CHECK(*log.outcome.completion_time_s == doctest::Approx(first * c.dt).epsilon(1e-12));
        // the robots that finished wait inside the completion radius
        CHECK(all_at_task(log.ticks.back(), c, task));
      }
    }
  }

  TEST_CASE("robots never share a grid cell") {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
      ScenarioConfig c = small(4, seed);
      c.width_m = c.height_m = 20.0;
      const TrialLog log = run_trial(c);
      const GridGeometry g(c.width_m, c.height_m, c.resolution);
      for (const auto& t : log.ticks) {
        std::set<int> cells;
        for (const Pose& p : t.poses) CHECK(cells.insert(*g.index_of(p.position())).second);
      }
    }
  }

  TEST_CASE("identical configs give byte-identical logs; paired trials share their world") {
    ScenarioConfig c = small(3, 9);
    c.random_obstacles = 3;
    c.verbose = true;
    const TrialLog a = run_trial(c);
    const TrialLog b = run_trial(c);
    CHECK(trial_log_text(a) == trial_log_text(b));
    const TrialLog base = run_baseline_trial(c);
    CHECK(base.instance == a.instance);
    CHECK(base.config.policy == PolicyKind::Baseline);
    CHECK(base.decisions.empty());
    CHECK(base.mppi.empty());
    for (const auto& t : base.ticks)
      for (const auto& b : t.behaviors) CHECK((b.tag == BehaviorTag::Explore || b.tag == BehaviorTag::CompleteTask));
  }

  TEST_CASE("a robot's trajectory ignores a hidden change near a teammate until it senses something new") {
    ScenarioConfig c = default_config(2);
    c.width_m = c.height_m = 100.0;
    c.robots[0].start = Pose{5, 5, 0};
    c.robots[1].start = Pose{95, 95, 3.0};
    c.task = Vec2{95, 5};
    c.max_duration_s = 60.0;
    ScenarioConfig perturbed = c;
    perturbed.obstacles.push_back({{88, 88}, 3.0});
    const TrialLog a = run_trial(c);
    const TrialLog b = run_trial(perturbed);
    const double range = c.robots[0].spec.sensing_range;
    bool diverged_peer = false;
    for (std::size_t t = 0; t < std::min(a.ticks.size(), b.ticks.size()); ++t) {
      const Vec2 me = a.ticks[t].poses[0].position();
      const bool sensed = distance(me, a.ticks[t].poses[1].position()) <= range ||
                          distance(me, b.ticks[t].poses[1].position()) <= range || distance(me, {88, 88}) <= range + 3.0;
      if (sensed) break;
      REQUIRE(a.ticks[t].poses[0] == b.ticks[t].poses[0]);
      CHECK(a.ticks[t].behaviors[0] == b.ticks[t].behaviors[0]);
      diverged_peer = diverged_peer || !(a.ticks[t].poses[1] == b.ticks[t].poses[1]);
    }
    CHECK(diverged_peer);
  }

  TEST_CASE("pair classification") {
    CHECK(classify_pair(100.0, 102.0, 1.0) == "improve");
    CHECK(classify_pair(100.0, 100.5, 1.0) == "match");
    CHECK(classify_pair(101.0, 100.0, 1.0) == "match");
    CHECK(classify_pair(103.0, 100.0, 1.0) == "regress");
    CHECK(classify_pair(std::nullopt, 100.0, 1.0) == "censored");
    CHECK(classify_pair(100.0, std::nullopt, 1.0) == "censored");
  }

  TEST_CASE("sign test equals the binomial tail") {
    for (int n = 0; n <= 30; ++n)
      for (int k = 0; k <= n; ++k) CHECK(sign_test_p(k, n) == doctest::Approx(oracle::binomial_tail(k, n)).epsilon(1e-12));
    CHECK(sign_test_p(6, 6) == doctest::Approx(1.0 / 64));
  }

  TEST_CASE("aggregation: rates sum to one over completed pairs") {
    std::vector<PairRecord> pairs;
    auto add = [&](std::uint64_t seed, std::optional<double> e, std::optional<double> b, bool fetch) {
      PairRecord p;
      p.seed = seed;
      p.team_size = 3;
      p.epistemic_time_s = e;
      p.baseline_time_s = b;
      if (e && b) p.delta_s = *b - *e;
      p.fetch_occurred = fetch;
      p.outcome = classify_pair(e, b, 1.0);
      pairs.push_back(p);
    };
    add(3, 80.0, 100.0, true);
    add(1, 100.0, 100.0, false);
    add(2, 120.0, 100.0, false);
    add(4, std::nullopt, 90.0, false);
    add(5, 90.0, 100.0, true);
    const Metrics m = aggregate(pairs);
    CHECK(m.pairs.front().seed == 1);
    CHECK(m.completed_pairs == 4);
    CHECK(m.improve_rate + m.match_rate + m.regress_rate == doctest::Approx(1.0));
    CHECK(m.improve_rate == 0.5);
    CHECK(m.regress_rate == 0.25);
    CHECK(m.fetch_pairs == 2);
    CHECK(m.mean_fetch_improvement_s == doctest::Approx(15.0));
    CHECK(m.mean_fetch_improvement_pct == doctest::Approx(15.0));
    CHECK(m.fetch_sign_test_p == doctest::Approx(0.25));
  }

  TEST_CASE("batches are independent of the worker count") {
    const ScenarioConfig c = small(2, 1);
    const Metrics one = run_batch(c, 4, 11, 1);
    const Metrics many = run_batch(c, 4, 11, 8);
    CHECK(one.pairs.size() == 4);
    CHECK(metrics_csv_text(one) == metrics_csv_text(many));
    for (std::size_t k = 0; k < one.pairs.size(); ++k) CHECK(one.pairs[k].seed == 11 + k);
    CHECK_THROWS(run_batch(c, 0, 1, 1));
  }

  TEST_CASE("invalid configs are rejected") {
    ScenarioConfig c = default_config(3);
    c.required = {0, 5};
    CHECK_THROWS_AS(run_trial(c), ConfigError);
    c = default_config(3);
    c.task = Vec2{60, 10};
    CHECK_THROWS_AS(run_trial(c), ConfigError);
    c = default_config(2);
    c.obstacles.push_back({{10, 10}, 4.0});
    c.task = Vec2{10, 10};
    CHECK_THROWS_AS(run_trial(c), ConfigError);
  }
}
