#include <random>

#include "doctest.h"
#include "epicoord/belief_engine.hpp"
#include "epicoord/epistemic_update.hpp"
#include "epicoord/error.hpp"
#include "oracles.hpp"

using namespace epicoord;

namespace {

PredictionContext open_context(int n, double size = 50.0) {
  return PredictionContext::make(GridGeometry(size, size, 1.0), std::vector<RobotSpec>(n), ExplorationParams{});
}

}  // namespace

TEST_SUITE("epistemic_update") {
  TEST_CASE("hand-computed posterior for one positive event") {
    const HypothesisTable t = bayes_update(HypothesisTable::uniform(3), 2, 1, 0.9, 0.3);
    REQUIRE(t.rows() == 8);
    for (std::size_t r = 0; r < 8; ++r) CHECK(t.weights[r] == doctest::Approx((r & 4) ? 0.225 : 0.025).epsilon(1e-12));
    CHECK(t.sum() == doctest::Approx(1.0).epsilon(1e-15));
  }

  TEST_CASE("opposite evidence with P- = 1 - P+ restores the prior") {
    HypothesisTable t = HypothesisTable::uniform(3);
    t = bayes_update(t, 1, 1, 0.8, 0.2);
    t = bayes_update(t, 1, 0, 0.8, 0.2);
    for (double w : t.weights) CHECK(w == doctest::Approx(0.125).epsilon(1e-12));
  }

  TEST_CASE("sequential updates match the direct product-and-normalize oracle") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 300; ++trial) {
      const int n = 2 + trial % 4;
      std::uniform_int_distribution<int> k(0, n - 1), z(0, 1), len(1, 12);
      std::uniform_real_distribution<double> pm(0.05, 0.45), gap(0.05, 0.5);
      const double p_minus = pm(rng);
      const double p_plus = std::min(0.95, p_minus + gap(rng));
      std::vector<std::pair<int, int>> ev;
      const int m = len(rng);
      for (int i = 0; i < m; ++i) ev.emplace_back(k(rng), z(rng));
      HypothesisTable t = HypothesisTable::uniform(n);
      for (auto [kk, zz] : ev) t = bayes_update(t, kk, zz, p_plus, p_minus);
      const auto expect = oracle::posterior(n, ev, p_plus, p_minus);
      for (std::size_t r = 0; r < t.rows(); ++r) CHECK(std::abs(t.weights[r] - expect[r]) <= 1e-12);
      CHECK(map_hypothesis(t).mask == oracle::map_row(expect, n));
    }
  }

  TEST_CASE("literal mode scales only the rows with the bit set") {
    const HypothesisTable t = bayes_update(HypothesisTable::uniform(2), 0, 1, 0.8, 0.3, BayesMode::Literal);
    // rows 1 and 3 weigh 0.8, rows 0 and 2 weigh 1, normalized over 3.6
    CHECK(t.weights[0] == doctest::Approx(1.0 / 3.6));
    CHECK(t.weights[1] == doctest::Approx(0.8 / 3.6));
    CHECK(map_hypothesis(t).mask == 0u);
  }

  TEST_CASE("invalid likelihoods and subjects are rejected") {
    const HypothesisTable t = HypothesisTable::uniform(3);
    CHECK_THROWS_AS(bayes_update(t, 0, 1, 0.3, 0.8), PreconditionError);
    CHECK_THROWS_AS(bayes_update(t, 0, 1, 1.0, 0.3), PreconditionError);
    CHECK_THROWS_AS(bayes_update(t, 3, 1, 0.8, 0.3), PreconditionError);
    HypothesisTable zero = t;
    std::fill(zero.weights.begin(), zero.weights.end(), 0.0);
    CHECK_THROWS_AS(bayes_update(zero, 0, 1, 0.8, 0.3), InconsistentEvidenceError);
  }

  TEST_CASE("MAP tie-breaks prefer fewer ones, then the lexicographically smallest vector") {
    CHECK(map_hypothesis(HypothesisTable::uniform(4)).mask == 0u);
    const HypothesisTable t = bayes_update(HypothesisTable::uniform(3), 2, 1, 0.9, 0.3);
    const EpistemicState e = map_hypothesis(t);
    CHECK(e.bits() == std::vector<int>{0, 0, 1});
    HypothesisTable u = HypothesisTable::uniform(3);
    u.weights = {0.0, 0.2, 0.2, 0.0, 0.2, 0.0, 0.0, 0.4};
    CHECK(map_hypothesis(u).mask == 7u);
    u.weights = {0.0, 0.0, 0.3, 0.3, 0.0, 0.1, 0.3, 0.0};
    CHECK(map_hypothesis(u).bits() == std::vector<int>{0, 1, 0});
  }

  TEST_CASE("positive evidence for k always puts bit k in the MAP") {
    for (int n = 2; n <= 5; ++n) {
      for (int k = 0; k < n; ++k) {
        HypothesisTable t = HypothesisTable::uniform(n);
        for (int i = 0; i < 3; ++i) {
          t = bayes_update(t, k, 1, 0.8, 0.3);
          const EpistemicState e = map_hypothesis(t);
          CHECK(e.bit(k));
          CHECK(e.ones() == 1);
        }
      }
    }
  }

  TEST_CASE("certain self-knowledge moves all mass onto the matching rows") {
    HypothesisTable t = bayes_update(HypothesisTable::uniform(3), 1, 1, 0.8, 0.3);
    t = set_own_bit(t, 0, true);
    double on = 0.0;
    for (std::size_t r = 0; r < t.rows(); ++r) {
      if (r & 1u) on += t.weights[r];
      else CHECK(t.weights[r] == 0.0);
    }
    CHECK(on == doctest::Approx(1.0));
    CHECK(map_hypothesis(t).bits() == std::vector<int>{1, 1, 0});
  }

  TEST_CASE("epistemic state helpers") {
    const EpistemicState e = EpistemicState::from_bits({1, 0, 1});
    CHECK(e.mask == 5u);
    CHECK(e.ones() == 2);
    CHECK(to_string(e) == "101");
    CHECK(e.bits() == std::vector<int>{1, 0, 1});
  }

  TEST_CASE("event polarities") {
    CHECK(evidence_of(EventKind::UnexpectedObservation) == 1);
    CHECK(evidence_of(EventKind::PredictedDiscovery) == 1);
    CHECK(evidence_of(EventKind::InterceptSucceeded) == 1);
    CHECK(evidence_of(EventKind::MissedExpectedObservation) == 0);
    CHECK(evidence_of(EventKind::InterceptFailed) == 0);
    CHECK_FALSE(evidence_of(EventKind::ExpectedObservation).has_value());
    CHECK_FALSE(evidence_of(EventKind::TaskDiscovered).has_value());
  }

  TEST_CASE("event detection: unexpected, expected once per episode, missed") {
    const PredictionContext ctx = open_context(2);
    const std::vector<Pose> starts{{10, 10, 0}, {20, 10, 0}};
    const ParticleStore store = init_particles(0, starts, ctx);
    const BeliefMap own = BeliefMap::unknown(ctx.grid);
    EventDetector det(0, 2);
    SensorScan scan;
    scan.origin = starts[0];
    EventDetector::Inputs in{&scan, &store, &own, starts[0], 20.0, std::nullopt, 2.0, 0};

    scan.robots_seen = {{1, {25, 10, 0}}};  // 5 m from the prediction
    auto ev = det.detect(in);
    REQUIRE(ev.size() == 1);
    CHECK(ev[0].kind == EventKind::UnexpectedObservation);
    CHECK(ev[0].subject == 1);

    scan.robots_seen = {{1, {20.5, 10, 0}}};
    EventDetector fresh(0, 2);
    ev = fresh.detect(in);
    REQUIRE(ev.size() == 1);
    CHECK(ev[0].kind == EventKind::ExpectedObservation);
    CHECK(fresh.detect(in).empty());

    scan.robots_seen.clear();
    ev = fresh.detect(in);
    REQUIRE(ev.size() == 1);
    CHECK(ev[0].kind == EventKind::MissedExpectedObservation);
    CHECK(fresh.detect(in).empty());
  }

  TEST_CASE("task knowledge is inferred from the first-order maps") {
    const PredictionContext ctx = open_context(3);
    const std::vector<Pose> starts{{5, 5, 0}, {8, 5, 0}, {45, 45, 0}};
    ParticleStore store = init_particles(0, starts, ctx);
    for (int t = 0; t < 11; ++t) store.step(ctx);
    BeliefMap own = BeliefMap::unknown(ctx.grid);
    CHECK_THROWS_AS(infer_task_knowledge(own, store, {10, 10}), PreconditionError);
    own.task_known = true;
    const auto inferred = infer_task_knowledge(own, store, {10, 10});
    REQUIRE(inferred.size() == 2);
    CHECK(inferred[0] == std::pair{1, 1});
    CHECK(inferred[1] == std::pair{2, 0});
  }
}
