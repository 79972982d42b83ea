#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "epicoord/scenario.hpp"

namespace epicoord {

struct LoggedEvent {
  int observer = 0;
  Event event;
  friend bool operator==(const LoggedEvent&, const LoggedEvent&) = default;
};

struct TickRecord {
  int tick = 0;
  std::vector<Pose> poses;                      // true poses at the start of the tick
  std::vector<BehaviorPrimitive> behaviors;     // after this tick's decisions
  std::vector<std::string> epistemic;           // MAP hypothesis per robot ("" for the baseline)
  std::vector<LoggedEvent> events;
  std::vector<std::vector<Pose>> estimates;     // verbose: [observer][robot] first-order poses
  std::vector<std::vector<Pose>> empathy;       // verbose: [observer][peer] where the peer should think the observer is
};

struct DecisionRecord {
  int tick = 0;
  int robot = 0;
  TreeResult result;
};

struct MppiRecord {
  int tick = 0;
  int robot = 0;
  int target = 0;
  Vec2 x_int;
  double cost = 0.0;
  std::vector<int> histogram;  // sampled costs in 10 equal-width bins
};

struct TrialOutcome {
  bool completed = false;
  std::optional<double> completion_time_s;
  int ticks = 0;
  int fetches_started = 0;
  int fetch_successes = 0;
};

struct TrialLog {
  ScenarioConfig config;
  ScenarioInstance instance;
  std::vector<TickRecord> ticks;
  std::vector<DecisionRecord> decisions;
  std::vector<MppiRecord> mppi;
  TrialOutcome outcome;
};

/// Runs one trial under config.policy.
TrialLog run_trial(const ScenarioConfig& config);
/// Same world and loop restricted to the first-order baseline.
TrialLog run_baseline_trial(const ScenarioConfig& config);
/// Runs one trial on an already sampled world.
TrialLog run_instance(const ScenarioConfig& config, const ScenarioInstance& instance);

struct PairRecord {
  std::uint64_t seed = 0;
  int team_size = 0;
  int obstacles = 0;
  std::optional<double> epistemic_time_s;
  std::optional<double> baseline_time_s;
  std::optional<double> delta_s;  // baseline - epistemic; positive means the epistemic policy was faster
  bool fetch_occurred = false;    // at least one successful intercept
  std::string outcome;            // improve, match, regress or censored
};

struct Metrics {
  std::vector<PairRecord> pairs;
  int completed_pairs = 0;
  double improve_rate = 0.0;
  double match_rate = 0.0;
  double regress_rate = 0.0;
  int fetch_pairs = 0;
  double mean_fetch_improvement_s = 0.0;
  double mean_fetch_improvement_pct = 0.0;
  double fetch_sign_test_p = 1.0;
};

/// Classifies one pair given the match tolerance.
std::string classify_pair(std::optional<double> epistemic_s, std::optional<double> baseline_s, double tolerance);

/// Aggregates pairs (ordered by seed) into rates and fetch statistics.
Metrics aggregate(std::vector<PairRecord> pairs);

/// One-sided sign test: P(X >= positives) for X ~ Binomial(n, 1/2).
double sign_test_p(int positives, int n);

/// Paired epistemic/baseline trials for seeds seed_base .. seed_base + n - 1 on `jobs` threads.
Metrics run_batch(const ScenarioConfig& templ, int n_trials, std::uint64_t seed_base, int jobs);

}  // namespace epicoord
