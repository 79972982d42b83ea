#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "epicoord/belief_engine.hpp"
#include "epicoord/epistemic_update.hpp"

namespace epicoord {

struct InterceptCandidate {
  int tau = 0;  // tick
  Vec2 point;
  double dubins = 0.0;  // s, from the fetcher's pose at planning time
  friend bool operator==(const InterceptCandidate&, const InterceptCandidate&) = default;
};

struct BehaviorEvaluation {
  BehaviorPrimitive behavior;
  std::map<int, double> per_robot_completion;  // absolute seconds, every robot of the team
  double mission_time = 0.0;
  bool pruned = false;
  std::string reason;
  std::optional<InterceptCandidate> intercept;  // Fetch only
};

struct TreeSearchConfig {
  int depth_limit = 2;
  double horizon_s = 600.0;
  double completion_radius = 1.0;
  double alpha = 0.8;  // intercept slack
  double sigma = 0.5;  // intercept offset inside the target's range
  double min_fetch_gain = 0.1;  // a fetch must shorten the c mission time by this fraction
  std::vector<int> required;  // R_g; empty means the whole team

  void validate() const;
};

using LosPredicate = std::function<bool(Vec2 from, Vec2 to)>;

/// First tick (start_tick + k) at which poses[k] is within `range` of the task (and, when
/// given, has line of sight to it), converted to seconds.
std::optional<double> estimate_discovery_time(std::span<const Pose> poses, int start_tick, double dt,
                                              Vec2 task, double range, const LosPredicate& los = {});

/// Joint rollout of every agent in `context` with the task known to whoever meets it.
/// `fetch_injections` makes an agent switch to ModifiedExplore away from a point at a given
/// tick; `fixed_completion` overrides an agent's completion time (a fetcher on its maneuver).
struct RolloutPlan {
  struct Injection {
    int agent = 0;
    int tick = 0;
    Vec2 repel_point;
    int from = -1;
  };
  std::vector<Injection> injections;
  std::map<int, double> fixed_completion;
  bool record = false;  // keep every agent's poses until it learns the task
  std::vector<int> track;  // agents whose arrival ends the rollout; empty means R_g
};

struct RolloutOutcome {
  std::vector<double> completion_s;         // per agent; t0 + H when never reached
  std::vector<std::vector<Pose>> recorded;  // per agent, from t0 on, when requested
};

RolloutOutcome simulate_completions(const PerspectiveRollout& context, Vec2 task, const RolloutPlan& plan,
                                    const TreeSearchConfig& cfg, const PredictionContext& ctx);

/// Completion time of agent k when everybody runs their current behavior from the context's
/// tick. Returns t0 + H when it never arrives.
double completion_time(int k, const PerspectiveRollout& context, Vec2 task, const TreeSearchConfig& cfg,
                       const PredictionContext& ctx);

/// Evaluates Fetch(target) by `fetcher` in the given context.
BehaviorEvaluation fetch_evaluation(int fetcher, int target, const PerspectiveRollout& context, Vec2 task,
                                    const TreeSearchConfig& cfg, const PredictionContext& ctx,
                                    const RolloutPlan& base = {});

/// The decision the tree search credits to one believed earlier discoverer.
struct ReplayedDecision {
  int robot = 0;
  int discovery_tick = 0;
  BehaviorPrimitive chosen;
  std::vector<BehaviorEvaluation> evaluations;
};

struct TreeResult {
  std::vector<BehaviorEvaluation> evaluations;  // self's, pruned ones included
  std::vector<ReplayedDecision> replays;
  BehaviorPrimitive chosen;
};

/// Self's own view of the team: its true state plus its first-order particles.
PerspectiveRollout self_view(const ParticleStore& store, const AgentState& self, int tick);

/// Evaluates every behavior available to one decider at the context's tick.
/// `known` lists robots the decider treats as already aware of the task; `claimed` lists
/// Fetch targets that are pruned, with the robot credited for them.
std::vector<BehaviorEvaluation> evaluate_behaviors(int decider, const PerspectiveRollout& context, Vec2 task,
                                                   const std::vector<bool>& known,
                                                   const std::map<int, int>& claimed, const RolloutPlan& base,
                                                   const TreeSearchConfig& cfg, const PredictionContext& ctx);

/// A fetch the decider is already executing, which later discoverers would have seen claimed.
struct OwnFetch {
  int discovery_tick = 0;
  int target = 0;
};

/// Same, with agent k predicted by views[k]; agents sharing a view are rolled out jointly.
std::vector<BehaviorEvaluation> evaluate_behaviors(int decider, const std::vector<const PerspectiveRollout*>& views,
                                                   Vec2 task, const std::vector<bool>& known,
                                                   const std::map<int, int>& claimed, const RolloutPlan& base,
                                                   const TreeSearchConfig& cfg, const PredictionContext& ctx);

/// Full search for `self`, which must know the task: replays believed discoverers in
/// discovery order (each seeing the claims of earlier ones, including `own`), prunes the
/// fetches credited to them and evaluates the rest.
TreeResult evaluate_tree(const AgentState& self, const EpistemicState& epistemic, const ParticleStore& store,
                         int tick, const TreeSearchConfig& cfg, const PredictionContext& ctx,
                         std::optional<OwnFetch> own = std::nullopt);

/// max over R_g of the per-robot completions.
double mission_time(const std::map<int, double>& per_robot, const std::vector<int>& required);

/// Minimal mission time; ties prefer c, then Fetch of the lowest id, then exploring. A Fetch
/// only competes when it beats the c evaluation by at least `min_fetch_gain` of c's time.
BehaviorPrimitive select_behavior(const std::vector<BehaviorEvaluation>& evaluations, double min_fetch_gain = 0.0);

}  // namespace epicoord
