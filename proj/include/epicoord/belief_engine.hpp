#pragma once

#include <optional>
#include <vector>

#include "epicoord/agent.hpp"

namespace epicoord {

/// Common knowledge every robot predicts with: arena geometry (no obstacles), the team's
/// specs and the exploration model. Predicted robots sense this obstacle-free prior.
struct PredictionContext {
  GridGeometry grid;
  std::vector<Cell> prior_cells;
  std::vector<RobotSpec> specs;
  ExplorationParams params;

  static PredictionContext make(const GridGeometry& grid, std::vector<RobotSpec> specs,
                                const ExplorationParams& params);
  int team_size() const { return static_cast<int>(specs.size()); }
};

/// A lockstep rollout of the whole team as `observer` believes `perspective` sees it.
/// Agent `perspective` is the observer's first-order particle of that robot, agent
/// `observer` is the second-order (empathy) particle, any other agent k is third-order.
class PerspectiveRollout {
 public:
  PerspectiveRollout(int observer, int perspective, std::vector<AgentState> agents, int tick);

  int observer() const { return observer_; }
  int perspective() const { return perspective_; }
  int tick() const { return tick_; }
  int start_tick() const { return start_tick_; }
  int team_size() const { return static_cast<int>(agents_.size()); }

  const AgentState& agent(int id) const { return agents_.at(id); }
  AgentState& agent(int id) { return agents_.at(id); }
  const std::vector<AgentState>& agents() const { return agents_; }

  /// Once set, the perspective robot switches to CompleteTask when the task comes within its
  /// sensing range; the others do too, but only after the perspective robot knows the task.
  void set_task(Vec2 task) { task_ = task; }
  const std::optional<Vec2>& task() const { return task_; }

  void set_record_history(bool on) { record_history_ = on; }
  /// Snapshot of agent `id` at `tick` (start_tick <= tick < this->tick()).
  const AgentSnapshot& snapshot_at(int id, int tick) const;
  const std::vector<AgentSnapshot>& history(int id) const { return history_.at(id); }

  /// Advances every agent one tick: map update on scan ticks, task check, decisions, motion.
  void step(const PredictionContext& ctx);

  /// Poses of agent `id` over [tick, tick + ticks] from a history-free copy.
  std::vector<Pose> forecast(int id, int ticks, const PredictionContext& ctx) const;

  /// Rebuilds the whole rollout as it stood at a past tick (maps re-sensed from history).
  PerspectiveRollout reconstruct_at(int tick, const PredictionContext& ctx) const;

  /// Copy without history, for what-if rollouts.
  PerspectiveRollout detached() const;

 private:
  int observer_;
  int perspective_;
  int tick_;
  int start_tick_;
  std::vector<AgentState> agents_;
  std::optional<Vec2> task_;
  bool record_history_ = true;
  std::vector<std::vector<AgentSnapshot>> history_;
};

/// Peer positions for agent `self` taken from `agents`, in id order.
std::vector<Vec2> peer_positions(const std::vector<AgentState>& agents, int self);

/// All particles held by one robot: one perspective rollout per teammate.
class ParticleStore {
 public:
  ParticleStore() = default;
  ParticleStore(int observer, std::vector<std::optional<PerspectiveRollout>> perspectives);

  int observer() const { return observer_; }
  int team_size() const { return static_cast<int>(perspectives_.size()); }
  bool has_perspective(int j) const { return j >= 0 && j < team_size() && perspectives_[j].has_value(); }
  PerspectiveRollout& perspective(int j) { return perspectives_.at(j).value(); }
  const PerspectiveRollout& perspective(int j) const { return perspectives_.at(j).value(); }

  const AgentState& first_order(int j) const { return perspective(j).agent(j); }
  const AgentState& second_order(int j) const { return perspective(j).agent(observer_); }
  const AgentState& third_order(int j, int k) const { return perspective(j).agent(k); }

  /// First-order position estimates of every teammate except the observer, in id order.
  std::vector<Vec2> first_order_positions() const;

  void step(const PredictionContext& ctx);
  void set_task(Vec2 task);

 private:
  int observer_ = 0;
  std::vector<std::optional<PerspectiveRollout>> perspectives_;
};

/// A materialized particle: a predicted trajectory over [start_tick, start_tick + H].
struct BeliefParticle {
  int order = 1;
  int observer = 0;
  int subject = 0;
  std::optional<int> nested_subject;  // order 2: the observer; order 3: the third robot
  BehaviorPrimitive behavior_hypothesis;
  int start_tick = 0;
  std::vector<Pose> trajectory;
  BeliefMap believed_map;
  AgentState head;               // state at the trajectory's last pose
  std::vector<Vec2> head_peers;  // peer positions the head plans against
};

struct ParticleCounts {
  int first = 0;
  int second = 0;
  int third = 0;
};

/// Every robot starts exploring from the commonly known start poses.
ParticleStore init_particles(int observer, const std::vector<Pose>& initial_poses,
                             const PredictionContext& ctx, int tick = 0);
ParticleCounts count_particles(const ParticleStore& store);

/// Materializes all particles with a horizon of H ticks.
std::vector<BeliefParticle> materialize_particles(const ParticleStore& store, int H,
                                                  const PredictionContext& ctx);

/// Slides the window one tick: the head advances under its behavior hypothesis with
/// peers held at head_peers, its map is updated by simulated sensing.
BeliefParticle propagate_particle(BeliefParticle p, const PredictionContext& ctx);

/// Position-only prediction error.
double residual(const Pose& predicted, const Pose& observed);

struct ObservationUpdate {
  double residual = 0.0;                  // observer's surprise at the peer
  double predicted_peer_surprise = 0.0;   // how surprised the peer should be at the observer
};

/// Folds a direct observation of `peer` into the store: re-anchors the first-order
/// particle (and, when the peer can see the observer, the observer's empathy particle in
/// that perspective). With `model_reactions`, a surprised party is assumed to switch to
/// ModifiedExplore away from the other, provided the other is moving: a robot parked at the
/// task does not repel anyone.
struct Motion {
  bool peer = true;
  bool self = true;
};
ObservationUpdate apply_observation(ParticleStore& store, int peer, const Pose& observed,
                                    const Pose& self_actual, bool peer_sees_self, double delta,
                                    double time_s, const PredictionContext& ctx, bool model_reactions,
                                    Motion moving = {});

struct EmpathyWaypoint {
  Vec2 point;
  int perspective = 0;
  int arrive_tick = 0;
  double deviation = 0.0;
};

/// When the observer has drifted more than delta_e from where every teammate expects it,
/// returns the closest expectation catchup_ticks ahead (lower id on ties). Expectations whose
/// model has stopped exploring are ignored.
std::optional<EmpathyWaypoint> empathy_waypoint(const ParticleStore& store, const Pose& actual,
                                                double delta_e, int catchup_ticks,
                                                const PredictionContext& ctx);

}  // namespace epicoord
