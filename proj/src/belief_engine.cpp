#include "epicoord/belief_engine.hpp"

#include "epicoord/error.hpp"

namespace epicoord {

PredictionContext PredictionContext::make(const GridGeometry& grid, std::vector<RobotSpec> specs,
                                          const ExplorationParams& params) {
  PredictionContext ctx;
  ctx.grid = grid;
  ctx.prior_cells.assign(grid.size(), Cell::Free);
  ctx.specs = std::move(specs);
  ctx.params = params;
  return ctx;
}

std::vector<Vec2> peer_positions(const std::vector<AgentState>& agents, int self) {
  std::vector<Vec2> out;
  out.reserve(agents.size());
  for (const auto& a : agents) {
    if (a.id != self) out.push_back(a.pose.position());
  }
  return out;
}

namespace {

// Moves an agent one tick; positions leaving the arena are refused (heading still turns).
void move_agent(AgentState& a, const RobotSpec& spec, const PredictionContext& ctx) {
  const ControlInput u = exploration_control(a, spec, ctx.params, spec.v_nominal);
  const Pose next = step(a.pose, u, ctx.params.dt);
  if (ctx.grid.contains(next.position())) {
    a.pose = next;
  } else {
    a.pose.theta = next.theta;
  }
}

void sense_prior(AgentState& a, const RobotSpec& spec, const PredictionContext& ctx) {
  integrate_cells(a.map, cast_rays(ctx.grid, ctx.prior_cells, a.pose.position(), spec.sensing_range,
                                   ctx.params.n_rays));
}

}  // namespace

PerspectiveRollout::PerspectiveRollout(int observer, int perspective, std::vector<AgentState> agents, int tick)
    : observer_(observer),
      perspective_(perspective),
      tick_(tick),
      start_tick_(tick),
      agents_(std::move(agents)),
      history_(agents_.size()) {
  for (int i = 0; i < static_cast<int>(agents_.size()); ++i) {
    if (agents_[i].id != i) throw PreconditionError("PerspectiveRollout: agents must be indexed by id");
  }
}

const AgentSnapshot& PerspectiveRollout::snapshot_at(int id, int tick) const {
  const auto& h = history_.at(id);
  const int k = tick - start_tick_;
  if (k < 0 || k >= static_cast<int>(h.size())) throw PreconditionError("snapshot_at: tick outside history");
  return h[k];
}

void PerspectiveRollout::step(const PredictionContext& ctx) {
  const ExplorationParams& p = ctx.params;
  if (record_history_) {
    for (const auto& a : agents_) history_[a.id].push_back(snapshot(a));
  }
  if (is_scan_tick(tick_, p)) {
    for (auto& a : agents_) sense_prior(a, ctx.specs[a.id], ctx);
  }
  if (task_) {
    // Only once the perspective robot knows the task can it predict others finding it.
    auto meets = [&](const AgentState& a) {
      return !a.map.task_known && distance(a.pose.position(), *task_) <= ctx.specs[a.id].sensing_range;
    };
    AgentState& owner = agents_[perspective_];
    if (meets(owner)) adopt_task(owner, *task_);
    if (owner.map.task_known) {
      for (auto& a : agents_) {
        if (meets(a)) adopt_task(a, *task_);
      }
    }
  }
  for (auto& a : agents_) {
    const auto peers = peer_positions(agents_, a.id);
    update_decisions(a, tick_, peers, p);
  }
  for (auto& a : agents_) move_agent(a, ctx.specs[a.id], ctx);
  ++tick_;
}

std::vector<Pose> PerspectiveRollout::forecast(int id, int ticks, const PredictionContext& ctx) const {
  PerspectiveRollout copy = detached();
  std::vector<Pose> out;
  out.reserve(static_cast<std::size_t>(ticks) + 1);
  out.push_back(copy.agent(id).pose);
  for (int k = 0; k < ticks; ++k) {
    copy.step(ctx);
    out.push_back(copy.agent(id).pose);
  }
  return out;
}

PerspectiveRollout PerspectiveRollout::detached() const {
  PerspectiveRollout copy(observer_, perspective_, agents_, tick_);
  copy.task_ = task_;
  copy.record_history_ = false;
  return copy;
}

PerspectiveRollout PerspectiveRollout::reconstruct_at(int tick, const PredictionContext& ctx) const {
  if (tick == tick_) return detached();
  if (tick < start_tick_ || tick > tick_) throw PreconditionError("reconstruct_at: tick outside history");
  std::vector<AgentState> agents;
  agents.reserve(agents_.size());
  for (const auto& now : agents_) {
    const AgentSnapshot& s = snapshot_at(now.id, tick);
    AgentState a;
    a.id = now.id;
    a.pose = s.pose;
    a.behavior = s.behavior;
    a.target_cell = s.target_cell;
    a.exploration_complete = s.exploration_complete;
    a.needs_target = false;
    a.map = BeliefMap::unknown(ctx.grid);
    for (int t = start_tick_; t < tick; ++t) {
      if (!is_scan_tick(t, ctx.params)) continue;
      integrate_cells(a.map, cast_rays(ctx.grid, ctx.prior_cells, snapshot_at(a.id, t).pose.position(),
                                       ctx.specs[a.id].sensing_range, ctx.params.n_rays));
    }
    if (s.task_known && task_) {
      a.map.task_known = true;
      a.map.task_position = task_;
    }
    agents.push_back(std::move(a));
  }
  PerspectiveRollout out(observer_, perspective_, std::move(agents), tick);
  out.task_ = task_;
  out.record_history_ = false;
  return out;
}

ParticleStore::ParticleStore(int observer, std::vector<std::optional<PerspectiveRollout>> perspectives)
    : observer_(observer), perspectives_(std::move(perspectives)) {}

std::vector<Vec2> ParticleStore::first_order_positions() const {
  std::vector<Vec2> out;
  for (int j = 0; j < team_size(); ++j) {
    if (j != observer_) out.push_back(first_order(j).pose.position());
  }
  return out;
}

void ParticleStore::step(const PredictionContext& ctx) {
  for (auto& p : perspectives_) {
    if (p) p->step(ctx);
  }
}

void ParticleStore::set_task(Vec2 task) {
  for (auto& p : perspectives_) {
    if (p) p->set_task(task);
  }
}

ParticleStore init_particles(int observer, const std::vector<Pose>& initial_poses, const PredictionContext& ctx,
                             int tick) {
  const int n = static_cast<int>(initial_poses.size());
  if (n != ctx.team_size()) throw PreconditionError("init_particles: pose count differs from team size");
  std::vector<AgentState> agents;
  for (int id = 0; id < n; ++id) {
    AgentState a;
    a.id = id;
    a.pose = initial_poses[id];
    a.map = BeliefMap::unknown(ctx.grid);
    agents.push_back(std::move(a));
  }
  std::vector<std::optional<PerspectiveRollout>> perspectives(n);
  for (int j = 0; j < n; ++j) {
    if (j != observer) perspectives[j].emplace(observer, j, agents, tick);
  }
  return ParticleStore(observer, std::move(perspectives));
}

ParticleCounts count_particles(const ParticleStore& store) {
  ParticleCounts c;
  for (int j = 0; j < store.team_size(); ++j) {
    if (!store.has_perspective(j)) continue;
    c.first += 1;
    c.second += 1;
    c.third += store.team_size() - 2;
  }
  return c;
}

std::vector<BeliefParticle> materialize_particles(const ParticleStore& store, int H, const PredictionContext& ctx) {
  std::vector<BeliefParticle> out;
  const int n = store.team_size();
  for (int j = 0; j < n; ++j) {
    if (!store.has_perspective(j)) continue;
    const PerspectiveRollout& live = store.perspective(j);
    PerspectiveRollout copy = live.detached();
    std::vector<std::vector<Pose>> traj(n);
    for (int id = 0; id < n; ++id) traj[id].push_back(copy.agent(id).pose);
    for (int k = 0; k < H; ++k) {
      copy.step(ctx);
      for (int id = 0; id < n; ++id) traj[id].push_back(copy.agent(id).pose);
    }
    for (int id = 0; id < n; ++id) {
      BeliefParticle p;
      p.observer = store.observer();
      p.subject = j;
      if (id == j) {
        p.order = 1;
      } else {
        p.order = id == store.observer() ? 2 : 3;
        p.nested_subject = id;
      }
      p.behavior_hypothesis = live.agent(id).behavior;
      p.start_tick = live.tick();
      p.trajectory = std::move(traj[id]);
      p.head = copy.agent(id);
      p.head_peers = peer_positions(copy.agents(), id);
      p.believed_map = p.head.map;
      out.push_back(std::move(p));
    }
  }
  return out;
}

BeliefParticle propagate_particle(BeliefParticle p, const PredictionContext& ctx) {
  const int tick = p.start_tick + static_cast<int>(p.trajectory.size()) - 1;
  AgentState& a = p.head;
  const RobotSpec& spec = ctx.specs.at(a.id);
  if (is_scan_tick(tick, ctx.params)) sense_prior(a, spec, ctx);
  update_decisions(a, tick, p.head_peers, ctx.params);
  move_agent(a, spec, ctx);
  p.trajectory.push_back(a.pose);
  p.trajectory.erase(p.trajectory.begin());
  ++p.start_tick;
  p.believed_map = a.map;
  return p;
}

double residual(const Pose& predicted, const Pose& observed) {
  return distance(predicted.position(), observed.position());
}

ObservationUpdate apply_observation(ParticleStore& store, int peer, const Pose& observed, const Pose& self_actual,
                                    bool peer_sees_self, double delta, double time_s, const PredictionContext& ctx,
                                    bool model_reactions, Motion moving) {
  PerspectiveRollout& view = store.perspective(peer);
  AgentState& peer_model = view.agent(peer);
  AgentState& self_model = view.agent(store.observer());
  ObservationUpdate out;
  out.residual = residual(peer_model.pose, observed);
  out.predicted_peer_surprise = peer_sees_self ? residual(self_model.pose, self_actual) : 0.0;
  const double expiry = time_s + ctx.params.repulse_duration_s;
  if (model_reactions) {
    if (out.residual > delta && moving.peer && self_model.behavior.is_exploring()) {
      set_behavior(self_model, BehaviorPrimitive::modified_explore(peer, observed.position(), expiry));
    }
    if (out.predicted_peer_surprise > delta && moving.self && peer_model.behavior.is_exploring()) {
      set_behavior(peer_model,
                   BehaviorPrimitive::modified_explore(store.observer(), self_actual.position(), expiry));
    }
  }
  peer_model.pose = observed;
  if (peer_sees_self) self_model.pose = self_actual;
  return out;
}

std::optional<EmpathyWaypoint> empathy_waypoint(const ParticleStore& store, const Pose& actual, double delta_e,
                                                int catchup_ticks, const PredictionContext& ctx) {
  int best = -1;
  double best_dev = 0.0;
  for (int j = 0; j < store.team_size(); ++j) {
    if (!store.has_perspective(j)) continue;
    // An expectation that has run out of frontiers is idle; there is nothing to rejoin.
    const AgentState& model = store.second_order(j);
    if (model.exploration_complete || !model.behavior.is_exploring()) continue;
    const double dev = residual(model.pose, actual);
    if (best < 0 || dev < best_dev) {
      best = j;
      best_dev = dev;
    }
  }
  if (best < 0 || !(best_dev > delta_e)) return std::nullopt;
  const PerspectiveRollout& view = store.perspective(best);
  const auto traj = view.forecast(store.observer(), catchup_ticks, ctx);
  return EmpathyWaypoint{traj.back().position(), best, view.tick() + catchup_ticks, best_dev};
}

}  // namespace epicoord
