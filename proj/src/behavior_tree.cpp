#include "epicoord/behavior_tree.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "epicoord/error.hpp"
#include "epicoord/intercept_mppi.hpp"

namespace epicoord {

void TreeSearchConfig::validate() const {
  if (depth_limit < 1) throw ConfigError("tree search: depth_limit must be at least 1");
  if (!(horizon_s > 0.0)) throw ConfigError("tree search: horizon must be positive");
  if (!(completion_radius > 0.0)) throw ConfigError("tree search: completion_radius must be positive");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("tree search: alpha must lie in (0, 1]");
  if (!(sigma > 0.0)) throw ConfigError("tree search: sigma must be positive");
  if (!(min_fetch_gain >= 0.0 && min_fetch_gain < 1.0)) throw ConfigError("tree search: min_fetch_gain must lie in [0, 1)");
}

std::optional<double> estimate_discovery_time(std::span<const Pose> poses, int start_tick, double dt, Vec2 task,
                                              double range, const LosPredicate& los) {
  for (std::size_t k = 0; k < poses.size(); ++k) {
    const Vec2 p = poses[k].position();
    if (distance(p, task) > range) continue;
    if (los && !los(p, task)) continue;
    return (start_tick + static_cast<int>(k)) * dt;
  }
  return std::nullopt;
}

namespace {

std::vector<int> required_or_all(const TreeSearchConfig& cfg, int n) {
  if (!cfg.required.empty()) return cfg.required;
  std::vector<int> all(n);
  for (int k = 0; k < n; ++k) all[k] = k;
  return all;
}

int horizon_ticks(const TreeSearchConfig& cfg, double dt) { return static_cast<int>(std::lround(cfg.horizon_s / dt)); }

}  // namespace

double mission_time(const std::map<int, double>& per_robot, const std::vector<int>& required) {
  double m = 0.0;
  for (int k : required) m = std::max(m, per_robot.at(k));
  return m;
}

RolloutOutcome simulate_completions(const PerspectiveRollout& context, Vec2 task, const RolloutPlan& plan,
                                    const TreeSearchConfig& cfg, const PredictionContext& ctx) {
  const double dt = ctx.params.dt;
  PerspectiveRollout r = context.detached();
  r.set_task(task);
  const int n = r.team_size();
  const int t0 = r.tick();
  const int cap_tick = t0 + horizon_ticks(cfg, dt);
  const auto required = required_or_all(cfg, n);

  std::vector<std::optional<double>> done(n);
  for (const auto& [k, t] : plan.fixed_completion) done.at(k) = t;
  std::vector<bool> applied(plan.injections.size(), false);
  RolloutOutcome out;
  if (plan.record) out.recorded.resize(n);

  auto observe = [&] {
    for (int k = 0; k < n; ++k) {
      const AgentState& a = r.agent(k);
      if (!done[k] && distance(a.pose.position(), task) <= cfg.completion_radius) done[k] = r.tick() * dt;
      if (plan.record && !a.map.task_known) out.recorded[k].push_back(a.pose);
    }
  };
  auto inject = [&] {
    for (std::size_t q = 0; q < plan.injections.size(); ++q) {
      const auto& in = plan.injections[q];
      if (applied[q] || in.tick > r.tick()) continue;
      applied[q] = true;
      AgentState& a = r.agent(in.agent);
      if (a.behavior.is_exploring() && !a.map.task_known) {
        set_behavior(a, BehaviorPrimitive::modified_explore(in.from, in.repel_point,
                                                            r.tick() * dt + ctx.params.repulse_duration_s));
      }
    }
  };
  auto finished = [&] {
    bool pending_injection = false;
    for (std::size_t q = 0; q < applied.size(); ++q) pending_injection |= !applied[q];
    bool all_done = true;
    bool stuck = true;
    for (int k : plan.track.empty() ? required : plan.track) {
      if (done[k]) continue;
      all_done = false;
      const AgentState& a = r.agent(k);
      if (a.map.task_known || !a.exploration_complete) stuck = false;
    }
    if (all_done) return true;
    // Agents that finished exploring without meeting the task never will.
    return stuck && !pending_injection;
  };

  observe();
  while (r.tick() < cap_tick && !finished()) {
    inject();
    r.step(ctx);
    observe();
  }
  out.completion_s.resize(n);
  for (int k = 0; k < n; ++k) out.completion_s[k] = done[k] ? *done[k] : cap_tick * dt;
  return out;
}

double completion_time(int k, const PerspectiveRollout& context, Vec2 task, const TreeSearchConfig& cfg,
                       const PredictionContext& ctx) {
  return simulate_completions(context, task, {}, cfg, ctx).completion_s.at(k);
}

namespace {

// Agents are grouped by the rollout that predicts them; one rollout per group per plan.
struct ViewGroup {
  const PerspectiveRollout* source = nullptr;
  std::vector<int> agents;
  PerspectiveRollout prepared;
  RolloutOutcome nominal;
};

struct Views {
  std::vector<ViewGroup> groups;
  std::vector<int> group_of;
};

RolloutPlan restricted(const RolloutPlan& base, const std::vector<int>& agents, const std::vector<int>& required) {
  auto in = [&](int k) { return std::find(agents.begin(), agents.end(), k) != agents.end(); };
  RolloutPlan plan;
  for (const auto& inj : base.injections) {
    if (in(inj.agent)) plan.injections.push_back(inj);
  }
  for (const auto& [k, t] : base.fixed_completion) {
    if (in(k)) plan.fixed_completion[k] = t;
  }
  for (int k : required) {
    if (in(k)) plan.track.push_back(k);
  }
  plan.record = base.record;
  return plan;
}

RolloutOutcome run_group(const ViewGroup& g, Vec2 task, const RolloutPlan& plan, const TreeSearchConfig& cfg,
                         const PredictionContext& ctx) {
  if (plan.track.empty()) {
    // Nobody predicted here matters for the mission.
    RolloutOutcome out;
    out.completion_s.assign(g.prepared.team_size(), (g.prepared.tick() + horizon_ticks(cfg, ctx.params.dt)) * ctx.params.dt);
    if (plan.record) out.recorded.resize(g.prepared.team_size());
    return out;
  }
  return simulate_completions(g.prepared, task, plan, cfg, ctx);
}

Views prepare_views(int decider, const std::vector<const PerspectiveRollout*>& views, Vec2 task,
                    const std::vector<bool>& known, const RolloutPlan& base, const TreeSearchConfig& cfg,
                    const PredictionContext& ctx) {
  const int n = static_cast<int>(views.size());
  const auto required = required_or_all(cfg, n);
  Views v;
  v.group_of.resize(n);
  for (int k = 0; k < n; ++k) {
    auto it = std::find_if(v.groups.begin(), v.groups.end(), [&](const ViewGroup& g) { return g.source == views[k]; });
    if (it == v.groups.end()) {
      v.groups.push_back({views[k], {}, views[k]->detached(), {}});
      it = std::prev(v.groups.end());
    }
    it->agents.push_back(k);
    v.group_of[k] = static_cast<int>(it - v.groups.begin());
  }
  for (auto& g : v.groups) {
    for (int k : g.agents) {
      if ((k == decider || known.at(k)) && !g.prepared.agent(k).map.task_known) adopt_task(g.prepared.agent(k), task);
    }
    RolloutPlan plan = restricted(base, g.agents, required);
    plan.record = true;
    g.nominal = run_group(g, task, plan, cfg, ctx);
  }
  return v;
}

std::map<int, double> nominal_completions(const Views& v) {
  std::map<int, double> m;
  for (int k = 0; k < static_cast<int>(v.group_of.size()); ++k) {
    m[k] = v.groups[v.group_of[k]].nominal.completion_s.at(k);
  }
  return m;
}

BehaviorEvaluation fetch_in_views(int fetcher, int target, const Views& v, Vec2 task, const TreeSearchConfig& cfg,
                                  const PredictionContext& ctx, const RolloutPlan& base) {
  const double dt = ctx.params.dt;
  const RobotSpec& fs = ctx.specs.at(fetcher);
  const double S = ctx.specs.at(target).sensing_range;
  const ViewGroup& own = v.groups[v.group_of.at(fetcher)];
  const ViewGroup& tg = v.groups[v.group_of.at(target)];
  const Pose start = own.prepared.agent(fetcher).pose;
  const int t0 = own.prepared.tick();
  const auto required = required_or_all(cfg, static_cast<int>(v.group_of.size()));

  BehaviorEvaluation ev;
  ev.behavior = BehaviorPrimitive::fetch(target);
  ev.per_robot_completion = nominal_completions(v);
  auto cands = candidate_intercepts(tg.nominal.recorded.at(target), t0, task, S, cfg.sigma, start, fs.v_max_burst,
                                    fs.omega_max, dt);
  std::erase_if(cands, [&](const InterceptCandidate& c) { return !ctx.grid.contains(c.point); });
  const auto best = earliest_feasible(cands, t0, cfg.alpha, dt);
  if (!best) {
    ev.per_robot_completion[fetcher] = (t0 + horizon_ticks(cfg, dt)) * dt;
    ev.mission_time = mission_time(ev.per_robot_completion, required);
    return ev;
  }
  ev.intercept = best;
  const Vec2 heading = unit_direction(start.position(), best->point).value_or(start.heading());
  const Pose at_int{best->point.x, best->point.y, std::atan2(heading.y, heading.x)};
  const double fetcher_done = best->tau * dt + dubins_time(at_int, task, fs.v_max_burst, fs.omega_max);
  RolloutPlan plan = restricted(base, tg.agents, required);
  plan.record = false;
  plan.injections.push_back({target, best->tau, best->point, fetcher});
  plan.fixed_completion[fetcher] = fetcher_done;
  const RolloutOutcome res = run_group(tg, task, plan, cfg, ctx);
  for (int k : tg.agents) ev.per_robot_completion[k] = res.completion_s.at(k);
  ev.per_robot_completion[fetcher] = fetcher_done;
  ev.mission_time = mission_time(ev.per_robot_completion, required);
  return ev;
}

std::vector<const PerspectiveRollout*> shared(const PerspectiveRollout& context) {
  return std::vector<const PerspectiveRollout*>(context.team_size(), &context);
}

}  // namespace

BehaviorEvaluation fetch_evaluation(int fetcher, int target, const PerspectiveRollout& context, Vec2 task,
                                    const TreeSearchConfig& cfg, const PredictionContext& ctx,
                                    const RolloutPlan& base) {
  std::vector<bool> known(context.team_size(), false);
  const Views v = prepare_views(fetcher, shared(context), task, known, base, cfg, ctx);
  return fetch_in_views(fetcher, target, v, task, cfg, ctx, base);
}

std::vector<BehaviorEvaluation> evaluate_behaviors(int decider, const std::vector<const PerspectiveRollout*>& views,
                                                   Vec2 task, const std::vector<bool>& known,
                                                   const std::map<int, int>& claimed, const RolloutPlan& base,
                                                   const TreeSearchConfig& cfg, const PredictionContext& ctx) {
  const Views v = prepare_views(decider, views, task, known, base, cfg, ctx);
  const auto required = required_or_all(cfg, static_cast<int>(views.size()));

  std::vector<BehaviorEvaluation> out;
  BehaviorEvaluation c;
  c.behavior = BehaviorPrimitive::complete_task();
  c.per_robot_completion = nominal_completions(v);
  c.mission_time = mission_time(c.per_robot_completion, required);
  out.push_back(c);

  for (int k : required) {
    if (k == decider || known.at(k)) continue;
    if (auto it = claimed.find(k); it != claimed.end()) {
      BehaviorEvaluation p;
      p.behavior = BehaviorPrimitive::fetch(k);
      p.per_robot_completion = c.per_robot_completion;
      p.mission_time = c.mission_time;
      p.pruned = true;
      p.reason = "fetch of robot " + std::to_string(k) + " credited to robot " + std::to_string(it->second);
      out.push_back(std::move(p));
      continue;
    }
    out.push_back(fetch_in_views(decider, k, v, task, cfg, ctx, base));
  }
  return out;
}

std::vector<BehaviorEvaluation> evaluate_behaviors(int decider, const PerspectiveRollout& context, Vec2 task,
                                                   const std::vector<bool>& known,
                                                   const std::map<int, int>& claimed, const RolloutPlan& base,
                                                   const TreeSearchConfig& cfg, const PredictionContext& ctx) {
  return evaluate_behaviors(decider, shared(context), task, known, claimed, base, cfg, ctx);
}

PerspectiveRollout self_view(const ParticleStore& store, const AgentState& self, int tick) {
  const int n = std::max(store.team_size(), self.id + 1);
  std::vector<AgentState> agents;
  agents.reserve(n);
  for (int k = 0; k < n; ++k) agents.push_back(k == self.id ? self : store.first_order(k));
  PerspectiveRollout r(self.id, self.id, std::move(agents), tick);
  r.set_record_history(false);
  return r;
}

TreeResult evaluate_tree(const AgentState& self, const EpistemicState& epistemic, const ParticleStore& store,
                         int tick, const TreeSearchConfig& cfg, const PredictionContext& ctx,
                         std::optional<OwnFetch> own) {
  if (!self.map.task_known || !self.map.task_position) {
    throw PreconditionError("evaluate_tree: self has not discovered the task");
  }
  const Vec2 task = *self.map.task_position;
  const int n = ctx.team_size();
  const double dt = ctx.params.dt;

  struct Discoverer {
    int tick;
    int robot;
  };
  std::vector<Discoverer> discoverers;
  std::vector<bool> known(n, false);
  for (int k = 0; k < n; ++k) {
    if (k == self.id || !epistemic.bit(k)) continue;
    known[k] = true;
    if (!store.has_perspective(k)) continue;
    const PerspectiveRollout& view = store.perspective(k);
    std::vector<Pose> poses;
    for (const auto& s : view.history(k)) poses.push_back(s.pose);
    poses.push_back(view.agent(k).pose);
    const auto t = estimate_discovery_time(poses, view.start_tick(), dt, task, ctx.specs[k].sensing_range);
    if (t) discoverers.push_back({static_cast<int>(std::lround(*t / dt)), k});
  }
  std::sort(discoverers.begin(), discoverers.end(),
            [](const Discoverer& a, const Discoverer& b) { return std::tie(a.tick, a.robot) < std::tie(b.tick, b.robot); });

  TreeResult result;
  std::map<int, int> claimed;
  RolloutPlan base;
  if (cfg.depth_limit >= 2) {
    for (const auto& d : discoverers) {
      if (own && std::tie(own->discovery_tick, self.id) < std::tie(d.tick, d.robot) && !claimed.count(own->target)) {
        claimed[own->target] = self.id;
      }
      const PerspectiveRollout then = store.perspective(d.robot).reconstruct_at(d.tick, ctx);
      std::vector<bool> known_then(n, false);
      ReplayedDecision rep;
      rep.robot = d.robot;
      rep.discovery_tick = d.tick;
      rep.evaluations = evaluate_behaviors(d.robot, then, task, known_then, claimed, {}, cfg, ctx);
      rep.chosen = select_behavior(rep.evaluations, cfg.min_fetch_gain);
      if (rep.chosen.tag == BehaviorTag::Fetch) {
        const int m = rep.chosen.robot;
        const auto& ev = *std::find_if(rep.evaluations.begin(), rep.evaluations.end(),
                                       [&](const BehaviorEvaluation& e) { return e.behavior == rep.chosen; });
        if (!claimed.count(m)) {
          claimed[m] = d.robot;
          if (m != self.id && ev.intercept) base.injections.push_back({m, std::max(ev.intercept->tau, tick), ev.intercept->point, d.robot});
          base.fixed_completion[d.robot] = std::max(ev.per_robot_completion.at(d.robot), tick * dt);
        }
      }
      result.replays.push_back(std::move(rep));
    }
  }
  std::vector<bool> known_self = known;
  known_self[self.id] = true;
  std::erase_if(claimed, [&](const auto& kv) { return kv.second == self.id; });
  // Each peer is predicted from its own perspective, the decider from its true state.
  const PerspectiveRollout mine = self_view(store, self, tick);
  std::vector<const PerspectiveRollout*> views(n, &mine);
  for (int k = 0; k < n; ++k) {
    if (k != self.id && store.has_perspective(k)) views[k] = &store.perspective(k);
  }
  result.evaluations = evaluate_behaviors(self.id, views, task, known_self, claimed, base, cfg, ctx);
  result.chosen = select_behavior(result.evaluations, cfg.min_fetch_gain);
  return result;
}

BehaviorPrimitive select_behavior(const std::vector<BehaviorEvaluation>& evaluations, double min_fetch_gain) {
  auto rank = [](const BehaviorPrimitive& b) {
    switch (b.tag) {
      case BehaviorTag::CompleteTask: return std::make_pair(0, 0);
      case BehaviorTag::Fetch: return std::make_pair(1, b.robot);
      default: return std::make_pair(2, b.robot);
    }
  };
  const BehaviorEvaluation* stay = nullptr;
  for (const auto& e : evaluations) {
    if (!e.pruned && e.behavior.tag == BehaviorTag::CompleteTask) stay = &e;
  }
  const BehaviorEvaluation* best = nullptr;
  for (const auto& e : evaluations) {
    if (e.pruned) continue;
    if (e.behavior.tag == BehaviorTag::Fetch && stay && e.mission_time > (1.0 - min_fetch_gain) * stay->mission_time) {
      continue;
    }
    if (!best || e.mission_time < best->mission_time ||
        (e.mission_time == best->mission_time && rank(e.behavior) < rank(best->behavior))) {
      best = &e;
    }
  }
  return best ? best->behavior : BehaviorPrimitive::complete_task();
}

}  // namespace epicoord
