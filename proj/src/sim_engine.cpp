#include "epicoord/sim_engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "epicoord/error.hpp"
#include "epicoord/navigation.hpp"

namespace epicoord {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr double kWaypointReach = 0.3;  // m
constexpr int kStuckTicks = 100;
constexpr double kStuckDistance = 0.5;  // m
constexpr double kMovingSpeed = 0.05;   // m/s

struct FetchState {
  int target = 0;
  InterceptCandidate x;
  int attempts = 1;
  std::vector<ControlInput> nominal;
  bool await_clear = false;  // the target must leave mutual view before the next judgment
};

struct EmpathyReturn {
  Vec2 point;
  int perspective = 0;
  int arrive_tick = 0;
  bool reached = false;
};

struct Robot {
  RobotSpec spec;
  AgentState agent;
  ParticleStore store;
  HypothesisTable table;
  EventDetector detector;
  std::optional<FetchState> fetch;
  std::optional<EmpathyReturn> empathy;
  bool pending_eval = false;
  int discovery_tick = 0;
  std::optional<double> last_eval_s;
  std::vector<SeenRobot> seen;
  std::vector<bool> mutual;  // seen robots that can also see us

  std::vector<Vec2> path;
  std::optional<Vec2> path_goal;
  int force_path_until = -1;
  Vec2 anchor;
  int anchor_tick = 0;
  ClearanceField clearance;
  int clearance_tick = -1;
};

class Simulation {
 public:
  Simulation(const ScenarioConfig& cfg, const ScenarioInstance& inst) : cfg_(cfg), inst_(inst) {
    const int n = cfg_.team_size();
    std::vector<RobotSpec> specs;
    for (const auto& r : cfg_.robots) specs.push_back(r.spec);
    ExplorationParams params = cfg_.exploration;
    params.dt = cfg_.dt;
    cfg_.exploration = params;
    cfg_.tree.completion_radius = cfg_.completion_radius;
    cfg_.tree.required = cfg_.required;
    cfg_.tree.alpha = cfg_.mppi.alpha;
    cfg_.tree.sigma = cfg_.mppi.sigma_offset;
    ctx_ = PredictionContext::make(inst_.world.grid, specs, params);
    poses_ = inst_.starts;
    moving_.assign(poses_.size(), false);
    for (int i = 0; i < n; ++i) {
      Robot r;
      r.spec = specs[i];
      r.agent.id = i;
      r.agent.pose = poses_[i];
      r.agent.map = BeliefMap::unknown(inst_.world.grid);
      r.store = init_particles(i, inst_.starts, ctx_);
      r.table = set_own_bit(HypothesisTable::uniform(n), i, false);
      r.detector = EventDetector(i, n);
      r.anchor = poses_[i].position();
      robots_.push_back(std::move(r));
    }
    log_.config = cfg_;
    log_.instance = inst_;
  }

  TrialLog run() {
    const int n = cfg_.team_size();
    const auto required = cfg_.required_set();
    int t = 0;
    for (;; ++t) {
      TickRecord rec;
      rec.tick = t;
      rec.poses = poses_;
      bool all_in = true;
      for (int k : required) {
        all_in = all_in && distance(poses_[k].position(), inst_.world.task_position) <= cfg_.completion_radius;
      }
      if (all_in) {
        log_.outcome.completed = true;
        log_.outcome.completion_time_s = t * cfg_.dt;
        fill_state(rec);
        log_.ticks.push_back(std::move(rec));
        break;
      }
      if (t * cfg_.dt >= cfg_.max_duration_s - 1e-9) {
        fill_state(rec);
        log_.ticks.push_back(std::move(rec));
        break;
      }
      for (int i = 0; i < n; ++i) perceive(i, t, rec.events);
      for (int i = 0; i < n; ++i) decide(i, t);
      std::vector<ControlInput> u(n);
      for (int i = 0; i < n; ++i) u[i] = control(i, t, rec.events);
      move(u);
      for (auto& r : robots_) r.store.step(ctx_);
      fill_state(rec);
      log_.ticks.push_back(std::move(rec));
    }
    log_.outcome.ticks = t;
    return std::move(log_);
  }

 private:
  bool epistemic() const { return cfg_.policy == PolicyKind::Epistemic; }
  Vec2 task() const { return inst_.world.task_position; }
  int horizon_ticks() const { return static_cast<int>(std::lround(cfg_.tree.horizon_s / cfg_.dt)); }

  void fill_state(TickRecord& rec) const {
    for (const auto& r : robots_) {
      rec.behaviors.push_back(r.agent.behavior);
      rec.epistemic.push_back(epistemic() ? to_string(map_hypothesis(r.table)) : std::string());
    }
    if (!cfg_.verbose) return;
    const int n = cfg_.team_size();
    for (int i = 0; i < n; ++i) {
      std::vector<Pose> est(n);
      std::vector<Pose> emp(n);
      for (int j = 0; j < n; ++j) {
        est[j] = j == i ? robots_[i].agent.pose : robots_[i].store.first_order(j).pose;
        emp[j] = j == i ? robots_[i].agent.pose : robots_[i].store.second_order(j).pose;
      }
      rec.estimates.push_back(std::move(est));
      rec.empathy.push_back(std::move(emp));
    }
  }

  void emit(Robot& r, const Event& e, std::vector<LoggedEvent>& events) {
    events.push_back({r.agent.id, e});
    handle_event(r, e);
  }

  void perceive(int i, int t, std::vector<LoggedEvent>& events) {
    Robot& r = robots_[i];
    const Pose me = poses_[i];
    r.agent.pose = me;
    const bool scan_tick = is_scan_tick(t, cfg_.exploration);
    const SensorScan scan =
        sense(inst_.world, poses_, i, r.spec.sensing_range, scan_tick ? cfg_.exploration.n_rays : 0);
    if (scan_tick) {
      integrate_cells(r.agent.map, scan.revealed);
      r.clearance_tick = -1;
    }
    r.seen = scan.robots_seen;

    EventDetector::Inputs in;
    in.scan = &scan;
    in.store = &r.store;
    in.own_map = &r.agent.map;
    in.self_pose = me;
    in.sensing_range = r.spec.sensing_range;
    in.known_task = r.agent.map.task_position;
    in.delta = cfg_.delta;
    in.tick = t;
    const auto detected = r.detector.detect(in);

    std::vector<bool> mutual(cfg_.team_size(), false);
    for (const auto& s : scan.robots_seen) {
      const double peer_range = cfg_.robots[s.id].spec.sensing_range;
      mutual[s.id] = distance(s.pose.position(), me.position()) <= peer_range &&
                     line_of_sight(r.agent.map.grid, r.agent.map.cells, s.pose.position(), me.position());
      const auto upd = apply_observation(r.store, s.id, s.pose, me, mutual[s.id], cfg_.delta, t * cfg_.dt, ctx_,
                                         epistemic(), {moving_[s.id], moving_[i]});
      if (epistemic() && upd.residual > cfg_.delta && moving_[s.id] && r.agent.behavior.is_exploring() &&
          !r.agent.map.task_known) {
        set_behavior(r.agent, BehaviorPrimitive::modified_explore(
                                  s.id, s.pose.position(), t * cfg_.dt + cfg_.exploration.repulse_duration_s));
        r.empathy.reset();
      }
    }
    r.mutual = mutual;
    for (const auto& e : detected) emit(r, e, events);

    if (epistemic() && r.fetch) {
      FetchState& f = *r.fetch;
      if (!mutual[f.target]) {
        f.await_clear = false;
      } else if (!f.await_clear) {
        judge(r, t, events);
      }
    }
  }

  void handle_event(Robot& r, const Event& e) {
    if (!epistemic()) {
      if (e.kind == EventKind::TaskDiscovered) {
        adopt_task(r.agent, task());
        r.store.set_task(task());
        r.path.clear();
      }
      return;
    }
    if (e.kind == EventKind::TaskDiscovered) {
      r.discovery_tick = e.tick;
      r.agent.map.task_known = true;
      r.agent.map.task_position = task();
      r.table = set_own_bit(r.table, r.agent.id, true);
      r.store.set_task(task());
      for (const auto& [j, zeta] : infer_task_knowledge(r.agent.map, r.store, task())) {
        r.table = bayes_update(r.table, j, zeta, cfg_.p_plus, cfg_.p_minus, cfg_.bayes_mode);
        if (zeta) r.detector.mark_predicted_found(j);
      }
      set_behavior(r.agent, BehaviorPrimitive::complete_task());
      r.empathy.reset();
      r.path.clear();
      r.pending_eval = true;
      return;
    }
    const auto zeta = evidence_of(e.kind);
    if (!zeta) return;
    r.table = bayes_update(r.table, e.subject, *zeta, cfg_.p_plus, cfg_.p_minus, cfg_.bayes_mode);
    if (!r.agent.map.task_known) return;
    r.pending_eval = true;
  }

  std::optional<InterceptCandidate> reselect_intercept(Robot& r, int target, int t) {
    const auto pred = r.store.perspective(target).forecast(target, horizon_ticks(), ctx_);
    auto cands = candidate_intercepts(pred, t, task(), cfg_.robots[target].spec.sensing_range,
                                      cfg_.mppi.sigma_offset, r.agent.pose, r.spec.v_max_burst, r.spec.omega_max,
                                      cfg_.dt);
    std::erase_if(cands, [&](const InterceptCandidate& c) { return !inst_.world.grid.contains(c.point); });
    return earliest_feasible(cands, t, cfg_.mppi.alpha, cfg_.dt);
  }

  void abandon_fetch(Robot& r) {
    r.fetch.reset();
    set_behavior(r.agent, BehaviorPrimitive::complete_task());
    r.path.clear();
    r.pending_eval = true;
  }

  void judge(Robot& r, int t, std::vector<LoggedEvent>& events) {
    FetchState& f = *r.fetch;
    const int k = f.target;
    const auto pred = r.store.perspective(k).forecast(k, horizon_ticks(), ctx_);
    const bool ok = judge_intercept(pred, t, task(), cfg_.mppi.kappa, cfg_.robots[k].spec, cfg_.dt);
    emit(r, {ok ? EventKind::InterceptSucceeded : EventKind::InterceptFailed, k, t}, events);
    if (ok) {
      ++log_.outcome.fetch_successes;
      abandon_fetch(r);
      return;
    }
    retry(r, t, /*in_view=*/true);
  }

  void retry(Robot& r, int t, bool in_view) {
    FetchState& f = *r.fetch;
    if (++f.attempts > cfg_.mppi.max_attempts) {
      abandon_fetch(r);
      return;
    }
    const auto next = reselect_intercept(r, f.target, t);
    if (!next) {
      abandon_fetch(r);
      return;
    }
    f.x = *next;
    f.nominal.clear();
    f.await_clear = in_view;
  }

  void decide(int i, int t) {
    Robot& r = robots_[i];
    if (!epistemic() || !r.agent.map.task_known || !r.pending_eval) return;
    if (r.last_eval_s && t * cfg_.dt - *r.last_eval_s < cfg_.replan_interval_s - 1e-9) return;
    r.pending_eval = false;
    r.last_eval_s = t * cfg_.dt;
    std::optional<OwnFetch> own;
    if (r.fetch) own = OwnFetch{r.discovery_tick, r.fetch->target};
    TreeResult res = evaluate_tree(r.agent, map_hypothesis(r.table), r.store, t, cfg_.tree, ctx_, own);
    const BehaviorPrimitive chosen = res.chosen;
    if (chosen.tag == BehaviorTag::Fetch) {
      const auto it = std::find_if(res.evaluations.begin(), res.evaluations.end(),
                                   [&](const BehaviorEvaluation& e) { return e.behavior == chosen; });
      if (!r.fetch || r.fetch->target != chosen.robot) {
        if (it != res.evaluations.end() && it->intercept) {
          // A target already in mutual view is judged only after it has left it once.
          r.fetch = FetchState{chosen.robot, *it->intercept, 1, {}, r.mutual[chosen.robot]};
          set_behavior(r.agent, chosen);
          ++log_.outcome.fetches_started;
        }
      }
    } else {
      if (r.fetch) r.fetch.reset();
      if (!(r.agent.behavior == chosen)) {
        set_behavior(r.agent, chosen);
        r.path.clear();
      }
    }
    log_.decisions.push_back({t, i, std::move(res)});
  }

  std::optional<ControlInput> navigate(Robot& r, Vec2 goal, double speed, int t, bool avoid_robots = false) {
    const Pose& me = r.agent.pose;
    const BeliefMap* m = &r.agent.map;
    BeliefMap with_robots;
    if (avoid_robots && !r.seen.empty()) {
      // Teammates' cells count as obstacles, except the cells we start and end in.
      with_robots = r.agent.map;
      const auto mine = m->grid.index_of(me.position());
      const auto target = m->grid.index_of(goal);
      for (const auto& s : r.seen) {
        const auto c = m->grid.index_of(s.pose.position());
        if (c && c != mine && c != target) with_robots.cells[*c] = Cell::Occupied;
      }
      m = &with_robots;
      r.path.clear();
    }
    if (t >= r.force_path_until && line_of_sight(m->grid, m->cells, me.position(), goal)) {
      r.path.clear();
      return track_waypoint(me, goal, speed, r.spec.omega_max, cfg_.dt, cfg_.exploration.gains);
    }
    if (r.path.empty() || !r.path_goal || !(*r.path_goal == goal) || is_scan_tick(t, cfg_.exploration)) {
      auto p = plan_path(*m, me.position(), goal);
      if (!p) {
        r.path.clear();
        return std::nullopt;
      }
      r.path = std::move(*p);
      r.path_goal = goal;
    }
    while (r.path.size() > 1 && distance(me.position(), r.path.front()) <= kWaypointReach) {
      r.path.erase(r.path.begin());
    }
    return track_waypoint(me, r.path.front(), speed, r.spec.omega_max, cfg_.dt, cfg_.exploration.gains);
  }

  std::optional<Vec2> task_goal(const Robot& r) const {
    const Vec2 g = task();
    const Vec2 me = r.agent.pose.position();
    const double d = distance(me, g);
    if (d <= cfg_.completion_radius - 0.15) return std::nullopt;
    if (d > 3.0) return g;
    const GridGeometry& grid = inst_.world.grid;
    const int mine = *grid.index_of(me);
    auto taken = [&](int cell) {
      if (cell == mine) return false;
      for (const auto& s : r.seen) {
        if (grid.index_of(s.pose.position()) == cell) return true;
      }
      return false;
    };
    const int task_cell = *grid.index_of(g);
    if (!taken(task_cell)) return g;
    // Nearest free slot inside the completion disk, one per neighboring cell.
    const CellCoord tc = grid.coord(task_cell);
    const double half = grid.resolution() / 2 - 0.1;
    std::optional<Vec2> best;
    for (int oy = -1; oy <= 1; ++oy) {
      for (int ox = -1; ox <= 1; ++ox) {
        const CellCoord c{tc.cx + ox, tc.cy + oy};
        if ((!ox && !oy) || !grid.in_bounds(c)) continue;
        const int idx = grid.index(c);
        if (r.agent.map.cells[idx] == Cell::Occupied || taken(idx)) continue;
        const Vec2 ctr = grid.center(idx);
        const Vec2 slot{std::clamp(g.x, ctr.x - half, ctr.x + half), std::clamp(g.y, ctr.y - half, ctr.y + half)};
        if (distance(slot, g) > cfg_.completion_radius - 0.05) continue;
        if (!best || distance(slot, me) < distance(*best, me)) best = slot;
      }
    }
    return best ? best : std::optional<Vec2>(g);
  }

  ControlInput explore_control(Robot& r, int t) {
    AgentState& a = r.agent;
    if (epistemic() && a.behavior.tag == BehaviorTag::Explore) {
      const int catchup = static_cast<int>(std::lround(cfg_.empathy_catchup_s / cfg_.dt));
      if (!r.empathy && is_scan_tick(t, cfg_.exploration)) {
        if (auto wp = empathy_waypoint(r.store, a.pose, cfg_.delta_e, catchup, ctx_)) {
          r.empathy = EmpathyReturn{wp->point, wp->perspective, wp->arrive_tick, false};
        }
      }
      if (r.empathy) {
        EmpathyReturn& em = *r.empathy;
        if (!em.reached && distance(a.pose.position(), em.point) <= kWaypointReach) em.reached = true;
        if (em.reached) {
          if (t < em.arrive_tick) return {};
          const AgentState& model = r.store.second_order(em.perspective);
          a.behavior = model.behavior;
          a.target_cell = model.target_cell;
          a.needs_target = model.target_cell < 0 || a.map.cells[model.target_cell] != Cell::Free;
          r.empathy.reset();
        } else if (t >= em.arrive_tick + catchup) {
          r.empathy.reset();
        } else if (auto u = navigate(r, em.point, r.spec.v_max_burst, t)) {
          return *u;
        } else {
          r.empathy.reset();
        }
      }
    }
    update_decisions(a, t, r.store.first_order_positions(), cfg_.exploration);
    const auto goal = goal_point(a, cfg_.exploration);
    if (!goal) return {};
    if (auto u = navigate(r, *goal, r.spec.v_nominal, t)) return *u;
    if (a.target_cell >= 0) a.blacklist.push_back(a.target_cell);
    a.target_cell = -1;
    a.needs_target = true;
    return {};
  }

  ControlInput fetch_control(Robot& r, int t, std::vector<LoggedEvent>& events) {
    FetchState& f = *r.fetch;
    const int timeout = static_cast<int>(std::lround(cfg_.intercept_timeout_s / cfg_.dt));
    if (t > f.x.tau + timeout) {
      emit(r, {EventKind::InterceptFailed, f.target, t}, events);
      retry(r, t, false);
      if (!r.fetch) return task_control(r, t);
    }
    const int k = f.target;
    const auto pred = r.store.perspective(k).forecast(k, cfg_.mppi.H_u, ctx_);
    MppiProblem pb;
    pb.start = r.agent.pose;
    pb.spec = r.spec;
    pb.x_int = f.x.point;
    pb.predicted_j = pred;
    pb.task = task();
    pb.S_j = cfg_.robots[k].spec.sensing_range;
    pb.dt = cfg_.dt;
    if (r.clearance_tick < 0) {
      r.clearance = ClearanceField(r.agent.map.grid, r.agent.map.cells, cfg_.mppi.safety_margin + 1.0);
      r.clearance_tick = t;
    }
    const auto nominal = f.nominal.empty() ? tracking_nominal(pb, cfg_.mppi.H_u) : f.nominal;
    const std::uint64_t seed = splitmix(cfg_.seed ^ splitmix((static_cast<std::uint64_t>(r.agent.id) << 32) ^
                                                             static_cast<std::uint64_t>(t)));
    MppiResult res = mppi_plan(pb, nominal, r.clearance, cfg_.mppi, seed);
    f.nominal = shift_sequence(res.controls);
    if (cfg_.verbose) {
      MppiRecord rec{t, r.agent.id, k, f.x.point, res.cost, std::vector<int>(10, 0)};
      const auto [lo, hi] = std::minmax_element(res.sampled_costs.begin(), res.sampled_costs.end());
      const double width = (*hi - *lo) / 10.0;
      for (double c : res.sampled_costs) {
        const int bin = width > 0 ? std::min(9, static_cast<int>((c - *lo) / width)) : 0;
        ++rec.histogram[bin];
      }
      log_.mppi.push_back(std::move(rec));
    }
    return res.controls.front();
  }

  ControlInput task_control(Robot& r, int t) {
    const auto goal = task_goal(r);
    if (!goal) return {};
    const bool near = distance(r.agent.pose.position(), task()) <= 3.0;
    return navigate(r, *goal, r.spec.v_nominal, t, near).value_or(ControlInput{});
  }

  ControlInput control(int i, int t, std::vector<LoggedEvent>& events) {
    Robot& r = robots_[i];
    ControlInput u;
    switch (r.agent.behavior.tag) {
      case BehaviorTag::CompleteTask: u = task_control(r, t); break;
      case BehaviorTag::Fetch: u = r.fetch ? fetch_control(r, t, events) : task_control(r, t); break;
      default: u = explore_control(r, t); break;
    }
    const Vec2 me = r.agent.pose.position();
    if (distance(me, r.anchor) > kStuckDistance || u.v == 0.0) {
      if (distance(me, r.anchor) > kStuckDistance || t - r.anchor_tick > kStuckTicks) {
        r.anchor = me;
        r.anchor_tick = t;
      }
    } else if (t - r.anchor_tick > kStuckTicks) {
      r.anchor = me;
      r.anchor_tick = t;
      r.force_path_until = t + kStuckTicks;
      r.path.clear();
      if (r.agent.behavior.is_exploring()) {
        if (r.agent.target_cell >= 0) r.agent.blacklist.push_back(r.agent.target_cell);
        r.agent.target_cell = -1;
        r.agent.needs_target = true;
        r.empathy.reset();
      }
    }
    return clamp_control(u, r.spec);
  }

  void move(const std::vector<ControlInput>& u) {
    const GridGeometry& g = inst_.world.grid;
    const int n = cfg_.team_size();
    std::vector<int> cell(n);
    for (int k = 0; k < n; ++k) cell[k] = *g.index_of(poses_[k].position());
    for (int i = 0; i < n; ++i) {
      const Pose next = step(poses_[i], u[i], cfg_.dt);
      bool ok = g.contains(next.position()) && inst_.world.is_free(next.position());
      const int nc = ok ? *g.index_of(next.position()) : -1;
      if (ok && nc != cell[i]) {
        for (int k = 0; k < n; ++k) ok = ok && (k == i || cell[k] != nc);
      }
      moving_[i] = ok && u[i].v > kMovingSpeed;
      if (ok) {
        poses_[i] = next;
        cell[i] = nc;
      } else {
        poses_[i].theta = next.theta;
      }
    }
  }

  ScenarioConfig cfg_;
  ScenarioInstance inst_;
  PredictionContext ctx_;
  std::vector<Pose> poses_;
  std::vector<bool> moving_;  // did the robot translate on the last tick
  std::vector<Robot> robots_;
  TrialLog log_;
};

}  // namespace

TrialLog run_instance(const ScenarioConfig& config, const ScenarioInstance& instance) {
  config.validate();
  return Simulation(config, instance).run();
}

TrialLog run_trial(const ScenarioConfig& config) { return run_instance(config, instantiate(config)); }

TrialLog run_baseline_trial(const ScenarioConfig& config) {
  ScenarioConfig c = config;
  c.policy = PolicyKind::Baseline;
  return run_trial(c);
}

std::string classify_pair(std::optional<double> epistemic_s, std::optional<double> baseline_s, double tolerance) {
  if (!epistemic_s || !baseline_s) return "censored";
  const double d = *baseline_s - *epistemic_s;
  if (std::abs(d) <= tolerance) return "match";
  return d > 0 ? "improve" : "regress";
}

double sign_test_p(int positives, int n) {
  if (n <= 0) return 1.0;
  // P(X >= positives), X ~ Binomial(n, 1/2), summed in log space.
  double p = 0.0;
  for (int k = positives; k <= n; ++k) {
    const double logc = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
    p += std::exp(logc - n * std::log(2.0));
  }
  return std::min(1.0, p);
}

Metrics aggregate(std::vector<PairRecord> pairs) {
  Metrics m;
  std::sort(pairs.begin(), pairs.end(), [](const PairRecord& a, const PairRecord& b) { return a.seed < b.seed; });
  int improve = 0;
  int match = 0;
  int regress = 0;
  int positives = 0;
  int nonzero = 0;
  double sum_s = 0.0;
  double sum_pct = 0.0;
  for (const auto& p : pairs) {
    if (p.outcome == "improve") ++improve;
    if (p.outcome == "match") ++match;
    if (p.outcome == "regress") ++regress;
    if (p.outcome == "censored" || !p.fetch_occurred) continue;
    ++m.fetch_pairs;
    sum_s += *p.delta_s;
    sum_pct += 100.0 * *p.delta_s / *p.baseline_time_s;
    if (*p.delta_s != 0.0) {
      ++nonzero;
      if (*p.delta_s > 0.0) ++positives;
    }
  }
  m.completed_pairs = improve + match + regress;
  if (m.completed_pairs > 0) {
    m.improve_rate = static_cast<double>(improve) / m.completed_pairs;
    m.match_rate = static_cast<double>(match) / m.completed_pairs;
    m.regress_rate = static_cast<double>(regress) / m.completed_pairs;
  }
  if (m.fetch_pairs > 0) {
    m.mean_fetch_improvement_s = sum_s / m.fetch_pairs;
    m.mean_fetch_improvement_pct = sum_pct / m.fetch_pairs;
  }
  m.fetch_sign_test_p = sign_test_p(positives, nonzero);
  m.pairs = std::move(pairs);
  return m;
}

namespace {

PairRecord run_pair(const ScenarioConfig& templ, std::uint64_t seed) {
  ScenarioConfig c = templ;
  c.seed = seed;
  const ScenarioInstance inst = instantiate(c);
  c.policy = PolicyKind::Epistemic;
  const TrialLog ep = run_instance(c, inst);
  c.policy = PolicyKind::Baseline;
  const TrialLog base = run_instance(c, inst);
  PairRecord p;
  p.seed = seed;
  p.team_size = c.team_size();
  p.obstacles = static_cast<int>(inst.obstacles.size());
  p.epistemic_time_s = ep.outcome.completion_time_s;
  p.baseline_time_s = base.outcome.completion_time_s;
  if (p.epistemic_time_s && p.baseline_time_s) p.delta_s = *p.baseline_time_s - *p.epistemic_time_s;
  p.fetch_occurred = ep.outcome.fetch_successes > 0;
  p.outcome = classify_pair(p.epistemic_time_s, p.baseline_time_s, c.match_tolerance_s);
  return p;
}

}  // namespace

Metrics run_batch(const ScenarioConfig& templ, int n_trials, std::uint64_t seed_base, int jobs) {
  if (n_trials < 1) throw PreconditionError("run_batch: n_trials must be at least 1");
  templ.validate();
  jobs = std::clamp(jobs, 1, n_trials);
  std::vector<PairRecord> pairs(n_trials);
  std::vector<std::exception_ptr> errors(n_trials);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int k = next++; k < n_trials; k = next++) {
      try {
        pairs[k] = run_pair(templ, seed_base + static_cast<std::uint64_t>(k));
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < jobs; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return aggregate(std::move(pairs));
}

}  // namespace epicoord
