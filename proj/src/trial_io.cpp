#include "epicoord/trial_io.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "epicoord/error.hpp"

namespace epicoord {

using nlohmann::json;

namespace {

json pose_json(const Pose& p) { return json::array({p.x, p.y, p.theta}); }
json vec_json(Vec2 v) { return json::array({v.x, v.y}); }

Pose pose_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }
Vec2 vec_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

json poses_json(const std::vector<Pose>& ps) {
  json a = json::array();
  for (const auto& p : ps) a.push_back(pose_json(p));
  return a;
}

std::vector<Pose> poses_from(const json& j) {
  std::vector<Pose> out;
  for (const auto& p : j) out.push_back(pose_from(p));
  return out;
}

json evaluations_json(const std::vector<BehaviorEvaluation>& evs) {
  json a = json::array();
  for (const auto& e : evs) a.push_back(evaluation_to_json(e));
  return a;
}

BehaviorEvaluation evaluation_from(const json& j) {
  BehaviorEvaluation e;
  e.behavior = parse_behavior_label(j.at("behavior").get<std::string>());
  e.mission_time = j.at("mission_time").get<double>();
  for (const auto& [k, v] : j.at("per_robot_completion").items()) e.per_robot_completion[std::stoi(k)] = v.get<double>();
  e.pruned = j.at("pruned").get<bool>();
  e.reason = j.at("reason").get<std::string>();
  if (!j.at("intercept").is_null()) {
    const json& x = j.at("intercept");
    e.intercept = InterceptCandidate{x.at("tau").get<int>(), vec_from(x.at("point")), x.at("dubins_s").get<double>()};
  }
  return e;
}

std::vector<BehaviorEvaluation> evaluations_from(const json& j) {
  std::vector<BehaviorEvaluation> out;
  for (const auto& e : j) out.push_back(evaluation_from(e));
  return out;
}

json header_json(const TrialLog& log) {
  const WorldMap& w = log.instance.world;
  json obstacles = json::array();
  for (const auto& o : log.instance.obstacles) obstacles.push_back({{"center", vec_json(o.center)}, {"side", o.side}});
  json world = {{"width_m", w.grid.width_m()},
                {"height_m", w.grid.height_m()},
                {"resolution", w.grid.resolution()},
                {"task", vec_json(w.task_position)},
                {"completion_radius", w.completion_radius},
                {"obstacles", obstacles},
                {"starts", poses_json(log.instance.starts)}};
  return {{"type", "header"}, {"schema", kTrialLogSchema}, {"config", config_to_json(log.config)}, {"world", world}};
}

json tick_json(const TickRecord& t) {
  json behaviors = json::array();
  for (const auto& b : t.behaviors) behaviors.push_back(to_string(b));
  json events = json::array();
  for (const auto& e : t.events) {
    events.push_back({{"observer", e.observer}, {"kind", to_string(e.event.kind)}, {"subject", e.event.subject}});
  }
  json j = {{"type", "tick"},         {"tick", t.tick},     {"poses", poses_json(t.poses)},
            {"behaviors", behaviors}, {"epistemic", t.epistemic}, {"events", events}};
  if (!t.estimates.empty()) {
    json est = json::array();
    for (const auto& row : t.estimates) est.push_back(poses_json(row));
    j["estimates"] = est;
  }
  if (!t.empathy.empty()) {
    json emp = json::array();
    for (const auto& row : t.empathy) emp.push_back(poses_json(row));
    j["empathy"] = emp;
  }
  return j;
}

json decision_json(const DecisionRecord& d) {
  json replays = json::array();
  for (const auto& r : d.result.replays) {
    replays.push_back({{"robot", r.robot},
                       {"discovery_tick", r.discovery_tick},
                       {"chosen", to_string(r.chosen)},
                       {"evaluations", evaluations_json(r.evaluations)}});
  }
  return {{"type", "decision"},
          {"tick", d.tick},
          {"robot", d.robot},
          {"chosen", to_string(d.result.chosen)},
          {"evaluations", evaluations_json(d.result.evaluations)},
          {"replays", replays}};
}

json mppi_json(const MppiRecord& m) {
  return {{"type", "mppi"},      {"tick", m.tick},  {"robot", m.robot},         {"target", m.target},
          {"x_int", vec_json(m.x_int)}, {"cost", m.cost}, {"histogram", m.histogram}};
}

json outcome_json(const TrialOutcome& o) {
  return {{"type", "outcome"},
          {"completed", o.completed},
          {"completion_time_s", o.completion_time_s ? json(*o.completion_time_s) : json(nullptr)},
          {"ticks", o.ticks},
          {"fetches_started", o.fetches_started},
          {"fetch_successes", o.fetch_successes}};
}

ScenarioInstance instance_from(const json& w) {
  ScenarioInstance inst;
  inst.world = WorldMap::open(w.at("width_m").get<double>(), w.at("height_m").get<double>(),
                              w.at("resolution").get<double>(), vec_from(w.at("task")),
                              w.at("completion_radius").get<double>());
  for (const auto& o : w.at("obstacles")) {
    ObstacleSpec s{vec_from(o.at("center")), o.at("side").get<double>()};
    inst.world.add_square_obstacle(s.center, s.side);
    inst.obstacles.push_back(s);
  }
  inst.starts = poses_from(w.at("starts"));
  return inst;
}

TickRecord tick_from(const json& j) {
  TickRecord t;
  t.tick = j.at("tick").get<int>();
  t.poses = poses_from(j.at("poses"));
  for (const auto& b : j.at("behaviors")) t.behaviors.push_back(parse_behavior_label(b.get<std::string>()));
  t.epistemic = j.at("epistemic").get<std::vector<std::string>>();
  for (const auto& e : j.at("events")) {
    LoggedEvent le;
    le.observer = e.at("observer").get<int>();
    le.event = {parse_event_kind(e.at("kind").get<std::string>()), e.at("subject").get<int>(), t.tick};
    t.events.push_back(le);
  }
  if (j.contains("estimates")) {
    for (const auto& row : j.at("estimates")) t.estimates.push_back(poses_from(row));
  }
  if (j.contains("empathy")) {
    for (const auto& row : j.at("empathy")) t.empathy.push_back(poses_from(row));
  }
  return t;
}

DecisionRecord decision_from(const json& j) {
  DecisionRecord d;
  d.tick = j.at("tick").get<int>();
  d.robot = j.at("robot").get<int>();
  d.result.chosen = parse_behavior_label(j.at("chosen").get<std::string>());
  d.result.evaluations = evaluations_from(j.at("evaluations"));
  for (const auto& r : j.at("replays")) {
    ReplayedDecision rep;
    rep.robot = r.at("robot").get<int>();
    rep.discovery_tick = r.at("discovery_tick").get<int>();
    rep.chosen = parse_behavior_label(r.at("chosen").get<std::string>());
    rep.evaluations = evaluations_from(r.at("evaluations"));
    d.result.replays.push_back(std::move(rep));
  }
  return d;
}

MppiRecord mppi_from(const json& j) {
  MppiRecord m;
  m.tick = j.at("tick").get<int>();
  m.robot = j.at("robot").get<int>();
  m.target = j.at("target").get<int>();
  m.x_int = vec_from(j.at("x_int"));
  m.cost = j.at("cost").get<double>();
  m.histogram = j.at("histogram").get<std::vector<int>>();
  return m;
}

std::string fmt_time(std::optional<double> v) {
  if (!v) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", *v);
  return buf;
}

std::string fmt(double v, const char* f = "%.6g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace

json evaluation_to_json(const BehaviorEvaluation& e) {
  json per = json::object();
  for (const auto& [k, v] : e.per_robot_completion) per[std::to_string(k)] = v;
  json x = nullptr;
  if (e.intercept) x = {{"tau", e.intercept->tau}, {"point", vec_json(e.intercept->point)}, {"dubins_s", e.intercept->dubins}};
  return {{"behavior", to_string(e.behavior)},
          {"mission_time", e.mission_time},
          {"per_robot_completion", per},
          {"pruned", e.pruned},
          {"reason", e.reason},
          {"intercept", x}};
}

BehaviorPrimitive parse_behavior_label(const std::string& label) {
  auto robot_after = [&](std::size_t prefix) {
    const std::string rest = label.substr(prefix);
    if (rest.empty() || rest.find_first_not_of("0123456789") != std::string::npos) {
      throw ParseError("unknown behavior label '" + label + "'");
    }
    return std::stoi(rest);
  };
  if (label == "e") return BehaviorPrimitive::explore();
  if (label == "c") return BehaviorPrimitive::complete_task();
  if (label.rfind("ebar", 0) == 0) return BehaviorPrimitive::modified_explore(robot_after(4), {}, 0.0);
  if (label.rfind("f", 0) == 0) return BehaviorPrimitive::fetch(robot_after(1));
  throw ParseError("unknown behavior label '" + label + "'");
}

EventKind parse_event_kind(const std::string& name) {
  for (int k = 0; k <= static_cast<int>(EventKind::TaskDiscovered); ++k) {
    if (name == to_string(static_cast<EventKind>(k))) return static_cast<EventKind>(k);
  }
  throw ParseError("unknown event kind '" + name + "'");
}

void write_trial_log(std::ostream& out, const TrialLog& log) {
  out << header_json(log).dump() << '\n';
  for (const auto& t : log.ticks) out << tick_json(t).dump() << '\n';
  for (const auto& d : log.decisions) out << decision_json(d).dump() << '\n';
  for (const auto& m : log.mppi) out << mppi_json(m).dump() << '\n';
  out << outcome_json(log.outcome).dump() << '\n';
}

std::string trial_log_text(const TrialLog& log) {
  std::ostringstream s;
  write_trial_log(s, log);
  return s.str();
}

void save_trial_log(const std::string& path, const TrialLog& log) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  write_trial_log(f, log);
  if (!f) throw std::runtime_error("failed writing " + path);
}

TrialLog read_trial_log(std::istream& in) {
  TrialLog log;
  std::string line;
  int lineno = 0;
  bool header = false;
  bool outcome = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = parse_json_text(line);
    } catch (const ParseError& e) {
      throw ParseError("trial log line " + std::to_string(lineno) + ": " + e.what(), lineno, e.column());
    }
    try {
      const std::string type = j.at("type").get<std::string>();
      if (!header && type != "header") throw ParseError("expected a header record first");
      if (outcome) throw ParseError("record after the outcome");
      if (type == "header") {
        if (header) throw ParseError("duplicate header");
        if (j.at("schema").get<std::string>() != kTrialLogSchema) {
          throw ParseError("unsupported schema '" + j.at("schema").get<std::string>() + "'");
        }
        log.config = config_from_json(j.at("config"));
        log.instance = instance_from(j.at("world"));
        header = true;
      } else if (type == "tick") {
        log.ticks.push_back(tick_from(j));
      } else if (type == "decision") {
        log.decisions.push_back(decision_from(j));
      } else if (type == "mppi") {
        log.mppi.push_back(mppi_from(j));
      } else if (type == "outcome") {
        log.outcome.completed = j.at("completed").get<bool>();
        if (!j.at("completion_time_s").is_null()) log.outcome.completion_time_s = j.at("completion_time_s").get<double>();
        log.outcome.ticks = j.at("ticks").get<int>();
        log.outcome.fetches_started = j.at("fetches_started").get<int>();
        log.outcome.fetch_successes = j.at("fetch_successes").get<int>();
        outcome = true;
      } else {
        throw ParseError("unknown record type '" + type + "'");
      }
    } catch (const ParseError& e) {
      throw ParseError("trial log line " + std::to_string(lineno) + ": " + e.what(), lineno);
    } catch (const json::exception& e) {
      throw ParseError("trial log line " + std::to_string(lineno) + ": " + e.what(), lineno);
    } catch (const ConfigError& e) {
      throw ParseError("trial log line " + std::to_string(lineno) + ": " + e.what(), lineno);
    }
  }
  if (!header) throw ParseError("trial log: empty or missing header");
  if (!outcome) throw ParseError("trial log: missing outcome record (truncated?)", lineno);
  return log;
}

TrialLog load_trial_log(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path);
  return read_trial_log(f);
}

std::string state_summary(const TrialLog& log) {
  json j;
  j["outcome"] = outcome_json(log.outcome);
  j["outcome"].erase("type");
  if (!log.ticks.empty()) {
    const TickRecord& last = log.ticks.back();
    json behaviors = json::array();
    for (const auto& b : last.behaviors) behaviors.push_back(to_string(b));
    j["final"] = {{"tick", last.tick}, {"poses", poses_json(last.poses)}, {"behaviors", behaviors}, {"epistemic", last.epistemic}};
  }
  j["decisions"] = log.decisions.size();
  return j.dump();
}

ReplayReport replay(const TrialLog& log) {
  ReplayReport r;
  r.logged = state_summary(log);
  r.replayed = state_summary(run_instance(log.config, log.instance));
  r.identical = r.logged == r.replayed;
  return r;
}

void write_metrics_csv(std::ostream& out, const Metrics& m) {
  out << "seed,team_size,obstacles,epistemic_time_s,baseline_time_s,delta_s,fetch_occurred,outcome\n";
  for (const auto& p : m.pairs) {
    out << p.seed << ',' << p.team_size << ',' << p.obstacles << ',' << fmt_time(p.epistemic_time_s) << ','
        << fmt_time(p.baseline_time_s) << ',' << fmt_time(p.delta_s) << ',' << (p.fetch_occurred ? 1 : 0) << ','
        << p.outcome << '\n';
  }
  out << "# pairs=" << m.pairs.size() << " completed_pairs=" << m.completed_pairs << '\n';
  out << "# improve_rate=" << fmt(m.improve_rate, "%.4f") << " match_rate=" << fmt(m.match_rate, "%.4f")
      << " regress_rate=" << fmt(m.regress_rate, "%.4f") << '\n';
  out << "# fetch_pairs=" << m.fetch_pairs << " mean_fetch_improvement_s=" << fmt(m.mean_fetch_improvement_s, "%.3f")
      << " mean_fetch_improvement_pct=" << fmt(m.mean_fetch_improvement_pct, "%.2f")
      << " fetch_sign_test_p=" << fmt(m.fetch_sign_test_p, "%.6g") << '\n';
}

std::string metrics_csv_text(const Metrics& m) {
  std::ostringstream s;
  write_metrics_csv(s, m);
  return s.str();
}

std::vector<PairRecord> read_metrics_csv(std::istream& in) {
  std::vector<PairRecord> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (lineno == 1 || line.rfind("seed,", 0) == 0) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (line.back() == ',') f.emplace_back();
    if (f.size() != 8) throw ParseError("metrics csv line " + std::to_string(lineno) + ": expected 8 fields", lineno);
    auto opt = [](const std::string& s) -> std::optional<double> {
      if (s.empty()) return std::nullopt;
      return std::stod(s);
    };
    try {
      PairRecord p;
      p.seed = std::stoull(f[0]);
      p.team_size = std::stoi(f[1]);
      p.obstacles = std::stoi(f[2]);
      p.epistemic_time_s = opt(f[3]);
      p.baseline_time_s = opt(f[4]);
      p.delta_s = opt(f[5]);
      p.fetch_occurred = f[6] == "1";
      p.outcome = f[7];
      rows.push_back(std::move(p));
    } catch (const std::logic_error&) {
      throw ParseError("metrics csv line " + std::to_string(lineno) + ": malformed number", lineno);
    }
  }
  return rows;
}

}  // namespace epicoord
