#include "epicoord/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "epicoord/error.hpp"

namespace epicoord {

using nlohmann::json;

std::vector<int> ScenarioConfig::required_set() const {
  if (!required.empty()) return required;
  std::vector<int> all(robots.size());
  for (int k = 0; k < static_cast<int>(all.size()); ++k) all[k] = k;
  return all;
}

void ScenarioConfig::validate() const {
  if (!(width_m > 0.0) || !(height_m > 0.0)) throw ConfigError("arena: width_m and height_m must be positive");
  if (!(resolution > 0.0)) throw ConfigError("arena.resolution must be positive");
  if (robots.empty()) throw ConfigError("robots: at least one robot is required");
  if (robots.size() > 20) throw ConfigError("robots: at most 20 robots are supported");
  for (int k = 0; k < team_size(); ++k) {
    if (robots[k].spec.id != k) throw ConfigError("robots: ids must be 0..n-1 in order");
    robots[k].spec.validate();
    if (robots[k].start) {
      const Vec2 p = robots[k].start->position();
      if (!(p.x >= 0.0 && p.x < width_m && p.y >= 0.0 && p.y < height_m)) {
        throw ConfigError("robots[" + std::to_string(k) + "].start lies outside the arena");
      }
    }
  }
  std::set<int> seen;
  for (int r : required) {
    if (r < 0 || r >= team_size()) throw ConfigError("required: robot " + std::to_string(r) + " is not in the team");
    if (!seen.insert(r).second) throw ConfigError("required: duplicate robot " + std::to_string(r));
  }
  for (const auto& o : obstacles) {
    if (!(o.side > 0.0)) throw ConfigError("obstacles: side must be positive");
    if (o.center.x - o.side / 2 < 0.0 || o.center.y - o.side / 2 < 0.0 || o.center.x + o.side / 2 > width_m ||
        o.center.y + o.side / 2 > height_m) {
      throw ConfigError("obstacles: square must lie inside the arena");
    }
  }
  if (random_obstacles < 0) throw ConfigError("random_obstacles.count must be >= 0");
  if (random_obstacles > 0 && !(random_obstacle_side > 0.0 && random_obstacle_side < std::min(width_m, height_m))) {
    throw ConfigError("random_obstacles.side must be positive and fit the arena");
  }
  if (!(sample_clearance >= 0.0)) throw ConfigError("random_obstacles.clearance must be >= 0");
  if (task && !(task->x >= 0.0 && task->x < width_m && task->y >= 0.0 && task->y < height_m)) {
    throw ConfigError("task lies outside the arena");
  }
  if (!(completion_radius > 0.0)) throw ConfigError("completion_radius must be positive");
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  if (!(max_duration_s >= 0.0)) throw ConfigError("max_duration_s must be >= 0");
  if (!(delta > 0.0)) throw ConfigError("thresholds.delta must be positive");
  if (!(delta_e > 0.0)) throw ConfigError("thresholds.delta_e must be positive");
  if (!(1.0 > p_plus && p_plus > p_minus && p_minus > 0.0)) {
    throw ConfigError("thresholds: need 1 > p_plus > p_minus > 0");
  }
  if (!(empathy_catchup_s > 0.0)) throw ConfigError("behavior.empathy_catchup_s must be positive");
  if (!(replan_interval_s >= 0.0)) throw ConfigError("behavior.replan_interval_s must be >= 0");
  if (!(intercept_timeout_s > 0.0)) throw ConfigError("behavior.intercept_timeout_s must be positive");
  if (!(match_tolerance_s >= 0.0)) throw ConfigError("thresholds.match_tolerance_s must be >= 0");
  if (exploration.scan_period_ticks < 1) throw ConfigError("exploration.scan_period_ticks must be >= 1");
  if (exploration.n_rays < 0) throw ConfigError("exploration.n_rays must be >= 0");
  if (!(exploration.reach_tolerance > 0.0)) throw ConfigError("exploration.reach_tolerance must be positive");
  if (!(exploration.repulse_duration_s > 0.0)) throw ConfigError("exploration.repulse_duration_s must be positive");
  tree.validate();
  double min_range = robots.front().spec.sensing_range;
  for (const auto& r : robots) min_range = std::min(min_range, r.spec.sensing_range);
  mppi.validate(min_range);
}

ScenarioConfig default_config(int team_size) {
  ScenarioConfig c;
  for (int k = 0; k < team_size; ++k) {
    RobotConfig r;
    r.spec.id = k;
    c.robots.push_back(r);
  }
  return c;
}

namespace {

// Reads one JSON object, remembering which keys were consumed so leftovers can be reported.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) throw ConfigError(where() + ": expected an object");
  }

  bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  const json& raw(const char* key) {
    used_.insert(key);
    return j_.at(key);
  }

  void number(const char* key, double& out) {
    if (!j_.contains(key)) return;
    used_.insert(key);
    const json& v = j_.at(key);
    if (!v.is_number()) throw ConfigError(field(key) + ": expected a number");
    out = v.get<double>();
  }

  void integer(const char* key, int& out) {
    if (!j_.contains(key)) return;
    used_.insert(key);
    const json& v = j_.at(key);
    if (!v.is_number_integer()) throw ConfigError(field(key) + ": expected an integer");
    out = v.get<int>();
  }

  void boolean(const char* key, bool& out) {
    if (!j_.contains(key)) return;
    used_.insert(key);
    const json& v = j_.at(key);
    if (!v.is_boolean()) throw ConfigError(field(key) + ": expected true or false");
    out = v.get<bool>();
  }

  void text(const char* key, std::string& out) {
    if (!j_.contains(key)) return;
    used_.insert(key);
    const json& v = j_.at(key);
    if (!v.is_string()) throw ConfigError(field(key) + ": expected a string");
    out = v.get<std::string>();
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) throw ConfigError(field(it.key().c_str()) + ": unknown key");
    }
  }

  std::string field(const char* key) const { return path_.empty() ? key : path_ + "." + key; }
  std::string where() const { return path_.empty() ? "config" : path_; }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

std::vector<double> numbers(const json& v, std::size_t n, const std::string& field) {
  if (!v.is_array() || v.size() != n) {
    throw ConfigError(field + ": expected an array of " + std::to_string(n) + " numbers");
  }
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw ConfigError(field + ": expected numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

Vec2 point(const json& v, const std::string& field) {
  const auto a = numbers(v, 2, field);
  return {a[0], a[1]};
}

Pose pose(const json& v, const std::string& field) {
  const auto a = numbers(v, 3, field);
  return {a[0], a[1], a[2]};
}

}  // namespace

ScenarioConfig config_from_json(const json& j) {
  ScenarioConfig c;
  ObjectReader top(j, "");
  if (top.has("arena")) {
    ObjectReader a(top.raw("arena"), "arena");
    a.number("width_m", c.width_m);
    a.number("height_m", c.height_m);
    a.number("resolution", c.resolution);
    a.finish();
  }
  if (top.has("obstacles")) {
    const json& arr = top.raw("obstacles");
    if (!arr.is_array()) throw ConfigError("obstacles: expected an array");
    for (std::size_t k = 0; k < arr.size(); ++k) {
      const std::string path = "obstacles[" + std::to_string(k) + "]";
      ObjectReader o(arr[k], path);
      ObstacleSpec s;
      if (!o.has("center")) throw ConfigError(path + ".center: missing");
      s.center = point(o.raw("center"), path + ".center");
      o.number("side", s.side);
      o.finish();
      c.obstacles.push_back(s);
    }
  }
  if (top.has("random_obstacles")) {
    ObjectReader r(top.raw("random_obstacles"), "random_obstacles");
    r.integer("count", c.random_obstacles);
    r.number("side", c.random_obstacle_side);
    r.number("clearance", c.sample_clearance);
    r.finish();
  }
  if (top.has("task")) c.task = point(top.raw("task"), "task");
  else if (j.contains("task")) top.raw("task");
  top.number("completion_radius", c.completion_radius);

  int team_size = -1;
  top.integer("team_size", team_size);
  if (top.has("robots")) {
    const json& arr = top.raw("robots");
    if (!arr.is_array()) throw ConfigError("robots: expected an array");
    if (team_size >= 0 && team_size != static_cast<int>(arr.size())) {
      throw ConfigError("team_size: disagrees with the robots array");
    }
    for (std::size_t k = 0; k < arr.size(); ++k) {
      const std::string path = "robots[" + std::to_string(k) + "]";
      ObjectReader o(arr[k], path);
      RobotConfig r;
      r.spec.id = static_cast<int>(k);
      o.integer("id", r.spec.id);
      if (o.has("start")) r.start = pose(o.raw("start"), path + ".start");
      else if (arr[k].contains("start")) o.raw("start");
      o.number("v_nominal", r.spec.v_nominal);
      o.number("v_max_burst", r.spec.v_max_burst);
      o.number("omega_max", r.spec.omega_max);
      o.number("sensing_range", r.spec.sensing_range);
      o.finish();
      c.robots.push_back(r);
    }
  } else {
    if (team_size < 0) team_size = 3;
    if (team_size < 1) throw ConfigError("team_size must be at least 1");
    c.robots = default_config(team_size).robots;
  }
  if (top.has("required")) {
    const json& arr = top.raw("required");
    if (!arr.is_array()) throw ConfigError("required: expected an array of robot ids");
    for (const auto& x : arr) {
      if (!x.is_number_integer()) throw ConfigError("required: expected integer robot ids");
      c.required.push_back(x.get<int>());
    }
  }
  std::string policy = "epistemic";
  top.text("policy", policy);
  if (policy == "epistemic") c.policy = PolicyKind::Epistemic;
  else if (policy == "baseline") c.policy = PolicyKind::Baseline;
  else throw ConfigError("policy: expected \"epistemic\" or \"baseline\", got \"" + policy + "\"");

  top.number("dt", c.dt);
  c.exploration.dt = c.dt;
  top.number("max_duration_s", c.max_duration_s);
  if (j.contains("seed")) {
    const json& s = top.raw("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0)) {
      throw ConfigError("seed: expected a non-negative integer");
    }
    c.seed = s.get<std::uint64_t>();
  }
  top.boolean("verbose", c.verbose);

  if (top.has("thresholds")) {
    ObjectReader t(top.raw("thresholds"), "thresholds");
    t.number("delta", c.delta);
    t.number("delta_e", c.delta_e);
    t.number("p_plus", c.p_plus);
    t.number("p_minus", c.p_minus);
    t.number("match_tolerance_s", c.match_tolerance_s);
    std::string mode = "complementary";
    t.text("bayes_mode", mode);
    if (mode == "complementary") c.bayes_mode = BayesMode::Complementary;
    else if (mode == "literal") c.bayes_mode = BayesMode::Literal;
    else throw ConfigError("thresholds.bayes_mode: expected \"complementary\" or \"literal\"");
    t.finish();
  }
  if (top.has("horizons")) {
    ObjectReader h(top.raw("horizons"), "horizons");
    h.number("H_s", c.tree.horizon_s);
    h.integer("H_u", c.mppi.H_u);
    h.finish();
  }
  if (top.has("tree")) {
    ObjectReader t(top.raw("tree"), "tree");
    t.integer("depth_limit", c.tree.depth_limit);
    t.number("min_fetch_gain", c.tree.min_fetch_gain);
    t.finish();
  }
  if (top.has("mppi")) {
    ObjectReader m(top.raw("mppi"), "mppi");
    m.integer("K", c.mppi.K);
    m.number("noise_std_v", c.mppi.noise_std_v);
    m.number("noise_std_omega", c.mppi.noise_std_omega);
    m.number("eta", c.mppi.eta);
    m.number("gamma", c.mppi.gamma);
    m.number("safety_margin", c.mppi.safety_margin);
    m.number("safety_weight", c.mppi.safety_weight);
    m.number("alpha", c.mppi.alpha);
    m.number("kappa", c.mppi.kappa);
    m.number("sigma_offset", c.mppi.sigma_offset);
    m.boolean("weighted_average", c.mppi.weighted_average);
    m.number("temperature", c.mppi.temperature);
    m.integer("max_attempts", c.mppi.max_attempts);
    m.finish();
  }
  if (top.has("exploration")) {
    ObjectReader e(top.raw("exploration"), "exploration");
    e.integer("scan_period_ticks", c.exploration.scan_period_ticks);
    e.integer("n_rays", c.exploration.n_rays);
    e.number("reach_tolerance", c.exploration.reach_tolerance);
    e.number("repulse_duration_s", c.exploration.repulse_duration_s);
    e.number("task_stop_radius", c.exploration.task_stop_radius);
    e.finish();
  }
  if (top.has("behavior")) {
    ObjectReader b(top.raw("behavior"), "behavior");
    b.number("empathy_catchup_s", c.empathy_catchup_s);
    b.number("replan_interval_s", c.replan_interval_s);
    b.number("intercept_timeout_s", c.intercept_timeout_s);
    b.finish();
  }
  top.finish();

  c.tree.alpha = c.mppi.alpha;
  c.tree.sigma = c.mppi.sigma_offset;
  c.tree.completion_radius = c.completion_radius;
  c.tree.required = c.required;
  c.validate();
  return c;
}

json config_to_json(const ScenarioConfig& c) {
  json j;
  j["arena"] = {{"width_m", c.width_m}, {"height_m", c.height_m}, {"resolution", c.resolution}};
  j["obstacles"] = json::array();
  for (const auto& o : c.obstacles) j["obstacles"].push_back({{"center", {o.center.x, o.center.y}}, {"side", o.side}});
  j["random_obstacles"] = {
      {"count", c.random_obstacles}, {"side", c.random_obstacle_side}, {"clearance", c.sample_clearance}};
  j["task"] = c.task ? json{c.task->x, c.task->y} : json(nullptr);
  j["completion_radius"] = c.completion_radius;
  j["robots"] = json::array();
  for (const auto& r : c.robots) {
    json jr = {{"id", r.spec.id},
               {"v_nominal", r.spec.v_nominal},
               {"v_max_burst", r.spec.v_max_burst},
               {"omega_max", r.spec.omega_max},
               {"sensing_range", r.spec.sensing_range}};
    jr["start"] = r.start ? json{r.start->x, r.start->y, r.start->theta} : json(nullptr);
    j["robots"].push_back(jr);
  }
  j["required"] = c.required;
  j["policy"] = c.policy == PolicyKind::Epistemic ? "epistemic" : "baseline";
  j["dt"] = c.dt;
  j["max_duration_s"] = c.max_duration_s;
  j["seed"] = c.seed;
  j["verbose"] = c.verbose;
  j["thresholds"] = {{"delta", c.delta},
                     {"delta_e", c.delta_e},
                     {"p_plus", c.p_plus},
                     {"p_minus", c.p_minus},
                     {"match_tolerance_s", c.match_tolerance_s},
                     {"bayes_mode", c.bayes_mode == BayesMode::Complementary ? "complementary" : "literal"}};
  j["horizons"] = {{"H_s", c.tree.horizon_s}, {"H_u", c.mppi.H_u}};
  j["tree"] = {{"depth_limit", c.tree.depth_limit}, {"min_fetch_gain", c.tree.min_fetch_gain}};
  j["mppi"] = {{"K", c.mppi.K},
               {"noise_std_v", c.mppi.noise_std_v},
               {"noise_std_omega", c.mppi.noise_std_omega},
               {"eta", c.mppi.eta},
               {"gamma", c.mppi.gamma},
               {"safety_margin", c.mppi.safety_margin},
               {"safety_weight", c.mppi.safety_weight},
               {"alpha", c.mppi.alpha},
               {"kappa", c.mppi.kappa},
               {"sigma_offset", c.mppi.sigma_offset},
               {"weighted_average", c.mppi.weighted_average},
               {"temperature", c.mppi.temperature},
               {"max_attempts", c.mppi.max_attempts}};
  j["exploration"] = {{"scan_period_ticks", c.exploration.scan_period_ticks},
                      {"n_rays", c.exploration.n_rays},
                      {"reach_tolerance", c.exploration.reach_tolerance},
                      {"repulse_duration_s", c.exploration.repulse_duration_s},
                      {"task_stop_radius", c.exploration.task_stop_radius}};
  j["behavior"] = {{"empathy_catchup_s", c.empathy_catchup_s},
                   {"replan_interval_s", c.replan_interval_s},
                   {"intercept_timeout_s", c.intercept_timeout_s}};
  return j;
}

json parse_json_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // e.byte is 1-based and points just past the offending character.
    const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    int line = 1;
    int column = 1;
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ParseError(e.what(), line, column);
  }
}

ScenarioConfig parse_config(const std::string& text) { return config_from_json(parse_json_text(text)); }

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override must look like key=value: " + assignment);
  const std::string key = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);
  json parsed = json::parse(value, nullptr, false);
  if (parsed.is_discarded()) parsed = value;
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("override key has an empty segment: " + key);
    if (!node->is_object()) {
      if (!node->is_null()) throw ConfigError("override key crosses a non-object value: " + key);
      *node = json::object();
    }
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  *node = parsed;
}

namespace {

bool square_touches(Vec2 center, double side, Vec2 p, double clearance) {
  const double h = side / 2 + clearance;
  return std::abs(p.x - center.x) <= h && std::abs(p.y - center.y) <= h;
}

}  // namespace

ScenarioInstance instantiate(const ScenarioConfig& c) {
  c.validate();
  std::mt19937_64 rng(c.seed);
  auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  const GridGeometry grid(c.width_m, c.height_m, c.resolution);
  const double margin = std::min(0.5, 0.25 * std::min(c.width_m, c.height_m));

  auto blocked_by_fixed = [&](Vec2 p) {
    for (const auto& o : c.obstacles) {
      if (square_touches(o.center, o.side, p, 0.0)) return true;
    }
    return false;
  };
  auto sample_point = [&] {
    for (int attempt = 0; attempt < 10000; ++attempt) {
      const Vec2 p{uniform(margin, c.width_m - margin), uniform(margin, c.height_m - margin)};
      if (!blocked_by_fixed(p)) return p;
    }
    throw ConfigError("could not sample a free point; the arena is too cluttered");
  };

  ScenarioInstance inst;
  const Vec2 task = c.task ? *c.task : sample_point();
  for (int k = 0; k < c.team_size(); ++k) {
    if (c.robots[k].start) {
      inst.starts.push_back(*c.robots[k].start);
      continue;
    }
    for (int attempt = 0;; ++attempt) {
      if (attempt == 10000) throw ConfigError("could not sample distinct start poses");
      const Vec2 p = sample_point();
      const double th = uniform(-std::numbers::pi, std::numbers::pi);
      bool ok = true;
      for (const auto& s : inst.starts) ok = ok && distance(s.position(), p) >= 2.0;
      if (ok) {
        inst.starts.push_back({p.x, p.y, th});
        break;
      }
    }
  }

  inst.obstacles = c.obstacles;
  for (int k = 0; k < c.random_obstacles; ++k) {
    const double s = c.random_obstacle_side;
    for (int attempt = 0;; ++attempt) {
      if (attempt == 10000) throw ConfigError("could not place random obstacles with the requested clearance");
      const Vec2 ctr{uniform(s / 2, c.width_m - s / 2), uniform(s / 2, c.height_m - s / 2)};
      bool ok = !square_touches(ctr, s, task, c.sample_clearance);
      for (const auto& p : inst.starts) ok = ok && !square_touches(ctr, s, p.position(), c.sample_clearance);
      if (ok) {
        inst.obstacles.push_back({ctr, s});
        break;
      }
    }
  }

  inst.world = WorldMap::open(c.width_m, c.height_m, c.resolution, task, c.completion_radius);
  for (const auto& o : inst.obstacles) inst.world.add_square_obstacle(o.center, o.side);
  inst.world.validate();
  std::set<int> start_cells;
  for (int k = 0; k < c.team_size(); ++k) {
    const Vec2 p = inst.starts[k].position();
    if (!inst.world.is_free(p)) throw ConfigError("robot " + std::to_string(k) + " starts inside an obstacle");
    if (!start_cells.insert(*grid.index_of(p)).second) {
      throw ConfigError("robot " + std::to_string(k) + " starts in a cell already taken by another robot");
    }
  }
  return inst;
}

}  // namespace epicoord
