#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "epicoord/agent.hpp"
#include "epicoord/behavior_tree.hpp"
#include "epicoord/epistemic_update.hpp"
#include "epicoord/intercept_mppi.hpp"

namespace epicoord {

enum class PolicyKind { Epistemic, Baseline };

struct ObstacleSpec {
  Vec2 center;
  double side = 1.0;
  friend bool operator==(const ObstacleSpec&, const ObstacleSpec&) = default;
};

struct RobotConfig {
  RobotSpec spec;
  std::optional<Pose> start;  // sampled when absent
};

struct ScenarioConfig {
  double width_m = 50.0;
  double height_m = 50.0;
  double resolution = 1.0;
  std::vector<ObstacleSpec> obstacles;
  int random_obstacles = 0;
  double random_obstacle_side = 5.0;
  double sample_clearance = 2.0;  // m kept between sampled obstacles and task / starts
  std::optional<Vec2> task;
  double completion_radius = 1.0;
  std::vector<RobotConfig> robots;
  std::vector<int> required;  // empty: whole team
  PolicyKind policy = PolicyKind::Epistemic;
  double dt = 0.1;
  double max_duration_s = 1800.0;
  std::uint64_t seed = 1;

  double delta = 2.0;
  double delta_e = 1.0;
  double p_plus = 0.8;
  double p_minus = 0.3;
  BayesMode bayes_mode = BayesMode::Complementary;
  double empathy_catchup_s = 5.0;
  double replan_interval_s = 1.0;
  double intercept_timeout_s = 30.0;  // give up on an intercept this long after tau*
  double match_tolerance_s = 1.0;
  bool verbose = false;

  ExplorationParams exploration;
  TreeSearchConfig tree;
  MppiParams mppi;

  /// Throws ConfigError naming the offending field.
  void validate() const;
  int team_size() const { return static_cast<int>(robots.size()); }
  std::vector<int> required_set() const;
};

/// Default config: 50 m x 50 m empty arena, three robots with sampled starts and task.
ScenarioConfig default_config(int team_size = 3);

/// JSON (de)serialization. Unknown keys are rejected.
ScenarioConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ScenarioConfig& c);

/// Parses a JSON document; syntax errors become ParseError with line and column.
nlohmann::json parse_json_text(const std::string& text);
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);

/// `key=value` with a dotted key; the value is read as JSON when it parses, else as a string.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// The concrete world of one trial: obstacles, task and start poses fixed.
struct ScenarioInstance {
  WorldMap world;
  std::vector<ObstacleSpec> obstacles;
  std::vector<Pose> starts;
  friend bool operator==(const ScenarioInstance& a, const ScenarioInstance& b) {
    return a.world.cells == b.world.cells && a.world.task_position == b.world.task_position &&
           a.obstacles == b.obstacles && a.starts == b.starts;
  }
};

/// Samples whatever the config leaves open from its seed (task, starts, random obstacles).
ScenarioInstance instantiate(const ScenarioConfig& c);

}  // namespace epicoord
