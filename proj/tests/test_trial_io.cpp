#include <sstream>

#include "doctest.h"
#include "epicoord/error.hpp"
#include "epicoord/plots.hpp"
#include "epicoord/trial_io.hpp"

using namespace epicoord;

namespace {

ScenarioConfig small(int team, std::uint64_t seed) {
  ScenarioConfig c = default_config(team);
  c.width_m = c.height_m = 30.0;
  c.seed = seed;
  return c;
}

std::size_t count(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1)) ++n;
  return n;
}

}  // namespace

TEST_SUITE("trial_io") {
  TEST_CASE("config JSON round-trips and fills defaults") {
    ScenarioConfig c = default_config(3);
    c.seed = 77;
    c.obstacles.push_back({{12, 14}, 3});
    c.bayes_mode = BayesMode::Literal;
    c.tree.min_fetch_gain = 0.2;
    const ScenarioConfig back = config_from_json(config_to_json(c));
    CHECK(config_to_json(back) == config_to_json(c));

    const ScenarioConfig sparse = parse_config(R"({"team_size": 2, "seed": 5})");
    CHECK(sparse.team_size() == 2);
    CHECK(sparse.seed == 5);
    CHECK(sparse.width_m == 50.0);
    CHECK(sparse.p_plus == 0.8);
  }

  TEST_CASE("malformed JSON reports line and column") {
    try {
      parse_config("{\n  \"seed\": 3,\n  \"dt\": ,\n}");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
      CHECK(e.column() > 0);
    }
  }

  TEST_CASE("unknown keys and bad values are config errors naming the field") {
    auto message = [](const std::string& text) {
      try {
        parse_config(text);
      } catch (const ConfigError& e) {
        return std::string(e.what());
      }
      return std::string();
    };
    CHECK(message(R"({"arena": {"widht_m": 3}})").find("widht_m") != std::string::npos);
    CHECK(message(R"({"policy": "greedy"})").find("policy") != std::string::npos);
    CHECK(message(R"({"dt": -1})").find("dt") != std::string::npos);
    CHECK(message(R"({"thresholds": {"p_plus": 0.2, "p_minus": 0.5}})").find("p_plus") != std::string::npos);
    CHECK(message(R"({"seed": "x"})").find("seed") != std::string::npos);
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
  }

  TEST_CASE("dotted overrides") {
    nlohmann::json doc = config_to_json(default_config(3));
    apply_override(doc, "policy=baseline");
    apply_override(doc, "arena.width_m=80");
    apply_override(doc, "tree.min_fetch_gain=0.25");
    const ScenarioConfig c = config_from_json(doc);
    CHECK(c.policy == PolicyKind::Baseline);
    CHECK(c.width_m == 80.0);
    CHECK(c.tree.min_fetch_gain == 0.25);
    CHECK_THROWS_AS(apply_override(doc, "novalue"), ConfigError);
    CHECK_THROWS_AS(apply_override(doc, "arena..x=1"), ConfigError);
    apply_override(doc, "arena.bogus=1");
    CHECK_THROWS_AS(config_from_json(doc), ConfigError);
  }

  TEST_CASE("a seed fixes the sampled world") {
    ScenarioConfig c = default_config(3);
    c.random_obstacles = 5;
    c.seed = 3;
    const ScenarioInstance a = instantiate(c);
    CHECK(a == instantiate(c));
    CHECK(a.obstacles.size() == 5);
    for (const auto& s : a.starts) CHECK(a.world.is_free(s.position()));
    c.seed = 4;
    CHECK_FALSE(a == instantiate(c));
  }

  TEST_CASE("trial logs round-trip and replay to the same final state") {
    ScenarioConfig c = small(3, 2);
    c.verbose = true;
    c.random_obstacles = 2;
    const TrialLog log = run_trial(c);
    const std::string text = trial_log_text(log);
    std::istringstream in(text);
    const TrialLog back = read_trial_log(in);
    CHECK(trial_log_text(back) == text);
    CHECK(back.instance == log.instance);
    CHECK(back.ticks.size() == log.ticks.size());
    const ReplayReport r = replay(back);
    CHECK(r.identical);
    CHECK(r.logged == state_summary(log));
    CHECK(r.logged == r.replayed);
  }

  TEST_CASE("log reader errors carry the line") {
    const std::string text = trial_log_text(run_trial(small(2, 1)));
    std::string broken = text;
    const auto second = broken.find('\n') + 1;
    broken.insert(second, "{not json}\n");
    std::istringstream in(broken);
    try {
      read_trial_log(in);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
    }
    std::istringstream wrong(R"({"type":"header","schema":"other/9"})" "\n");
    CHECK_THROWS_AS(read_trial_log(wrong), ParseError);
  }

  TEST_CASE("labels parse back") {
    CHECK(parse_behavior_label("e") == BehaviorPrimitive::explore());
    CHECK(parse_behavior_label("c") == BehaviorPrimitive::complete_task());
    CHECK(parse_behavior_label("f2") == BehaviorPrimitive::fetch(2));
    CHECK(parse_behavior_label("ebar1").tag == BehaviorTag::ModifiedExplore);
    CHECK(parse_behavior_label("ebar1").robot == 1);
    CHECK_THROWS(parse_behavior_label("x"));
    for (EventKind k : {EventKind::UnexpectedObservation, EventKind::PredictedDiscovery, EventKind::ExpectedObservation,
                        EventKind::MissedExpectedObservation, EventKind::InterceptSucceeded, EventKind::InterceptFailed,
                        EventKind::TaskDiscovered})
      CHECK(parse_event_kind(to_string(k)) == k);
  }

  TEST_CASE("metrics CSV: header, one row per pair, aggregate footer, round-trip") {
    const Metrics m = run_batch(small(2, 1), 3, 21, 2);
    const std::string csv = metrics_csv_text(m);
    CHECK(csv.rfind("seed,team_size,obstacles,epistemic_time_s,baseline_time_s,delta_s,fetch_occurred,outcome\n", 0) ==
          0);
    std::istringstream in(csv);
    const auto rows = read_metrics_csv(in);
    REQUIRE(rows.size() == 3);
    for (std::size_t k = 0; k < 3; ++k) {
      CHECK(rows[k].seed == m.pairs[k].seed);
      CHECK(rows[k].outcome == m.pairs[k].outcome);
      CHECK(rows[k].fetch_occurred == m.pairs[k].fetch_occurred);
    }
    CHECK(count(csv, "\n#") >= 1);
  }

  TEST_CASE("trajectory plot: one trail per robot, rings, task, and range checks") {
    const TrialLog log = run_trial(small(2, 3));
    const std::string svg = plot_trajectories(log, 0, log.outcome.ticks);
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("version=\"1.1\"") != std::string::npos);
    CHECK(count(svg, "<polyline class=\"trail\"") == 2);
    CHECK(count(svg, "stroke-dasharray") >= 2);
    CHECK(svg.find("task") != std::string::npos);
    CHECK_THROWS_AS(plot_trajectories(log, 100000, 100001), PreconditionError);
    CHECK_THROWS_AS(plot_trajectories(log, 10, 5), PreconditionError);
  }

  TEST_CASE("outcome bars and time scatter") {
    const Metrics m = run_batch(small(2, 1), 3, 21, 2);
    const std::string bars = plot_outcome_bars(m.pairs);
    CHECK(bars.find("improve") != std::string::npos);
    CHECK(bars.find("match") != std::string::npos);
    CHECK(bars.find("regress") != std::string::npos);
    const std::string scatter = plot_time_scatter(m.pairs);
    CHECK(count(scatter, "<circle") >= 3);
    CHECK(parse_plot_kind("outcome_bars") == PlotKind::OutcomeBars);
    CHECK_THROWS_AS(parse_plot_kind("pie"), ConfigError);
  }
}
