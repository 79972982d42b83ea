// Command-line front end. Talks to the simulator only through the C API.
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "epicoord/epicoord.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitCensored = 2;

int report(const char* what) {
  std::fprintf(stderr, "error: %s: %s\n", what, ec_last_error());
  return kExitError;
}

struct Scenario {
  ec_scenario* h = nullptr;
  ~Scenario() { ec_scenario_free(h); }
};

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
};

// Builds the scenario from --config (or defaults), then --override and --seed in that order.
int load_scenario(const Common& c, Scenario& s) {
  const ec_status st = c.config.empty() ? ec_scenario_default(3, &s.h) : ec_scenario_from_file(c.config.c_str(), &s.h);
  if (st != EC_OK) return report("config");
  for (const auto& o : c.overrides) {
    if (ec_scenario_override(s.h, o.c_str()) != EC_OK) return report("override");
  }
  if (c.seed && ec_scenario_set_seed(s.h, *c.seed) != EC_OK) return report("seed");
  return kExitOk;
}

int cmd_run(const Common& c, const std::string& out, bool verbose) {
  Scenario s;
  if (int rc = load_scenario(c, s)) return rc;
  if (verbose && ec_scenario_override(s.h, "verbose=true") != EC_OK) return report("verbose");
  ec_trial* t = nullptr;
  if (ec_trial_run(s.h, &t) != EC_OK) return report("run");
  int rc = kExitOk;
  char* summary = nullptr;
  if (ec_trial_summary(t, &summary) == EC_OK) {
    std::fputs(summary, stdout);
    ec_string_free(summary);
  } else {
    rc = report("summary");
  }
  if (rc == kExitOk && !out.empty()) {
    if (ec_trial_write_log(t, out.c_str()) != EC_OK) {
      rc = report("log");
    } else {
      std::printf("log written to %s\n", out.c_str());
    }
  }
  int completed = 0;
  ec_trial_completed(t, &completed);
  ec_trial_free(t);
  if (rc != kExitOk) return rc;
  return completed ? kExitOk : kExitCensored;
}

int cmd_batch(const Common& c, int trials, int jobs, const std::string& out) {
  Scenario s;
  if (int rc = load_scenario(c, s)) return rc;
  std::uint64_t base = 1;
  if (c.seed) base = *c.seed;
  ec_batch* b = nullptr;
  if (ec_batch_run(s.h, trials, base, jobs, &b) != EC_OK) return report("batch");
  int rc = kExitOk;
  if (out.empty()) {
    char* csv = nullptr;
    if (ec_batch_csv(b, &csv) == EC_OK) {
      std::fputs(csv, stdout);
      ec_string_free(csv);
    } else {
      rc = report("csv");
    }
  } else if (ec_batch_write_csv(b, out.c_str()) != EC_OK) {
    rc = report("csv");
  } else {
    int done = 0, fetch_pairs = 0;
    double improve = 0, match = 0, regress = 0, mean_s = 0, mean_pct = 0, p = 1;
    ec_batch_rates(b, &done, &improve, &match, &regress);
    ec_batch_fetch_stats(b, &fetch_pairs, &mean_s, &mean_pct, &p);
    std::printf("%d/%d pairs completed: improve %.1f%%, match %.1f%%, regress %.1f%%\n", done, trials, 100 * improve,
                100 * match, 100 * regress);
    std::printf("fetch pairs %d: mean improvement %.2f s (%.1f%%), sign test p = %.4g\n", fetch_pairs, mean_s, mean_pct,
                p);
    std::printf("csv written to %s\n", out.c_str());
  }
  ec_batch_free(b);
  return rc;
}

int cmd_replay(const std::string& log) {
  int identical = 0;
  char* logged = nullptr;
  char* replayed = nullptr;
  if (ec_replay(log.c_str(), &identical, &logged, &replayed) != EC_OK) return report("replay");
  if (identical) {
    std::printf("replay identical: %s\n", logged);
  } else {
    std::printf("replay differs\nlogged:   %s\nreplayed: %s\n", logged, replayed);
  }
  ec_string_free(logged);
  ec_string_free(replayed);
  return identical ? kExitOk : kExitError;
}

int cmd_plot(const std::string& kind, const std::string& source, int from, int to, const std::string& out) {
  if (ec_plot(kind.c_str(), source.c_str(), from, to, out.c_str()) != EC_OK) return report("plot");
  std::printf("plot written to %s\n", out.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-robot epistemic coordination simulator"};
  app.require_subcommand(1);

  Common common;
  std::string out;
  bool verbose = false;
  int trials = 50;
  int jobs = 1;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "scenario JSON")->check(CLI::ExistingFile);
    sub->add_option("--seed", common.seed, "scenario seed (batch: first seed)");
    sub->add_option("--override", common.overrides, "dotted.key=value, repeatable")->take_all();
  };

  CLI::App* run = app.add_subcommand("run", "run one trial");
  add_common(run);
  run->add_option("--out", out, "write the trial log (JSON Lines)");
  run->add_flag("--verbose", verbose, "log particle estimates and MPPI samples");

  CLI::App* batch = app.add_subcommand("batch", "paired epistemic/baseline trials");
  add_common(batch);
  batch->add_option("--trials", trials, "number of seeds")->check(CLI::PositiveNumber);
  batch->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  batch->add_option("--out", out, "write the metrics CSV instead of printing it");

  std::string log;
  CLI::App* rep = app.add_subcommand("replay", "re-simulate a trial log and compare");
  rep->add_option("log", log, "trial log")->required();

  std::string kind;
  std::string source;
  int from = 0;
  int to = -1;
  CLI::App* plot = app.add_subcommand("plot", "render an SVG");
  plot->add_option("kind", kind, "trajectories | outcome_bars | time_scatter")->required();
  plot->add_option("source", source, "trial log or metrics CSV")->required();
  plot->add_option("--out", out, "SVG path")->required();
  plot->add_option("--from", from, "first tick (trajectories)");
  plot->add_option("--to", to, "last tick, -1 for the end (trajectories)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitError;
  }

  if (*run) return cmd_run(common, out, verbose);
  if (*batch) return cmd_batch(common, trials, jobs, out);
  if (*rep) return cmd_replay(log);
  return cmd_plot(kind, source, from, to, out);
}
