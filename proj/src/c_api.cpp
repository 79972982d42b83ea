#include "epicoord/epicoord.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "epicoord/error.hpp"
#include "epicoord/plots.hpp"
#include "epicoord/trial_io.hpp"

using namespace epicoord;

struct ec_scenario {
  nlohmann::json doc;
  ScenarioConfig config;
};

struct ec_trial {
  TrialLog log;
};

struct ec_batch {
  Metrics metrics;
};

namespace {

thread_local std::string g_error;
thread_local int g_line = 0;
thread_local int g_column = 0;

ec_status fail(ec_status code, const std::string& msg, int line = 0, int column = 0) {
  g_error = msg;
  g_line = line;
  g_column = column;
  return code;
}

void clear_error() {
  g_error.clear();
  g_line = 0;
  g_column = 0;
}

// Runs f, mapping exceptions onto status codes; `where` prefixes parse messages (a path).
template <class F>
ec_status guarded(F&& f, const std::string& where = "") {
  clear_error();
  try {
    return f();
  } catch (const ParseError& e) {
    std::string msg = e.what();
    if (!where.empty()) {
      msg = where + (e.line() ? ":" + std::to_string(e.line()) + ":" + std::to_string(e.column()) : "") + ": " + msg;
    }
    return fail(EC_ERR_PARSE, msg, e.line(), e.column());
  } catch (const ConfigError& e) {
    return fail(EC_ERR_CONFIG, (where.empty() ? "" : where + ": ") + e.what());
  } catch (const PreconditionError& e) {
    return fail(EC_ERR_ARGUMENT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(EC_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(EC_ERR_INTERNAL, e.what());
  }
}

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (p) std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

ec_status give(const std::string& s, char** out) {
  *out = dup(s);
  return *out ? EC_OK : fail(EC_ERR_INTERNAL, "out of memory");
}

std::string read_file(const std::string& path, bool& ok) {
  std::ifstream f(path, std::ios::binary);
  ok = static_cast<bool>(f);
  std::ostringstream s;
  if (ok) s << f.rdbuf();
  return s.str();
}

bool write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) return false;
  f << text;
  return static_cast<bool>(f);
}

ec_status make_scenario(nlohmann::json doc, ec_scenario** out) {
  ScenarioConfig cfg = config_from_json(doc);
  *out = new ec_scenario{std::move(doc), std::move(cfg)};
  return EC_OK;
}

}  // namespace

extern "C" {

const char* ec_last_error(void) { return g_error.c_str(); }
int ec_last_error_line(void) { return g_line; }
int ec_last_error_column(void) { return g_column; }
const char* ec_version(void) { return "1.0.0"; }

void ec_string_free(char* s) { std::free(s); }

ec_status ec_scenario_default(int team_size, ec_scenario** out) {
  if (!out) return fail(EC_ERR_ARGUMENT, "null output pointer");
  return guarded([&] {
    if (team_size < 1) return fail(EC_ERR_ARGUMENT, "team_size must be at least 1");
    return make_scenario(config_to_json(default_config(team_size)), out);
  });
}

ec_status ec_scenario_from_json(const char* text, ec_scenario** out) {
  if (!text || !out) return fail(EC_ERR_ARGUMENT, "null argument");
  return guarded([&] { return make_scenario(parse_json_text(text), out); }, "<config>");
}

ec_status ec_scenario_from_file(const char* path, ec_scenario** out) {
  if (!path || !out) return fail(EC_ERR_ARGUMENT, "null argument");
  bool ok = false;
  const std::string text = read_file(path, ok);
  if (!ok) return fail(EC_ERR_IO, std::string("cannot read ") + path);
  return guarded([&] { return make_scenario(parse_json_text(text), out); }, path);
}

ec_status ec_scenario_override(ec_scenario* s, const char* assignment) {
  if (!s || !assignment) return fail(EC_ERR_ARGUMENT, "null argument");
  return guarded(
      [&] {
        nlohmann::json doc = s->doc;
        apply_override(doc, assignment);
        ScenarioConfig cfg = config_from_json(doc);
        s->doc = std::move(doc);
        s->config = std::move(cfg);
        return EC_OK;
      },
      std::string("--override ") + assignment);
}

ec_status ec_scenario_set_seed(ec_scenario* s, uint64_t seed) {
  if (!s) return fail(EC_ERR_ARGUMENT, "null scenario");
  return guarded([&] {
    s->doc["seed"] = seed;
    s->config.seed = seed;
    return EC_OK;
  });
}

ec_status ec_scenario_to_json(const ec_scenario* s, char** out) {
  if (!s || !out) return fail(EC_ERR_ARGUMENT, "null argument");
  return guarded([&] { return give(config_to_json(s->config).dump(2), out); });
}

void ec_scenario_free(ec_scenario* s) { delete s; }

ec_status ec_trial_run(const ec_scenario* s, ec_trial** out) {
  if (!s || !out) return fail(EC_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    *out = new ec_trial{run_trial(s->config)};
    return EC_OK;
  });
}

ec_status ec_trial_load(const char* log_path, ec_trial** out) {
  if (!log_path || !out) return fail(EC_ERR_ARGUMENT, "null argument");
  std::ifstream f(log_path, std::ios::binary);
  if (!f) return fail(EC_ERR_IO, std::string("cannot read ") + log_path);
  return guarded(
      [&] {
        *out = new ec_trial{read_trial_log(f)};
        return EC_OK;
      },
      log_path);
}

ec_status ec_trial_completed(const ec_trial* t, int* completed) {
  if (!t || !completed) return fail(EC_ERR_ARGUMENT, "null argument");
  clear_error();
  *completed = t->log.outcome.completed ? 1 : 0;
  return EC_OK;
}

ec_status ec_trial_completion_time(const ec_trial* t, double* seconds) {
  if (!t || !seconds) return fail(EC_ERR_ARGUMENT, "null argument");
  clear_error();
  if (!t->log.outcome.completion_time_s) return fail(EC_ERR_STATE, "trial did not complete (censored)");
  *seconds = *t->log.outcome.completion_time_s;
  return EC_OK;
}

ec_status ec_trial_fetches(const ec_trial* t, int* started, int* succeeded) {
  if (!t || !started || !succeeded) return fail(EC_ERR_ARGUMENT, "null argument");
  clear_error();
  *started = t->log.outcome.fetches_started;
  *succeeded = t->log.outcome.fetch_successes;
  return EC_OK;
}

ec_status ec_trial_summary(const ec_trial* t, char** out) {
  if (!t || !out) return fail(EC_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    const TrialLog& log = t->log;
    std::ostringstream s;
    char buf[128];
    if (log.outcome.completion_time_s) {
      std::snprintf(buf, sizeof buf, "completed in %.1f s", *log.outcome.completion_time_s);
    } else {
      std::snprintf(buf, sizeof buf, "censored after %.1f s", log.outcome.ticks * log.config.dt);
    }
    s << buf << " (seed " << log.config.seed << ", " << log.config.team_size() << " robots, "
      << log.outcome.fetches_started << " fetches started, " << log.outcome.fetch_successes << " succeeded)\n";
    for (const auto& d : log.decisions) {
      std::snprintf(buf, sizeof buf, "t=%.1f robot %d -> %s :", d.tick * log.config.dt, d.robot,
                    to_string(d.result.chosen).c_str());
      s << buf;
      for (const auto& e : d.result.evaluations) {
        std::snprintf(buf, sizeof buf, " [%s %.1f%s]", to_string(e.behavior).c_str(), e.mission_time,
                      e.pruned ? " pruned" : "");
        s << buf;
      }
      s << '\n';
    }
    return give(s.str(), out);
  });
}

ec_status ec_trial_write_log(const ec_trial* t, const char* path) {
  if (!t || !path) return fail(EC_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    if (!write_file(path, trial_log_text(t->log))) return fail(EC_ERR_IO, std::string("cannot write ") + path);
    return EC_OK;
  });
}

void ec_trial_free(ec_trial* t) { delete t; }

ec_status ec_replay(const char* log_path, int* identical, char** logged, char** replayed) {
  if (!log_path || !identical) return fail(EC_ERR_ARGUMENT, "null argument");
  std::ifstream f(log_path, std::ios::binary);
  if (!f) return fail(EC_ERR_IO, std::string("cannot read ") + log_path);
  return guarded(
      [&] {
        const ReplayReport r = replay(read_trial_log(f));
        *identical = r.identical ? 1 : 0;
        if (logged && give(r.logged, logged) != EC_OK) return EC_ERR_INTERNAL;
        if (replayed && give(r.replayed, replayed) != EC_OK) return EC_ERR_INTERNAL;
        return EC_OK;
      },
      log_path);
}

ec_status ec_batch_run(const ec_scenario* s, int n_trials, uint64_t seed_base, int jobs, ec_batch** out) {
  if (!s || !out) return fail(EC_ERR_ARGUMENT, "null argument");
  if (n_trials < 1) return fail(EC_ERR_ARGUMENT, "trials must be at least 1");
  if (jobs < 1) return fail(EC_ERR_ARGUMENT, "jobs must be at least 1");
  return guarded([&] {
    *out = new ec_batch{run_batch(s->config, n_trials, seed_base, jobs)};
    return EC_OK;
  });
}

ec_status ec_batch_csv(const ec_batch* b, char** out) {
  if (!b || !out) return fail(EC_ERR_ARGUMENT, "null argument");
  return guarded([&] { return give(metrics_csv_text(b->metrics), out); });
}

ec_status ec_batch_write_csv(const ec_batch* b, const char* path) {
  if (!b || !path) return fail(EC_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    if (!write_file(path, metrics_csv_text(b->metrics))) return fail(EC_ERR_IO, std::string("cannot write ") + path);
    return EC_OK;
  });
}

ec_status ec_batch_rates(const ec_batch* b, int* completed_pairs, double* improve, double* match, double* regress) {
  if (!b || !completed_pairs || !improve || !match || !regress) return fail(EC_ERR_ARGUMENT, "null argument");
  clear_error();
  *completed_pairs = b->metrics.completed_pairs;
  *improve = b->metrics.improve_rate;
  *match = b->metrics.match_rate;
  *regress = b->metrics.regress_rate;
  return EC_OK;
}

ec_status ec_batch_fetch_stats(const ec_batch* b, int* pairs, double* mean_s, double* mean_pct, double* sign_test_p) {
  if (!b || !pairs || !mean_s || !mean_pct || !sign_test_p) return fail(EC_ERR_ARGUMENT, "null argument");
  clear_error();
  *pairs = b->metrics.fetch_pairs;
  *mean_s = b->metrics.mean_fetch_improvement_s;
  *mean_pct = b->metrics.mean_fetch_improvement_pct;
  *sign_test_p = b->metrics.fetch_sign_test_p;
  return EC_OK;
}

void ec_batch_free(ec_batch* b) { delete b; }

ec_status ec_plot(const char* kind, const char* source_path, int tick_from, int tick_to, const char* out_path) {
  if (!kind || !source_path || !out_path) return fail(EC_ERR_ARGUMENT, "null argument");
  PlotKind k;
  {
    const ec_status st = guarded([&] {
      k = parse_plot_kind(kind);
      return EC_OK;
    });
    if (st != EC_OK) return EC_ERR_ARGUMENT;
  }
  std::ifstream f(source_path, std::ios::binary);
  if (!f) return fail(EC_ERR_IO, std::string("cannot read ") + source_path);
  return guarded(
      [&] {
        std::string svg;
        if (k == PlotKind::Trajectories) {
          const TrialLog log = read_trial_log(f);
          svg = plot_trajectories(log, tick_from, tick_to < 0 ? log.outcome.ticks : tick_to);
        } else {
          const auto pairs = read_metrics_csv(f);
          svg = k == PlotKind::OutcomeBars ? plot_outcome_bars(pairs) : plot_time_scatter(pairs);
        }
        if (!write_file(out_path, svg)) return fail(EC_ERR_IO, std::string("cannot write ") + out_path);
        return EC_OK;
      },
      source_path);
}

}  // extern "C"
