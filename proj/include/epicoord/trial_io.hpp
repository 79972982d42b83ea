#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "epicoord/sim_engine.hpp"

namespace epicoord {

inline constexpr const char* kTrialLogSchema = "epicoord.trial_log/1";

/// JSON Lines: a header (schema, config, world), one record per tick, then decision and MPPI
/// records and a closing outcome record. Output is a pure function of the log.
void write_trial_log(std::ostream& out, const TrialLog& log);
std::string trial_log_text(const TrialLog& log);
void save_trial_log(const std::string& path, const TrialLog& log);

/// Inverse of write_trial_log. Behaviors come back as their labels (ModifiedExplore keeps
/// only the robot it repels from). Throws ParseError with the offending line.
TrialLog read_trial_log(std::istream& in);
TrialLog load_trial_log(const std::string& path);

BehaviorPrimitive parse_behavior_label(const std::string& label);
EventKind parse_event_kind(const std::string& name);

nlohmann::json evaluation_to_json(const BehaviorEvaluation& e);

/// Final state of a trial in one line: outcome, final poses, behaviors and MAP strings.
std::string state_summary(const TrialLog& log);

struct ReplayReport {
  bool identical = false;
  std::string logged;
  std::string replayed;
};

/// Re-simulates the logged config on the logged world and compares final state summaries.
ReplayReport replay(const TrialLog& log);

/// CSV with header seed,team_size,obstacles,epistemic_time_s,baseline_time_s,delta_s,
/// fetch_occurred,outcome, followed by '#' comment lines with the aggregates.
void write_metrics_csv(std::ostream& out, const Metrics& m);
std::string metrics_csv_text(const Metrics& m);
/// Reads the rows back (comment lines are skipped).
std::vector<PairRecord> read_metrics_csv(std::istream& in);

}  // namespace epicoord
