#pragma once

#include <string>
#include <vector>

#include "epicoord/sim_engine.hpp"

namespace epicoord {

enum class PlotKind { Trajectories, OutcomeBars, TimeScatter };

/// "trajectories", "outcome_bars" or "time_scatter"; throws ConfigError otherwise.
PlotKind parse_plot_kind(const std::string& name);

/// SVG 1.1: one trail per robot over ticks [from, to] (inclusive), sensing rings at the last
/// shown pose, behavior glyphs where the behavior changes, obstacles and the task.
/// Throws PreconditionError when no logged tick falls in the range.
std::string plot_trajectories(const TrialLog& log, int tick_from, int tick_to);

/// Stacked improve / match / regress (and censored) shares, one bar per (team size, obstacles).
std::string plot_outcome_bars(const std::vector<PairRecord>& pairs);

/// Epistemic against baseline completion time per completed pair, with the y = x line.
std::string plot_time_scatter(const std::vector<PairRecord>& pairs);

}  // namespace epicoord
