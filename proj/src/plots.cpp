#include "epicoord/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "epicoord/error.hpp"

namespace epicoord {

namespace {

const char* kRobotColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

const char* robot_color(int i) { return kRobotColors[i % 8]; }

const char* behavior_fill(BehaviorTag t) {
  switch (t) {
    case BehaviorTag::Explore: return "#ffffff";
    case BehaviorTag::CompleteTask: return "#2ca02c";
    case BehaviorTag::Fetch: return "#d62728";
    case BehaviorTag::ModifiedExplore: return "#ffbf00";
  }
  return "#000000";
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string open_svg(double w, double h) {
  std::ostringstream s;
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << num(w) << "\" height=\"" << num(h)
    << "\" viewBox=\"0 0 " << num(w) << ' ' << num(h) << "\">\n"
    << "<rect x=\"0\" y=\"0\" width=\"" << num(w) << "\" height=\"" << num(h) << "\" fill=\"#ffffff\"/>\n";
  return s.str();
}

std::string text(double x, double y, const std::string& t, const char* anchor = "start", int size = 12) {
  std::ostringstream s;
  s << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" font-family=\"sans-serif\" font-size=\"" << size
    << "\" text-anchor=\"" << anchor << "\">" << t << "</text>\n";
  return s.str();
}

}  // namespace

PlotKind parse_plot_kind(const std::string& name) {
  if (name == "trajectories") return PlotKind::Trajectories;
  if (name == "outcome_bars") return PlotKind::OutcomeBars;
  if (name == "time_scatter") return PlotKind::TimeScatter;
  throw ConfigError("unknown plot kind '" + name + "' (expected trajectories, outcome_bars or time_scatter)");
}

std::string plot_trajectories(const TrialLog& log, int tick_from, int tick_to) {
  std::vector<const TickRecord*> shown;
  for (const auto& t : log.ticks) {
    if (t.tick >= tick_from && t.tick <= tick_to) shown.push_back(&t);
  }
  if (shown.empty()) {
    throw PreconditionError("plot: tick range [" + std::to_string(tick_from) + ", " + std::to_string(tick_to) +
                            "] selects no logged tick");
  }
  const GridGeometry& g = log.instance.world.grid;
  const double margin = 30.0;
  const double scale = 720.0 / std::max(g.width_m(), g.height_m());
  const double W = g.width_m() * scale + 2 * margin;
  const double H = g.height_m() * scale + 2 * margin + 40.0;
  auto X = [&](double x) { return margin + x * scale; };
  auto Y = [&](double y) { return margin + (g.height_m() - y) * scale; };

  std::ostringstream s;
  s << open_svg(W, H);
  s << "<rect x=\"" << num(X(0)) << "\" y=\"" << num(Y(g.height_m())) << "\" width=\"" << num(g.width_m() * scale)
    << "\" height=\"" << num(g.height_m() * scale) << "\" fill=\"none\" stroke=\"#000000\"/>\n";
  for (const auto& o : log.instance.obstacles) {
    const double h = o.side / 2;
    s << "<rect class=\"obstacle\" x=\"" << num(X(o.center.x - h)) << "\" y=\"" << num(Y(o.center.y + h))
      << "\" width=\"" << num(o.side * scale) << "\" height=\"" << num(o.side * scale) << "\" fill=\"#555555\"/>\n";
  }
  const Vec2 task = log.instance.world.task_position;
  s << "<circle class=\"task-radius\" cx=\"" << num(X(task.x)) << "\" cy=\"" << num(Y(task.y)) << "\" r=\""
    << num(log.instance.world.completion_radius * scale) << "\" fill=\"#fff3b0\" stroke=\"#b8860b\"/>\n";
  s << "<path class=\"task\" d=\"M " << num(X(task.x) - 6) << ' ' << num(Y(task.y) - 6) << " L " << num(X(task.x) + 6)
    << ' ' << num(Y(task.y) + 6) << " M " << num(X(task.x) - 6) << ' ' << num(Y(task.y) + 6) << " L "
    << num(X(task.x) + 6) << ' ' << num(Y(task.y) - 6) << "\" stroke=\"#b8860b\" stroke-width=\"3\"/>\n";

  const int n = static_cast<int>(shown.front()->poses.size());
  for (int i = 0; i < n; ++i) {
    s << "<polyline class=\"trail\" fill=\"none\" stroke=\"" << robot_color(i) << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < shown.size(); ++k) {
      const Pose& p = shown[k]->poses[i];
      s << (k ? " " : "") << num(X(p.x)) << ',' << num(Y(p.y));
    }
    s << "\"/>\n";
    const Pose& last = shown.back()->poses[i];
    const double range = i < log.config.team_size() ? log.config.robots[i].spec.sensing_range : 0.0;
    s << "<circle class=\"sensing\" cx=\"" << num(X(last.x)) << "\" cy=\"" << num(Y(last.y)) << "\" r=\""
      << num(range * scale) << "\" fill=\"none\" stroke=\"" << robot_color(i)
      << "\" stroke-dasharray=\"4 4\" stroke-opacity=\"0.6\"/>\n";
    // A glyph wherever the behavior changes, and at both ends of the trail.
    for (std::size_t k = 0; k < shown.size(); ++k) {
      const auto& beh = shown[k]->behaviors;
      if (i >= static_cast<int>(beh.size())) break;
      const bool changed = k == 0 || k + 1 == shown.size() || !(beh[i].tag == shown[k - 1]->behaviors[i].tag &&
                                                                  beh[i].robot == shown[k - 1]->behaviors[i].robot);
      if (!changed) continue;
      const Pose& p = shown[k]->poses[i];
      s << "<circle class=\"glyph\" cx=\"" << num(X(p.x)) << "\" cy=\"" << num(Y(p.y)) << "\" r=\"4\" fill=\""
        << behavior_fill(beh[i].tag) << "\" stroke=\"" << robot_color(i) << "\"><title>robot " << i << ' '
        << to_string(beh[i]) << " t=" << num(shown[k]->tick * log.config.dt) << "</title></circle>\n";
    }
  }
  const double ly = H - 20.0;
  double lx = margin;
  const std::pair<const char*, BehaviorTag> legend[] = {{"explore", BehaviorTag::Explore},
                                                        {"modified explore", BehaviorTag::ModifiedExplore},
                                                        {"fetch", BehaviorTag::Fetch},
                                                        {"complete task", BehaviorTag::CompleteTask}};
  for (const auto& [name, tag] : legend) {
    s << "<circle cx=\"" << num(lx) << "\" cy=\"" << num(ly - 4) << "\" r=\"5\" fill=\"" << behavior_fill(tag)
      << "\" stroke=\"#000000\"/>\n";
    s << text(lx + 10, ly, name);
    lx += 140.0;
  }
  s << text(W - margin, ly,
            "t = " + num(shown.front()->tick * log.config.dt) + " .. " + num(shown.back()->tick * log.config.dt) + " s",
            "end");
  s << "</svg>\n";
  return s.str();
}

std::string plot_outcome_bars(const std::vector<PairRecord>& pairs) {
  if (pairs.empty()) throw PreconditionError("plot: no pairs to draw");
  struct Counts {
    int improve = 0, match = 0, regress = 0, censored = 0;
    int total() const { return improve + match + regress + censored; }
  };
  std::map<std::pair<int, int>, Counts> groups;
  for (const auto& p : pairs) {
    Counts& c = groups[{p.team_size, p.obstacles}];
    if (p.outcome == "improve") ++c.improve;
    else if (p.outcome == "match") ++c.match;
    else if (p.outcome == "regress") ++c.regress;
    else ++c.censored;
  }
  const double bar = 60.0, gap = 40.0, left = 60.0, top = 30.0, plot_h = 300.0;
  const double W = left + groups.size() * (bar + gap) + 160.0;
  const double H = top + plot_h + 70.0;
  std::ostringstream s;
  s << open_svg(W, H);
  s << "<line x1=\"" << num(left) << "\" y1=\"" << num(top) << "\" x2=\"" << num(left) << "\" y2=\""
    << num(top + plot_h) << "\" stroke=\"#000000\"/>\n";
  for (int q = 0; q <= 4; ++q) {
    const double y = top + plot_h * (1.0 - q / 4.0);
    s << text(left - 6, y + 4, std::to_string(q * 25) + "%", "end", 10);
  }
  const std::pair<const char*, const char*> series[] = {
      {"improve", "#2ca02c"}, {"match", "#1f77b4"}, {"regress", "#d62728"}, {"censored", "#999999"}};
  double x = left + gap / 2;
  for (const auto& [key, c] : groups) {
    const int vals[] = {c.improve, c.match, c.regress, c.censored};
    double y = top + plot_h;
    for (int q = 0; q < 4; ++q) {
      const double h = plot_h * vals[q] / c.total();
      if (h <= 0) continue;
      y -= h;
      s << "<rect class=\"" << series[q].first << "\" x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\""
        << num(bar) << "\" height=\"" << num(h) << "\" fill=\"" << series[q].second << "\"><title>"
        << series[q].first << ' ' << vals[q] << '/' << c.total() << "</title></rect>\n";
    }
    s << text(x + bar / 2, top + plot_h + 16, std::to_string(key.first) + " robots", "middle", 11);
    s << text(x + bar / 2, top + plot_h + 30, std::to_string(key.second) + " obstacles", "middle", 11);
    x += bar + gap;
  }
  double ly = top + 10;
  for (const auto& [name, color] : series) {
    s << "<rect x=\"" << num(W - 140) << "\" y=\"" << num(ly - 10) << "\" width=\"12\" height=\"12\" fill=\"" << color
      << "\"/>\n";
    s << text(W - 122, ly, name);
    ly += 20;
  }
  s << "</svg>\n";
  return s.str();
}

std::string plot_time_scatter(const std::vector<PairRecord>& pairs) {
  std::vector<const PairRecord*> done;
  for (const auto& p : pairs) {
    if (p.epistemic_time_s && p.baseline_time_s) done.push_back(&p);
  }
  if (done.empty()) throw PreconditionError("plot: no completed pairs to draw");
  double hi = 0.0;
  for (const auto* p : done) hi = std::max({hi, *p->epistemic_time_s, *p->baseline_time_s});
  hi = std::max(1.0, std::ceil(hi / 50.0) * 50.0);
  const double left = 60.0, top = 20.0, side = 400.0;
  const double W = left + side + 170.0, H = top + side + 50.0;
  auto X = [&](double v) { return left + side * v / hi; };
  auto Y = [&](double v) { return top + side * (1.0 - v / hi); };
  std::ostringstream s;
  s << open_svg(W, H);
  s << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(side) << "\" height=\"" << num(side)
    << "\" fill=\"none\" stroke=\"#000000\"/>\n";
  s << "<line class=\"parity\" x1=\"" << num(X(0)) << "\" y1=\"" << num(Y(0)) << "\" x2=\"" << num(X(hi))
    << "\" y2=\"" << num(Y(hi)) << "\" stroke=\"#888888\" stroke-dasharray=\"5 5\"/>\n";
  for (const auto* p : done) {
    s << "<circle class=\"pair\" cx=\"" << num(X(*p->baseline_time_s)) << "\" cy=\"" << num(Y(*p->epistemic_time_s))
      << "\" r=\"3.5\" fill=\"" << (p->fetch_occurred ? "#d62728" : "#1f77b4") << "\"><title>seed " << p->seed
      << "</title></circle>\n";
  }
  s << text(left + side / 2, top + side + 35, "baseline completion time (s)", "middle");
  s << text(left - 40, top + side / 2, "epistemic (s)", "middle");
  s << text(left, top + side + 16, "0", "middle", 10);
  s << text(left + side, top + side + 16, num(hi), "middle", 10);
  s << "<circle cx=\"" << num(W - 150) << "\" cy=\"" << num(top + 10) << "\" r=\"4\" fill=\"#d62728\"/>\n";
  s << text(W - 140, top + 14, "successful fetch");
  s << "<circle cx=\"" << num(W - 150) << "\" cy=\"" << num(top + 30) << "\" r=\"4\" fill=\"#1f77b4\"/>\n";
  s << text(W - 140, top + 34, "no fetch");
  s << "</svg>\n";
  return s.str();
}

}  // namespace epicoord
