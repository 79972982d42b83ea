#include "epicoord/epistemic_update.hpp"

#include <bit>
#include <numeric>

#include "epicoord/error.hpp"

namespace epicoord {

int EpistemicState::ones() const { return std::popcount(mask); }

std::vector<int> EpistemicState::bits() const {
  std::vector<int> out(n);
  for (int k = 0; k < n; ++k) out[k] = bit(k) ? 1 : 0;
  return out;
}

EpistemicState EpistemicState::from_bits(const std::vector<int>& bits) {
  EpistemicState e{static_cast<int>(bits.size()), 0};
  for (int k = 0; k < e.n; ++k) {
    if (bits[k]) e.mask |= 1u << k;
  }
  return e;
}

std::string to_string(const EpistemicState& e) {
  std::string s;
  for (int k = 0; k < e.n; ++k) s.push_back(e.bit(k) ? '1' : '0');
  return s;
}

HypothesisTable HypothesisTable::uniform(int n) {
  if (n < 1 || n > 20) throw PreconditionError("HypothesisTable: team size must be in [1, 20]");
  HypothesisTable t;
  t.n = n;
  const std::size_t rows = std::size_t{1} << n;
  t.weights.assign(rows, 1.0 / static_cast<double>(rows));
  return t;
}

double HypothesisTable::sum() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }

namespace {

void normalize(HypothesisTable& t) {
  const double s = t.sum();
  if (!(s > 0.0)) throw InconsistentEvidenceError("hypothesis table collapsed to zero weight");
  for (double& w : t.weights) w /= s;
}

}  // namespace

HypothesisTable bayes_update(const HypothesisTable& table, int k, int zeta, double p_plus, double p_minus,
                             BayesMode mode) {
  if (!(1.0 > p_plus && p_plus > p_minus && p_minus > 0.0)) {
    throw PreconditionError("bayes_update: need 1 > P+ > P- > 0");
  }
  if (k < 0 || k >= table.n) throw PreconditionError("bayes_update: subject outside team");
  const double hit = zeta ? p_plus : p_minus;
  const double miss = mode == BayesMode::Complementary ? 1.0 - hit : 1.0;
  HypothesisTable out = table;
  for (std::size_t r = 0; r < out.rows(); ++r) out.weights[r] *= ((r >> k) & 1u) ? hit : miss;
  normalize(out);
  return out;
}

HypothesisTable set_own_bit(const HypothesisTable& table, int self, bool value) {
  HypothesisTable out = table;
  const std::size_t b = std::size_t{1} << self;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    if (((r & b) != 0) == value) continue;
    out.weights[r ^ b] += out.weights[r];
    out.weights[r] = 0.0;
  }
  normalize(out);
  return out;
}

EpistemicState map_hypothesis(const HypothesisTable& table) {
  auto prefer = [&](std::uint32_t a, std::uint32_t b) {
    // true when row a beats row b
    if (table.weights[a] != table.weights[b]) return table.weights[a] > table.weights[b];
    if (std::popcount(a) != std::popcount(b)) return std::popcount(a) < std::popcount(b);
    for (int k = 0; k < table.n; ++k) {
      const bool ba = (a >> k) & 1u;
      const bool bb = (b >> k) & 1u;
      if (ba != bb) return !ba;
    }
    return false;
  };
  std::uint32_t best = 0;
  for (std::uint32_t r = 1; r < table.rows(); ++r) {
    if (prefer(r, best)) best = r;
  }
  return {table.n, best};
}

const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::UnexpectedObservation: return "unexpected_observation";
    case EventKind::PredictedDiscovery: return "predicted_discovery";
    case EventKind::ExpectedObservation: return "expected_observation";
    case EventKind::MissedExpectedObservation: return "missed_expected_observation";
    case EventKind::InterceptSucceeded: return "intercept_succeeded";
    case EventKind::InterceptFailed: return "intercept_failed";
    case EventKind::TaskDiscovered: return "task_discovered";
  }
  return "unknown";
}

std::optional<int> evidence_of(EventKind kind) {
  switch (kind) {
    case EventKind::UnexpectedObservation:
    case EventKind::PredictedDiscovery:
    case EventKind::InterceptSucceeded:
      return 1;
    case EventKind::MissedExpectedObservation:
    case EventKind::InterceptFailed:
      return 0;
    case EventKind::ExpectedObservation:
    case EventKind::TaskDiscovered:
      return std::nullopt;
  }
  return std::nullopt;
}

std::vector<std::pair<int, int>> infer_task_knowledge(const BeliefMap& self_belief, const ParticleStore& store,
                                                      Vec2 task) {
  if (!self_belief.task_known) throw PreconditionError("infer_task_knowledge: observer has not found the task");
  std::vector<std::pair<int, int>> out;
  for (int j = 0; j < store.team_size(); ++j) {
    if (!store.has_perspective(j)) continue;
    const BeliefMap& m = store.first_order(j).map;
    const auto idx = m.grid.index_of(task);
    const bool sensed = idx && m.cells[*idx] != Cell::Unknown;
    out.emplace_back(j, sensed ? 1 : 0);
  }
  return out;
}

EventDetector::EventDetector(int self, int team_size)
    : self_(self), in_view_(team_size, false), missed_flag_(team_size, false), predicted_found_(team_size, false) {}

std::vector<Event> EventDetector::detect(const Inputs& in) {
  std::vector<Event> events;
  const int n = static_cast<int>(in_view_.size());
  if (in.scan->task_seen && !task_reported_) {
    task_reported_ = true;
    events.push_back({EventKind::TaskDiscovered, self_, in.tick});
  }
  std::vector<bool> seen(n, false);
  for (const auto& r : in.scan->robots_seen) {
    seen[r.id] = true;
    const double res = residual(in.store->first_order(r.id).pose, r.pose);
    if (res > in.delta) {
      events.push_back({EventKind::UnexpectedObservation, r.id, in.tick});
    } else if (!in_view_[r.id]) {
      events.push_back({EventKind::ExpectedObservation, r.id, in.tick});
    }
  }
  for (int j = 0; j < n; ++j) {
    if (j == self_) continue;
    in_view_[j] = seen[j];
    if (seen[j]) {
      missed_flag_[j] = false;
      continue;
    }
    const Vec2 predicted = in.store->first_order(j).pose.position();
    const bool should_see = distance(predicted, in.self_pose.position()) <= in.sensing_range &&
                            in.own_map->grid.contains(predicted) &&
                            line_of_sight(in.own_map->grid, in.own_map->cells, in.self_pose.position(), predicted);
    if (should_see && !missed_flag_[j]) events.push_back({EventKind::MissedExpectedObservation, j, in.tick});
    missed_flag_[j] = should_see;
  }
  if (in.known_task) {
    for (int j = 0; j < n; ++j) {
      if (j == self_ || predicted_found_[j]) continue;
      const AgentState& a = in.store->first_order(j);
      const auto idx = a.map.grid.index_of(*in.known_task);
      if (a.map.task_known || (idx && a.map.cells[*idx] != Cell::Unknown)) {
        predicted_found_[j] = true;
        events.push_back({EventKind::PredictedDiscovery, j, in.tick});
      }
    }
  }
  return events;
}

}  // namespace epicoord
