#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "epicoord/belief_engine.hpp"
#include "epicoord/grid_world.hpp"

namespace epicoord {

/// Bit k set means "robot k has discovered the task".
struct EpistemicState {
  int n = 0;
  std::uint32_t mask = 0;

  bool bit(int k) const { return (mask >> k) & 1u; }
  int ones() const;
  std::vector<int> bits() const;
  static EpistemicState from_bits(const std::vector<int>& bits);
  friend bool operator==(const EpistemicState&, const EpistemicState&) = default;
};

std::string to_string(const EpistemicState& e);

/// Weighted distribution over all 2^n epistemic states; row r is the state with mask r.
struct HypothesisTable {
  int n = 0;
  std::vector<double> weights;

  static HypothesisTable uniform(int n);
  double sum() const;
  std::size_t rows() const { return weights.size(); }
};

enum class BayesMode { Complementary, Literal };

/// Likelihood update for evidence about robot k. Complementary: rows with e_k = 1 are
/// scaled by P+ (zeta = 1) or P- (zeta = 0) and rows with e_k = 0 by 1 - P+ or 1 - P-.
/// Literal: only rows with e_k = 1 are scaled. The result is renormalized.
HypothesisTable bayes_update(const HypothesisTable& table, int k, int zeta, double p_plus, double p_minus,
                             BayesMode mode = BayesMode::Complementary);

/// Moves every row's weight onto its twin with bit `self` = value (certain self-knowledge).
HypothesisTable set_own_bit(const HypothesisTable& table, int self, bool value);

/// Argmax row; ties go to fewest ones, then lexicographically smallest bit vector.
EpistemicState map_hypothesis(const HypothesisTable& table);

enum class EventKind {
  UnexpectedObservation,
  PredictedDiscovery,
  ExpectedObservation,
  MissedExpectedObservation,
  InterceptSucceeded,
  InterceptFailed,
  TaskDiscovered,
};

const char* to_string(EventKind k);

struct Event {
  EventKind kind = EventKind::ExpectedObservation;
  int subject = 0;
  int tick = 0;
  friend bool operator==(const Event&, const Event&) = default;
};

/// Evidence polarity of an event about its subject, if it carries any.
std::optional<int> evidence_of(EventKind kind);

/// e_j = 1 iff the map attributed to j by the first-order particle has the task cell sensed.
/// Requires the observer to know the task.
std::vector<std::pair<int, int>> infer_task_knowledge(const BeliefMap& self_belief, const ParticleStore& store,
                                                      Vec2 task);

/// Turns a scan and the current particles into the closed list of events. Keeps per-peer
/// episode flags so one sighting or one absence produces one event.
class EventDetector {
 public:
  EventDetector() = default;
  EventDetector(int self, int team_size);

  struct Inputs {
    const SensorScan* scan = nullptr;
    const ParticleStore* store = nullptr;
    const BeliefMap* own_map = nullptr;  // for line of sight to predicted peers
    Pose self_pose;
    double sensing_range = 0.0;
    std::optional<Vec2> known_task;      // set once the observer has found the task
    double delta = 2.0;
    int tick = 0;
  };

  /// Does not modify the particles; the caller re-anchors afterwards.
  std::vector<Event> detect(const Inputs& in);

  /// Suppresses a later PredictedDiscovery for j (already accounted for).
  void mark_predicted_found(int j) { predicted_found_.at(j) = true; }

 private:
  int self_ = 0;
  std::vector<bool> in_view_;
  std::vector<bool> missed_flag_;
  std::vector<bool> predicted_found_;
  bool task_reported_ = false;
};

}  // namespace epicoord
