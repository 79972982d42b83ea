#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "epicoord/behavior_tree.hpp"
#include "epicoord/dynamics.hpp"
#include "epicoord/grid_world.hpp"

namespace epicoord {

struct MppiParams {
  int K = 512;
  int H_u = 30;
  double noise_std_v = 0.3;
  double noise_std_omega = 0.6;
  double eta = 50.0;
  double gamma = 0.0;
  double safety_margin = 1.0;
  double safety_weight = 1e6;
  double alpha = 0.8;
  double kappa = 1.3;
  double sigma_offset = 0.5;
  bool weighted_average = false;
  double temperature = 1.0;  // only for weighted_average
  int max_attempts = 3;

  /// Throws ConfigError; `sensing_range` bounds sigma_offset.
  void validate(double sensing_range) const;
};

/// predicted_j[k] is the target's predicted pose at tick t + k. Candidates whose predicted
/// position coincides with the task are skipped.
std::vector<InterceptCandidate> candidate_intercepts(std::span<const Pose> predicted_j, int t, Vec2 task,
                                                     double S_j, double sigma, const Pose& fetcher,
                                                     double v_max, double omega_max, double dt);

/// First candidate with dubins <= alpha * (tau - t) * dt.
std::optional<InterceptCandidate> earliest_feasible(std::span<const InterceptCandidate> candidates, int t,
                                                    double alpha, double dt);

double alignment_penalty(Vec2 r_k, Vec2 x_j, Vec2 task, double gamma);

/// Distance to the nearest known-occupied cell, saturated at `cap`. Points outside the
/// arena have zero clearance.
class ClearanceField {
 public:
  ClearanceField() = default;
  ClearanceField(const GridGeometry& grid, std::span<const Cell> cells, double cap);
  double operator()(Vec2 p) const;
  double cap() const { return cap_; }

 private:
  GridGeometry grid_;
  std::vector<std::uint8_t> occupied_;
  double cap_ = 0.0;
  int window_ = 0;
};

struct MppiProblem {
  Pose start;
  RobotSpec spec;
  Vec2 x_int;
  std::span<const Pose> predicted_j;  // from the current tick; the last pose is held
  Vec2 task;
  double S_j = 20.0;
  double dt = 0.1;
};

struct MppiResult {
  std::vector<ControlInput> controls;
  double cost = 0.0;
  int best_index = 0;
  std::vector<double> sampled_costs;
  std::vector<Pose> rollout;  // H_u + 1 poses of the returned sequence
};

/// Cost of one rollout (H_u + 1 poses) under the three-part intercept cost.
double intercept_cost(std::span<const Pose> rollout, const MppiProblem& pb, const ClearanceField& clearance,
                      const MppiParams& params);

/// Turn-then-drive toward x_int at burst speed for H_u ticks; the default warm start.
std::vector<ControlInput> tracking_nominal(const MppiProblem& pb, int H_u);

/// Sample 0 is the nominal sequence itself, samples 1..K-1 add clamped Gaussian noise.
MppiResult mppi_plan(const MppiProblem& pb, std::span<const ControlInput> nominal,
                     const ClearanceField& clearance, const MppiParams& params, std::uint64_t seed);

/// Receding-horizon warm start: drop the first control and repeat the last.
std::vector<ControlInput> shift_sequence(std::span<const ControlInput> controls);

/// Intercept success check: the time the target's new ModifiedExplore prediction brings the
/// task into range, measured from t, is at most kappa times its Dubins time to the task.
bool judge_intercept(std::span<const Pose> new_prediction_j, int t, Vec2 task, double kappa,
                     const RobotSpec& j_spec, double dt);

}  // namespace epicoord
