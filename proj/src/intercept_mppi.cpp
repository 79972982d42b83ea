#include "epicoord/intercept_mppi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "epicoord/error.hpp"

namespace epicoord {

void MppiParams::validate(double sensing_range) const {
  if (K < 1) throw ConfigError("mppi: K must be at least 1");
  if (H_u < 1) throw ConfigError("mppi: H_u must be at least 1");
  if (!(noise_std_v >= 0.0) || !(noise_std_omega >= 0.0)) throw ConfigError("mppi: noise must be non-negative");
  if (!(gamma >= -1.0 && gamma <= 1.0)) throw ConfigError("mppi: gamma must lie in [-1, 1]");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("mppi: alpha must lie in (0, 1]");
  if (!(kappa >= 1.0)) throw ConfigError("mppi: kappa must be >= 1");
  if (!(sigma_offset > 0.0 && sigma_offset < sensing_range)) {
    throw ConfigError("mppi: sigma_offset must lie in (0, sensing_range)");
  }
  if (!(safety_margin >= 0.0) || !(safety_weight >= 0.0)) throw ConfigError("mppi: safety terms must be >= 0");
  if (!(temperature > 0.0)) throw ConfigError("mppi: temperature must be positive");
  if (max_attempts < 1) throw ConfigError("mppi: max_attempts must be at least 1");
}

std::vector<InterceptCandidate> candidate_intercepts(std::span<const Pose> predicted_j, int t, Vec2 task,
                                                     double S_j, double sigma, const Pose& fetcher,
                                                     double v_max, double omega_max, double dt) {
  (void)dt;
  std::vector<InterceptCandidate> out;
  out.reserve(predicted_j.size());
  for (std::size_t k = 0; k < predicted_j.size(); ++k) {
    const Vec2 xj = predicted_j[k].position();
    const auto away = unit_direction(task, xj);
    if (!away) continue;
    const Vec2 point = xj + (S_j - sigma) * *away;
    out.push_back({t + static_cast<int>(k), point, dubins_time(fetcher, point, v_max, omega_max)});
  }
  return out;
}

std::optional<InterceptCandidate> earliest_feasible(std::span<const InterceptCandidate> candidates, int t,
                                                    double alpha, double dt) {
  for (const auto& c : candidates) {
    if (c.dubins <= alpha * (c.tau - t) * dt) return c;
  }
  return std::nullopt;
}

double alignment_penalty(Vec2 r_k, Vec2 x_j, Vec2 task, double gamma) {
  const auto to_task = unit_direction(x_j, task);
  const auto to_r = unit_direction(x_j, r_k);
  if (!to_task || !to_r) return 0.0;
  const double psi = to_task->dot(*to_r);
  return psi > gamma ? (psi + 2.0) * (psi + 2.0) : 0.0;
}

ClearanceField::ClearanceField(const GridGeometry& grid, std::span<const Cell> cells, double cap)
    : grid_(grid), occupied_(cells.size()), cap_(cap) {
  for (std::size_t i = 0; i < cells.size(); ++i) occupied_[i] = cells[i] == Cell::Occupied;
  window_ = static_cast<int>(std::ceil(cap / grid.resolution())) + 1;
}

double ClearanceField::operator()(Vec2 p) const {
  if (!grid_.contains(p)) return 0.0;
  const CellCoord c = grid_.coord_of(p);
  const double half = 0.5 * grid_.resolution();
  double best = cap_;
  for (int oy = -window_; oy <= window_; ++oy) {
    for (int ox = -window_; ox <= window_; ++ox) {
      const CellCoord n{c.cx + ox, c.cy + oy};
      if (!grid_.in_bounds(n) || !occupied_[grid_.index(n)]) continue;
      const Vec2 ctr = grid_.center(grid_.index(n));
      const double dx = std::max(std::abs(p.x - ctr.x) - half, 0.0);
      const double dy = std::max(std::abs(p.y - ctr.y) - half, 0.0);
      best = std::min(best, std::hypot(dx, dy));
    }
  }
  return best;
}

double intercept_cost(std::span<const Pose> rollout, const MppiProblem& pb, const ClearanceField& clearance,
                      const MppiParams& params) {
  double J = 0.0;
  for (std::size_t h = 0; h < rollout.size(); ++h) {
    const Vec2 r = rollout[h].position();
    if (!pb.predicted_j.empty()) {
      const Vec2 xj = pb.predicted_j[std::min(h, pb.predicted_j.size() - 1)].position();
      if (distance(xj, r) <= pb.S_j) J += params.eta * alignment_penalty(r, xj, pb.task, params.gamma);
    }
    J += (r - pb.x_int).squared_norm();
    if (clearance(r) < params.safety_margin) J += params.safety_weight;
  }
  return J;
}

std::vector<ControlInput> tracking_nominal(const MppiProblem& pb, int H_u) {
  std::vector<ControlInput> out;
  out.reserve(H_u);
  Pose p = pb.start;
  for (int h = 0; h < H_u; ++h) {
    const ControlInput u = track_waypoint(p, pb.x_int, pb.spec.v_max_burst, pb.spec.omega_max, pb.dt);
    out.push_back(u);
    p = step(p, u, pb.dt);
  }
  return out;
}

namespace {

std::vector<Pose> roll(const Pose& start, std::span<const ControlInput> u, double dt) {
  std::vector<Pose> traj;
  traj.reserve(u.size() + 1);
  traj.push_back(start);
  for (const auto& c : u) traj.push_back(step(traj.back(), c, dt));
  return traj;
}

ControlInput clamp_forward(ControlInput u, const RobotSpec& spec) {
  return {std::clamp(u.v, 0.0, spec.v_max_burst), std::clamp(u.omega, -spec.omega_max, spec.omega_max)};
}

}  // namespace

MppiResult mppi_plan(const MppiProblem& pb, std::span<const ControlInput> nominal, const ClearanceField& clearance,
                     const MppiParams& params, std::uint64_t seed) {
  if (params.K < 1) throw ConfigError("mppi: K must be at least 1");
  if (params.H_u < 1) throw ConfigError("mppi: H_u must be at least 1");
  std::vector<ControlInput> base(params.H_u);
  for (int h = 0; h < params.H_u; ++h) {
    base[h] = clamp_forward(h < static_cast<int>(nominal.size()) ? nominal[h] : ControlInput{}, pb.spec);
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nv(0.0, 1.0);
  std::vector<std::vector<ControlInput>> samples(params.K);
  MppiResult res;
  res.sampled_costs.resize(params.K);
  for (int k = 0; k < params.K; ++k) {
    auto& s = samples[k];
    s = base;
    if (k > 0) {
      for (auto& u : s) {
        // Draw both noise terms unconditionally so the stream does not depend on the stds.
        const double ev = nv(rng);
        const double ew = nv(rng);
        u = clamp_forward({u.v + params.noise_std_v * ev, u.omega + params.noise_std_omega * ew}, pb.spec);
      }
    }
    res.sampled_costs[k] = intercept_cost(roll(pb.start, s, pb.dt), pb, clearance, params);
  }

  int best = 0;
  for (int k = 1; k < params.K; ++k) {
    if (res.sampled_costs[k] < res.sampled_costs[best]) best = k;
  }
  res.best_index = best;

  if (params.weighted_average) {
    const double jmin = res.sampled_costs[best];
    std::vector<ControlInput> avg(params.H_u);
    double wsum = 0.0;
    for (int k = 0; k < params.K; ++k) {
      const double w = std::exp(-(res.sampled_costs[k] - jmin) / params.temperature);
      wsum += w;
      for (int h = 0; h < params.H_u; ++h) {
        avg[h].v += w * samples[k][h].v;
        avg[h].omega += w * samples[k][h].omega;
      }
    }
    for (auto& u : avg) u = clamp_forward({u.v / wsum, u.omega / wsum}, pb.spec);
    res.controls = std::move(avg);
    res.rollout = roll(pb.start, res.controls, pb.dt);
    res.cost = intercept_cost(res.rollout, pb, clearance, params);
    return res;
  }

  res.controls = samples[best];
  res.rollout = roll(pb.start, res.controls, pb.dt);
  res.cost = res.sampled_costs[best];
  return res;
}

std::vector<ControlInput> shift_sequence(std::span<const ControlInput> controls) {
  if (controls.empty()) return {};
  std::vector<ControlInput> out(controls.begin() + 1, controls.end());
  out.push_back(controls.back());
  return out;
}

bool judge_intercept(std::span<const Pose> new_prediction_j, int t, Vec2 task, double kappa,
                     const RobotSpec& j_spec, double dt) {
  if (new_prediction_j.empty()) return false;
  const auto found = estimate_discovery_time(new_prediction_j, t, dt, task, j_spec.sensing_range);
  if (!found) return false;
  const double D = dubins_time(new_prediction_j.front(), task, j_spec.v_nominal, j_spec.omega_max);
  return *found - t * dt <= kappa * D;
}

}  // namespace epicoord
