#include "sncbf/pf.hpp"

#include <algorithm>
#include <cmath>

namespace sncbf::base {

double potential(const Vec2& s, const Vec2& goal,
                 const std::vector<Vec2>& obstacles_next,
                 const PotentialFieldParams& p) {
  double u = 0.5 * p.zeta * (s - goal).norm();
  for (const Vec2& o : obstacles_next) {
    const double d = (s - o).norm();
    if (d > p.q_star) continue;
    if (d <= 0.0) {
      u += p.rep_cap;
      continue;
    }
    const double t = 1.0 / d - 1.0 / p.q_star;
    u += std::min(0.5 * p.eta * t * t, p.rep_cap);
  }
  return u;
}

std::vector<Vec2> extrapolate_obstacles(
    const std::vector<sim::ObstacleState>& obstacles, double dt, int steps) {
  std::vector<Vec2> out(obstacles.size());
  for (std::size_t i = 0; i < obstacles.size(); ++i)
    out[i] = obstacles[i].pos + obstacles[i].vel * (dt * steps);
  return out;
}

ego::Control spfm_control(const ego::EgoState& x, const Vec2& goal,
                          const std::vector<sim::ObstacleState>& obstacles,
                          const PotentialFieldParams& p,
                          const ego::ControlBounds& bounds, int l, double dt,
                          const Stepper& step, Rng& rng) {
  const std::vector<Vec2> obs_next = extrapolate_obstacles(obstacles, dt, 1);
  const std::vector<ego::Control> candidates =
      ego::sample_controls(bounds, l, rng);
  ego::Control best = candidates.front();
  double best_u = 1e300;
  for (const ego::Control& u : candidates) {
    const ego::EgoState next = step(x, u);
    const double value = potential(next.pos(), goal, obs_next, p);
    if (value < best_u) {
      best_u = value;
      best = u;
    }
  }
  return best;
}

namespace {

Vec2 potential_gradient(const Vec2& s, const Vec2& goal,
                        const std::vector<Vec2>& obs_next,
                        const PotentialFieldParams& p) {
  const double h = 1e-4;
  const double gx = (potential({s.x + h, s.y}, goal, obs_next, p) -
                     potential({s.x - h, s.y}, goal, obs_next, p)) /
                    (2 * h);
  const double gy = (potential({s.x, s.y + h}, goal, obs_next, p) -
                     potential({s.x, s.y - h}, goal, obs_next, p)) /
                    (2 * h);
  return {gx, gy};
}

}  // namespace

ego::Control gpfm_control(const ego::EgoState& x, const Vec2& goal,
                          const std::vector<sim::ObstacleState>& obstacles,
                          const PotentialFieldParams& p, double gain,
                          const ego::ControlBounds& bounds, double dt,
                          const ego::EgoParams& ego_params) {
  const std::vector<Vec2> obs_next = extrapolate_obstacles(obstacles, dt, 1);
  const Vec2 g = potential_gradient(x.pos(), goal, obs_next, p);
  const Vec2 desired = g * -1.0;  // descend
  if (desired.norm() < 1e-9) return ego::Control{{0.0, 0.0}};

  ego::Control u{{0.0, 0.0}};
  switch (x.kind) {
    case ego::DynKind::kSingleIntegrator:
    case ego::DynKind::kDoubleIntegrator:
      u.u = {gain * desired.x, gain * desired.y};
      break;
    case ego::DynKind::kDubins: {
      const double heading_err =
          wrap_angle(std::atan2(desired.y, desired.x) - x.c[3]);
      // slow down when pointed the wrong way, track the speed cap otherwise
      const double v_target =
          ego_params.dubins_v_max * std::max(0.0, std::cos(heading_err));
      u.u = {gain * (v_target - x.c[2]), gain * heading_err};
      break;
    }
    case ego::DynKind::kBicycle: {
      const double heading_err =
          wrap_angle(std::atan2(desired.y, desired.x) - x.c[2]);
      const double delta_target = std::clamp(
          gain * heading_err, -ego_params.bicycle_delta_max,
          ego_params.bicycle_delta_max);
      u.u = {std::max(0.0, std::cos(heading_err)),
             gain * (delta_target - x.c[3])};
      break;
    }
  }
  return bounds.clamp(u);
}

namespace {

struct SmpcSearch {
  const SmpcConfig* cfg;
  const PotentialFieldParams* p;
  const ego::ControlBounds* bounds;
  const Stepper* step;
  const Vec2* goal;
  const std::vector<sim::ObstacleState>* obstacles;
  double dt;
  Rng* rng;
  long* leaves;
  std::vector<Vec2> leaf_obs;  // extrapolated to the tree horizon up front

  double expand(const ego::EgoState& x, int depth, ego::Control* root_pick) {
    if (depth == cfg->horizon) {
      if (leaves) ++*leaves;
      return potential(x.pos(), *goal, leaf_obs, *p);
    }
    // the node's own world view: obstacles coasted to its time
    std::vector<sim::ObstacleState> local = *obstacles;
    for (sim::ObstacleState& o : local) o.pos = o.pos + o.vel * (dt * depth);
    const ego::Control nominal = spfm_control(
        x, *goal, local, *p, *bounds, cfg->nominal_l, dt, *step, *rng);

    const double half0 = 0.5 * (bounds->hi[0] - bounds->lo[0]);
    const double half1 = 0.5 * (bounds->hi[1] - bounds->lo[1]);
    double best = 1e300;
    for (int i = 0; i < cfg->samples_per_step; ++i) {
      ego::Control u = nominal;
      u.u[0] += cfg->sigma_frac * half0 * rng->normal();
      u.u[1] += cfg->sigma_frac * half1 * rng->normal();
      u = bounds->clamp(u);
      const double score = expand((*step)(x, u), depth + 1, nullptr);
      if (score < best) {
        best = score;
        if (root_pick) *root_pick = u;
      }
    }
    return best;
  }
};

}  // namespace

ego::Control smpc_control(const ego::EgoState& x, const Vec2& goal,
                          const std::vector<sim::ObstacleState>& obstacles,
                          const SmpcConfig& cfg, const PotentialFieldParams& p,
                          const ego::ControlBounds& bounds, double dt,
                          const Stepper& step, Rng& rng, long* leaf_counter) {
  SmpcSearch search;
  search.cfg = &cfg;
  search.p = &p;
  search.bounds = &bounds;
  search.step = &step;
  search.goal = &goal;
  search.obstacles = &obstacles;
  search.dt = dt;
  search.rng = &rng;
  search.leaves = leaf_counter;
  search.leaf_obs = extrapolate_obstacles(obstacles, dt, cfg.horizon);

  ego::Control pick{{0.0, 0.0}};
  search.expand(x, 0, &pick);
  return pick;
}

}  // namespace sncbf::base
