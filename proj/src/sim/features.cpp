#include "sncbf/features.hpp"

#include <cmath>
#include <stdexcept>

namespace sncbf::feat {

void step_features(const RelativeState& rel, const FeatureScales& s,
                   double* out) {
  out[0] = rel.rel_pos.x / s.pos;
  out[1] = rel.rel_pos.y / s.pos;
  out[2] = rel.rel_vel.x / s.vel;
  out[3] = rel.rel_vel.y / s.vel;
}

int ego_feature_dim(ego::DynKind kind) {
  switch (kind) {
    case ego::DynKind::kSingleIntegrator: return 1;
    case ego::DynKind::kDoubleIntegrator: return 2;
    case ego::DynKind::kDubins: return 3;
    case ego::DynKind::kBicycle: return 3;
  }
  throw std::invalid_argument("unknown dynamics kind");
}

void ego_features(const ego::EgoState& x, const FeatureScales& s,
                  double* out) {
  switch (x.kind) {
    case ego::DynKind::kSingleIntegrator:
      out[0] = 0.0;
      return;
    case ego::DynKind::kDoubleIntegrator:
      out[0] = x.c[2] / s.speed;
      out[1] = x.c[3] / s.speed;
      return;
    case ego::DynKind::kDubins:
      out[0] = x.c[2] / s.speed;
      out[1] = std::cos(x.c[3]);
      out[2] = std::sin(x.c[3]);
      return;
    case ego::DynKind::kBicycle:
      out[0] = std::cos(x.c[2]);
      out[1] = std::sin(x.c[2]);
      out[2] = x.c[3] / s.steer;
      return;
  }
  throw std::invalid_argument("unknown dynamics kind");
}

HistoryTracker::HistoryTracker(int k, const FeatureScales& scales)
    : k_(k), scales_(scales) {
  if (k_ < 1) throw std::invalid_argument("HistoryTracker: k < 1");
}

void HistoryTracker::observe(const sim::WorldState& world,
                             std::vector<RelativeState>& out) const {
  out.resize(world.obstacles.size());
  const Vec2 ep = world.ego.pos();
  for (std::size_t i = 0; i < world.obstacles.size(); ++i) {
    out[i].rel_pos = world.obstacles[i].pos - ep;
    out[i].rel_vel = world.obstacles[i].vel - ego_vel_;
  }
}

void HistoryTracker::reset(const sim::WorldState& world, double dt) {
  dt_ = dt;
  n_obs_ = static_cast<int>(world.obstacles.size());
  ego_prev_ = world.ego.pos();
  ego_vel_ = {0.0, 0.0};

  std::vector<RelativeState> now;
  observe(world, now);
  win_.resize(static_cast<std::size_t>(n_obs_) * k_);
  for (int i = 0; i < n_obs_; ++i)
    for (int s = 0; s < k_; ++s) win_[i * k_ + s] = now[i];
}

void HistoryTracker::push(const sim::WorldState& world) {
  if (static_cast<int>(world.obstacles.size()) != n_obs_)
    throw std::invalid_argument("HistoryTracker: obstacle count changed");
  const Vec2 ep = world.ego.pos();
  ego_vel_ = (ep - ego_prev_) / dt_;
  ego_prev_ = ep;

  std::vector<RelativeState> now;
  observe(world, now);
  for (int i = 0; i < n_obs_; ++i) {
    RelativeState* row = &win_[i * k_];
    for (int s = 0; s + 1 < k_; ++s) row[s] = row[s + 1];
    row[k_ - 1] = now[i];
  }
}

const RelativeState* HistoryTracker::history(int obstacle) const {
  return &win_[static_cast<std::size_t>(obstacle) * k_];
}

void HistoryTracker::window(int obstacle, double* out) const {
  const RelativeState* row = history(obstacle);
  for (int s = 0; s < k_; ++s) step_features(row[s], scales_, out + s * kQ);
}

void HistoryTracker::successor_window(int obstacle, const sim::WorldState& world,
                                      const Vec2& ego_next_pos, double dt,
                                      double* out) const {
  const RelativeState* row = history(obstacle);
  for (int s = 1; s < k_; ++s)
    step_features(row[s], scales_, out + (s - 1) * kQ);

  const sim::ObstacleState& o = world.obstacles[obstacle];
  const Vec2 ego_vel_next = (ego_next_pos - world.ego.pos()) / dt;
  RelativeState next;
  next.rel_pos = (o.pos + o.vel * dt) - ego_next_pos;
  next.rel_vel = o.vel - ego_vel_next;
  step_features(next, scales_, out + (k_ - 1) * kQ);
}

}  // namespace sncbf::feat
