#pragma once

#include <vector>

#include "sncbf/ego.hpp"
#include "sncbf/scenario.hpp"
#include "sncbf/vec2.hpp"

namespace sncbf::feat {

// Per-obstacle observation width per time step.
inline constexpr int kQ = 4;

// Fixed normalization so a trained model is portable across scenarios.
struct FeatureScales {
  double pos = 5.0;    // sensing range
  double vel = 3.0;    // worst-case closing speed
  double speed = 1.5;  // ego speed cap
  double steer = 0.6;  // steering angle limit
};

// One obstacle relative to the ego, world frame.
struct RelativeState {
  Vec2 rel_pos;  // obstacle position minus ego position
  Vec2 rel_vel;  // obstacle velocity minus ego velocity
};

// Scaled [rel_px, rel_py, rel_vx, rel_vy] into out[0..kQ).
void step_features(const RelativeState& rel, const FeatureScales& s,
                   double* out);

// Ego internal state as features. Absolute position stays out so the model
// generalizes over the arena; headings enter as cos/sin.
//   single_integrator  {0}                       (placeholder, width 1)
//   double_integrator  {vx, vy} / speed
//   dubins             {v / speed, cos h, sin h}
//   bicycle            {cos h, sin h, steer / steer_max}
int ego_feature_dim(ego::DynKind kind);
void ego_features(const ego::EgoState& x, const FeatureScales& s, double* out);

// Rolling window of the last k relative states per obstacle, oldest first.
// The ego planar velocity is the backward difference of its positions (zero
// on the first frame), so the tracker works identically for every dynamics
// kind. reset() replicates the first observation k times to fill the window.
class HistoryTracker {
 public:
  HistoryTracker(int k, const FeatureScales& scales);

  void reset(const sim::WorldState& world, double dt);
  void push(const sim::WorldState& world);

  int k() const { return k_; }
  int count() const { return n_obs_; }
  const FeatureScales& scales() const { return scales_; }
  Vec2 ego_vel() const { return ego_vel_; }

  // Unscaled window of obstacle i, oldest first, size k.
  const RelativeState* history(int obstacle) const;

  // Scaled features, out[s * kQ + j] for step s = 0..k-1 oldest first.
  void window(int obstacle, double* out) const;

  // Window shifted one step into a hypothetical future: the obstacle coasts
  // at its current velocity while the ego lands on ego_next_pos. Drops the
  // oldest step, appends the predicted one; the tracker is not modified.
  void successor_window(int obstacle, const sim::WorldState& world,
                        const Vec2& ego_next_pos, double dt,
                        double* out) const;

 private:
  void observe(const sim::WorldState& world, std::vector<RelativeState>& out) const;

  int k_;
  FeatureScales scales_;
  int n_obs_ = 0;
  double dt_ = 0.1;
  Vec2 ego_prev_;
  Vec2 ego_vel_;
  std::vector<RelativeState> win_;  // n_obs x k, row-major, oldest first
};

}  // namespace sncbf::feat
