#pragma once

#include <functional>
#include <vector>

#include "sncbf/ego.hpp"
#include "sncbf/orca.hpp"
#include "sncbf/rng.hpp"
#include "sncbf/vec2.hpp"

namespace sncbf::base {

struct PotentialFieldParams {
  double zeta = 1.0;    // attractive gain
  double eta = 1.0;     // repulsive gain
  double q_star = 2.0;  // repulsive influence distance, meters
  double rep_cap = 1e6; // caps the 1/d blowup at contact
};

// U = 0.5 * zeta * d(s, goal)
//   + sum over obstacles of 0.5 * eta * (1/d - 1/Q*)^2 for d <= Q*, else 0.
// Obstacle positions are the caller's one-step predictions.
double potential(const Vec2& s, const Vec2& goal,
                 const std::vector<Vec2>& obstacles_next,
                 const PotentialFieldParams& p);

// One-step ego prediction used by the sampling controllers; either the true
// stepper or a learned dynamics model.
using Stepper =
    std::function<ego::EgoState(const ego::EgoState&, const ego::Control&)>;

// Constant-velocity obstacle positions `steps` ticks ahead.
std::vector<Vec2> extrapolate_obstacles(
    const std::vector<sim::ObstacleState>& obstacles, double dt, int steps);

// Samples l controls, predicts one step each, returns the candidate with the
// lowest potential at its predicted position (first minimum wins ties).
ego::Control spfm_control(const ego::EgoState& x, const Vec2& goal,
                          const std::vector<sim::ObstacleState>& obstacles,
                          const PotentialFieldParams& p,
                          const ego::ControlBounds& bounds, int l, double dt,
                          const Stepper& step, Rng& rng);

// Descends -grad U (central differences, 1e-4 m step) mapped onto the control
// space of the ego kind; gradient plateaus give the neutral control.
ego::Control gpfm_control(const ego::EgoState& x, const Vec2& goal,
                          const std::vector<sim::ObstacleState>& obstacles,
                          const PotentialFieldParams& p, double gain,
                          const ego::ControlBounds& bounds, double dt,
                          const ego::EgoParams& ego_params = {});

struct SmpcConfig {
  int horizon = 3;           // tree depth H
  int samples_per_step = 10; // branching factor
  double sigma_frac = 0.2;   // Gaussian std as a fraction of half-range
  int nominal_l = 16;        // candidate count inside the per-node nominal
  bool use_true_dynamics = false;
};

// Depth-H shooting tree. Every node draws samples_per_step Gaussian
// perturbations of that node's sampling-potential-field nominal; only leaves
// are scored (potential with obstacles extrapolated to the leaf time), and
// the first action on the path to the best leaf is returned. leaf_counter,
// when given, accumulates exactly samples_per_step^H per call.
ego::Control smpc_control(const ego::EgoState& x, const Vec2& goal,
                          const std::vector<sim::ObstacleState>& obstacles,
                          const SmpcConfig& cfg, const PotentialFieldParams& p,
                          const ego::ControlBounds& bounds, double dt,
                          const Stepper& step, Rng& rng,
                          long* leaf_counter = nullptr);

}  // namespace sncbf::base
