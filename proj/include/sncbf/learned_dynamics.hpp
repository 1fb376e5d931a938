#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "sncbf/ego.hpp"
#include "sncbf/nn.hpp"

namespace sncbf::ego {

struct Transition {
  EgoState x;
  Control u;
  EgoState xn;
};

// Z-score statistics, fixed at fit time.
struct DynNorm {
  std::vector<double> in_mean, in_scale;
  std::vector<double> out_mean, out_scale;
};

// One-step model: an MLP on the z-scored [state, control] vector predicts the
// z-scored state delta; the next state is the current state plus the
// denormalized delta, with angles wrapped and speed/steering clamps applied.
struct LearnedDynamics {
  DynKind kind = DynKind::kSingleIntegrator;
  dc::MlpSpec spec;
  dc::ParamBundle params;
  DynNorm norm;
  dc::MlpRef ref;
  EgoParams ego_params;
};

struct DynFitConfig {
  int iterations = 3000;
  int batch = 256;
  double lr = 1e-3;
  int hidden = 64;
};

LearnedDynamics fit_dynamics(
    DynKind kind, const std::vector<Transition>& data,
    const DynFitConfig& cfg, uint64_t seed,
    std::vector<std::pair<int, double>>* loss_curve = nullptr);

// Rebinds refs after the params were replaced (e.g. deserialized).
void rebind(LearnedDynamics& dyn);

EgoState step_learned(const LearnedDynamics& dyn, const EgoState& x,
                      const Control& u);

// sqrt(mean squared position error) of one-step predictions, meters.
double position_rmse(const LearnedDynamics& dyn,
                     const std::vector<Transition>& data);

// Random-control rollouts from randomized starts; covers the state box the
// controllers will visit.
std::vector<Transition> collect_random_transitions(DynKind kind, int count,
                                                   double arena_half_extent,
                                                   uint64_t seed);

}  // namespace sncbf::ego
