#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "sncbf/barrier.hpp"
#include "sncbf/dataset.hpp"
#include "sncbf/ego.hpp"
#include "sncbf/features.hpp"
#include "sncbf/rng.hpp"

namespace sncbf::train {

struct TrainConfig {
  int initial_iterations = 2000;
  int batch_safe = 128;
  int batch_unsafe = 32;
  int batch_pairs = 96;
  double lr = 1e-3;

  // Boundary refinement.
  double theta = 0.05;          // membership band: 0 <= B < theta
  int boundary_samples = 100;   // jitter draws per boundary member
  double jitter_sigma = 0.2;    // meters, ego position perturbation
  double collision_radius = 0.5;
  int refine_rounds_max = 10;
  double refine_tol = 1e-3;     // relative loss change between rounds
  int refine_iterations = 500;  // retrain budget per round
  // 0 keeps the single random exploratory control; n > 0 instead samples n
  // controls and unrolls the one whose predicted successor scores highest.
  int best_of_controls = 0;

  feat::FeatureScales scales;   // used when refinement synthesizes samples
  uint64_t seed = 0;
};

// Minibatch drawn with replacement, columns [safe | unsafe | pair | pair'].
barrier::LossBatch make_batch(const LabeledDataset& data, int n_safe,
                              int n_unsafe, int n_pairs, Rng& rng);

// Phase 1: minibatch Adam on the three-term loss. Returns one loss value per
// iteration. Throws StageError on an empty label set or a non-finite loss.
// A zero iteration budget returns an empty curve and leaves the model alone.
std::vector<double> train_initial(barrier::BarrierNet& net,
                                  const LabeledDataset& data,
                                  const TrainConfig& cfg);

// Exact three-term loss over the whole dataset, forward passes only.
double full_loss(const barrier::BarrierNet& net, const LabeledDataset& data);

// Fraction of pairs whose invariance condition Bdot + kappa * B >= 0 fails.
double violation_fraction(
    const barrier::BarrierNet& net,
    const std::vector<std::pair<Sample, Sample>>& pairs);

// Nominal controller and dynamics model used inside refinement. Production
// wires the potential-field policy and the fitted dynamics; tests inject
// scripted ones to pin down branch behavior.
using NominalFn = std::function<ego::Control(
    const ego::EgoState&, const std::vector<feat::RelativeState>&,
    const Vec2& goal)>;
using StepFn =
    std::function<ego::EgoState(const ego::EgoState&, const ego::Control&)>;

struct RefineRound {
  int boundary_members = 0;  // safe rows inside the band
  int sampled = 0;           // jittered states kept in the band
  int to_unsafe = 0;         // rows appended to the unsafe set
  int removed_safe = 0;      // rows evicted from the safe set
  int added_safe = 0;        // jittered rows appended to the safe set
  int random_unsafe = 0;     // exploratory successors appended to unsafe
  double loss_after = 0.0;   // full-dataset loss at the end of the round
  bool no_op = false;        // band was empty, nothing changed
};

struct RefineResult {
  std::vector<RefineRound> rounds;
  std::vector<double> curve;  // retrain losses, all rounds concatenated
  bool converged = false;
};

// Phase 2 boundary refinement. Walks safe rows scored inside [0, theta),
// perturbs each into up to boundary_samples nearby states, checks the nominal
// one-step rollout, relabels, then retrains; repeats until the loss settles
// or the round cap is hit. `seeds` must stay index-aligned with data.safe and
// is maintained as rows move.
RefineResult refine_boundary(barrier::BarrierNet& net, LabeledDataset& data,
                             std::vector<SeedRecord>& seeds,
                             const TrainConfig& cfg, const NominalFn& nominal,
                             const StepFn& step,
                             const ego::ControlBounds& bounds, double dt);

}  // namespace sncbf::train
