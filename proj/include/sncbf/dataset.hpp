#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "sncbf/episode.hpp"
#include "sncbf/features.hpp"

namespace sncbf::train {

// One per-obstacle training row: a scaled k-step window plus ego features.
struct Sample {
  std::vector<double> window;  // k * feat::kQ, oldest first
  std::vector<double> ego;
};

struct LabeledDataset {
  int k = 5;
  int ego_dim = 1;
  std::vector<Sample> safe;    // D_s
  std::vector<Sample> unsafe;  // D_u
  std::vector<std::pair<Sample, Sample>> pairs;  // consecutive transitions D
};

// World anchoring for a safe sample so boundary refinement can jitter it,
// re-evaluate ground truth, and unroll successors. Kept index-aligned with
// LabeledDataset::safe.
struct SeedRecord {
  ego::EgoState ego_state;
  Vec2 goal;
  std::vector<feat::RelativeState> window;  // raw, size k, oldest first
  Vec2 obs_next_pos;  // obstacle's recorded next absolute state
  Vec2 obs_next_vel;
};

// Scene-level row for the pooled (non-sequential) model: current relative
// states of the in-range obstacles, no history.
struct SceneSample {
  std::vector<double> rel;  // count * feat::kQ
  std::vector<double> ego;
  int count = 0;
};

struct SceneDataset {
  int ego_dim = 1;
  std::vector<SceneSample> safe;
  std::vector<SceneSample> unsafe;
  std::vector<std::pair<SceneSample, SceneSample>> pairs;
};

struct DemoConfig {
  int k = 5;                      // window length, must match the model
  int label_horizon = 5;          // steps; a collision this close poisons "safe"
  double sensing_range = 5.0;     // meters; farther obstacles emit nothing
  double holdout_fraction = 0.1;  // pairs withheld for the invariance metric
  feat::FeatureScales scales;
};

struct DemoResult {
  LabeledDataset data;
  std::vector<SeedRecord> seeds;  // aligned with data.safe
  std::vector<std::pair<Sample, Sample>> holdout_pairs;
  SceneDataset scene;
  int episodes = 0;
  int collision_episodes = 0;
  long frames = 0;
};

// Labels one recorded trajectory and appends its rows to `out`. Per frame t
// and obstacle i within sensing range: unsafe when that obstacle is closer
// than cfg.collision_radius at the frame or the step midpoint, excluded when
// such a collision happens within label_horizon future steps, safe otherwise
// (the final frame emits no safe row; it has no successor). Safe rows gain a
// SeedRecord and an invariance pair with the next frame's features. Scene
// rows use the same rule with any-obstacle collisions; empty scenes are
// skipped.
void label_trajectory(const sim::Scenario& cfg,
                      const std::vector<sim::WorldState>& frames,
                      const DemoConfig& demo, DemoResult& out);

// Runs n_trajectories episodes with the nominal controller (episode seeds
// derived from cfg.seed), labels each with label_trajectory, then withholds
// every round(1/holdout_fraction)-th invariance pair into holdout_pairs.
// Throws StageError when any of D_s, D_u, D ends up empty.
DemoResult collect_demonstrations(const sim::Scenario& cfg,
                                  sim::Controller& nominal,
                                  int n_trajectories, const DemoConfig& demo);

}  // namespace sncbf::train
