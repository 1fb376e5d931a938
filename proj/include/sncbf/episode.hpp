#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sncbf/ego.hpp"
#include "sncbf/scenario.hpp"

namespace sncbf::sim {

enum class Outcome {
  kReachedGoal,
  kCollision,
  kFrozen,
  kTimedOut,
};

const char* to_string(Outcome outcome);

// Anything that picks ego controls. act() returning nullopt means the
// controller declines to move (no certified candidate); the episode halts
// there and is scored as frozen.
class Controller {
 public:
  virtual ~Controller() = default;
  virtual void reset(const Scenario& cfg, const WorldState& world) = 0;
  virtual std::optional<ego::Control> act(const Scenario& cfg,
                                          const WorldState& world) = 0;
};

enum class ObstacleModel {
  kOrca,
  kConstantVelocity,
};

struct EpisodeOptions {
  ObstacleModel obstacle_model = ObstacleModel::kOrca;
  bool record_trajectory = true;
};

struct EpisodeResult {
  Outcome outcome = Outcome::kTimedOut;
  int steps = 0;  // index of the final frame; trajectory holds steps + 1
  std::vector<WorldState> trajectory;
};

// Runs one episode from spawn_scenario(cfg). The ego advances under the true
// dynamics; obstacles advance per opts.obstacle_model and never react to the
// ego. A transition collides when the ego-obstacle distance drops below
// cfg.collision_radius at either the step midpoint or the endpoint; collision
// outranks goal arrival at the same frame. Obstacles that come within
// env.goal_reach_dist of their goal get a fresh goal drawn from a stream
// seeded only by cfg.seed, so obstacle motion is identical across
// controllers.
EpisodeResult run_episode(const Scenario& cfg, Controller& ctrl,
                          const EpisodeOptions& opts = {});

// Fraction of episodes that failed (collision, frozen, or timeout). Throws
// StageError on an empty batch.
double collision_rate(const std::vector<Outcome>& outcomes);
double frozen_fraction(const std::vector<Outcome>& outcomes);

struct Trajectory {
  ego::DynKind kind = ego::DynKind::kSingleIntegrator;
  std::vector<WorldState> frames;
};

// CSV layout: step, ego state columns for the kind, then per obstacle i the
// columns obs{i}_px, obs{i}_py, obs{i}_vx, obs{i}_vy. Values print with %.9g.
void write_trajectory_csv(const std::string& path,
                          const std::vector<WorldState>& frames);
Trajectory read_trajectory_csv(const std::string& path);

}  // namespace sncbf::sim
