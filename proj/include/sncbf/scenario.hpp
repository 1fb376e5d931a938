#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sncbf/ego.hpp"
#include "sncbf/orca.hpp"

namespace sncbf::sim {

struct EnvParams {
  double obstacle_radius = 0.3;
  double obstacle_pref_speed = 1.0;
  double goal_reach_dist = 0.3;  // obstacle goal re-sampling trigger
  OrcaParams orca;
};

struct Scenario {
  double arena_half_extent = 10.0;
  int obstacle_count = 6;
  ego::DynKind ego_dynamics = ego::DynKind::kDubins;
  Vec2 ego_start{-8.0, -8.0};
  Vec2 ego_goal{8.0, 8.0};
  double dt = 0.1;
  int max_steps = 400;
  uint64_t seed = 1;
  double collision_radius = 0.5;
  double goal_tolerance = 0.5;
  EnvParams env;

  // Human-readable problems; empty means the scenario is usable.
  std::vector<std::string> validate() const;
};

struct WorldState {
  int time_step = 0;
  ego::EgoState ego;
  std::vector<ObstacleState> obstacles;
};

// Places obstacles uniformly with clearance: at least 0.6 m between obstacle
// centers and collision_radius + 0.5 m from the ego start. Throws ConfigError
// on an invalid scenario and StageError when the rejection-sampling budget is
// exhausted (over-dense arena).
WorldState spawn_scenario(const Scenario& cfg);

Vec2 sample_obstacle_goal(const Scenario& cfg, Rng& rng);

}  // namespace sncbf::sim
