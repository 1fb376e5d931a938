#pragma once

#include <cstdint>
#include <vector>

#include "sncbf/vec2.hpp"

namespace sncbf::sim {

struct ObstacleState {
  Vec2 pos;
  Vec2 vel;
  Vec2 goal;
  double radius = 0.3;
  double pref_speed = 1.0;
};

struct OrcaParams {
  double time_horizon = 2.0;
  double neighbor_dist = 5.0;
  double max_speed = 1.5;
};

// Half-plane constraint. Feasible velocities satisfy
// det(dir, point - v) <= 0.
struct OrcaLine {
  Vec2 point;
  Vec2 dir;
};

struct OrcaStepInfo {
  std::vector<std::vector<OrcaLine>> lines;  // per agent, LP order
  std::vector<bool> feasible;                // 2-D program feasible
  int degenerate_pairs = 0;                  // skipped coincident pairs
};

// Preferred velocity toward the goal at preferred speed; shortened on final
// approach so the goal is hit exactly, zero at the goal.
Vec2 preferred_velocity(const ObstacleState& a, double dt);

// One synchronous reciprocal-avoidance step over all agents: every new
// velocity is computed from the previous step's states, then positions
// advance by new_vel * dt. Exactly head-on constraint geometry is broken by
// rotating the relative position (+1e-6 rad for the lower-indexed agent of
// the pair, -1e-6 for the higher) so both agents dodge to complementary
// sides. Coincident agents with equal velocities contribute no constraint
// and are reported through info->degenerate_pairs.
std::vector<ObstacleState> orca_step(const std::vector<ObstacleState>& agents,
                                     double dt, const OrcaParams& params,
                                     OrcaStepInfo* info = nullptr);

// The velocity one agent would pick given fixed constraint lines; exposed for
// the optimality oracle in tests.
Vec2 orca_solve(const std::vector<OrcaLine>& lines, double max_speed,
                const Vec2& pref_vel, bool* feasible = nullptr);

}  // namespace sncbf::sim
