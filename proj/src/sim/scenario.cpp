#include "sncbf/scenario.hpp"

#include "sncbf/errors.hpp"

namespace sncbf::sim {

std::vector<std::string> Scenario::validate() const {
  std::vector<std::string> problems;
  if (arena_half_extent <= 0.0) problems.push_back("arena_half_extent <= 0");
  if (obstacle_count < 0) problems.push_back("obstacle_count < 0");
  if (dt <= 0.0) problems.push_back("dt <= 0");
  if (max_steps <= 0) problems.push_back("max_steps <= 0");
  if (collision_radius <= 0.0) problems.push_back("collision_radius <= 0");
  if (goal_tolerance <= 0.0) problems.push_back("goal_tolerance <= 0");
  if (env.obstacle_radius <= 0.0) problems.push_back("obstacle_radius <= 0");
  if (env.obstacle_pref_speed > env.orca.max_speed)
    problems.push_back("obstacle pref_speed exceeds max_speed");
  const double a = arena_half_extent;
  auto inside = [a](const Vec2& p) {
    return p.x >= -a && p.x <= a && p.y >= -a && p.y <= a;
  };
  if (!inside(ego_start)) problems.push_back("ego_start outside arena");
  if (!inside(ego_goal)) problems.push_back("ego_goal outside arena");
  return problems;
}

Vec2 sample_obstacle_goal(const Scenario& cfg, Rng& rng) {
  const double a = 0.9 * cfg.arena_half_extent;
  return {rng.uniform(-a, a), rng.uniform(-a, a)};
}

WorldState spawn_scenario(const Scenario& cfg) {
  const auto problems = cfg.validate();
  if (!problems.empty()) {
    std::string msg = "invalid scenario:";
    for (const auto& p : problems) msg += " " + p + ";";
    throw ConfigError(msg);
  }

  Rng rng(mix_seed(cfg.seed, 0xA11CE));
  WorldState world;
  world.ego = ego::initial_state(cfg.ego_dynamics, cfg.ego_start,
                                 cfg.ego_goal);

  const double r = cfg.env.obstacle_radius;
  const double lo = -cfg.arena_half_extent + r;
  const double hi = cfg.arena_half_extent - r;
  const double pair_clearance = 0.6;
  const double ego_clearance = cfg.collision_radius + 0.5;
  long budget = 2000L * std::max(1, cfg.obstacle_count);

  for (int i = 0; i < cfg.obstacle_count; ++i) {
    bool placed = false;
    while (budget-- > 0) {
      const Vec2 p{rng.uniform(lo, hi), rng.uniform(lo, hi)};
      if ((p - cfg.ego_start).norm() < ego_clearance) continue;
      bool clear = true;
      for (const ObstacleState& o : world.obstacles)
        if ((p - o.pos).norm() < pair_clearance) {
          clear = false;
          break;
        }
      if (!clear) continue;
      ObstacleState o;
      o.pos = p;
      o.vel = {0.0, 0.0};
      o.radius = r;
      o.pref_speed = cfg.env.obstacle_pref_speed;
      o.goal = sample_obstacle_goal(cfg, rng);
      world.obstacles.push_back(o);
      placed = true;
      break;
    }
    if (!placed)
      throw StageError(
          "spawn_scenario: placement budget exhausted; arena too dense for " +
          std::to_string(cfg.obstacle_count) + " obstacles");
  }
  return world;
}

}  // namespace sncbf::sim
