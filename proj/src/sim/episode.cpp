#include "sncbf/episode.hpp"

#include <stdexcept>

#include "sncbf/csv.hpp"
#include "sncbf/errors.hpp"
#include "sncbf/orca.hpp"
#include "sncbf/rng.hpp"

namespace sncbf::sim {

const char* to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::kReachedGoal: return "reached_goal";
    case Outcome::kCollision: return "collision";
    case Outcome::kFrozen: return "frozen";
    case Outcome::kTimedOut: return "timed_out";
  }
  throw std::invalid_argument("unknown outcome");
}

namespace {

bool hits_obstacle(const Vec2& ego_pos, const std::vector<ObstacleState>& obs,
                   double radius) {
  for (const ObstacleState& o : obs)
    if ((ego_pos - o.pos).norm() < radius) return true;
  return false;
}

bool midpoint_hit(const Vec2& ego_a, const Vec2& ego_b,
                  const std::vector<ObstacleState>& obs_a,
                  const std::vector<ObstacleState>& obs_b, double radius) {
  const Vec2 em = (ego_a + ego_b) * 0.5;
  for (std::size_t i = 0; i < obs_a.size(); ++i) {
    const Vec2 om = (obs_a[i].pos + obs_b[i].pos) * 0.5;
    if ((em - om).norm() < radius) return true;
  }
  return false;
}

void advance_obstacles(WorldState& world, const Scenario& cfg,
                       ObstacleModel model, Rng& goal_rng) {
  if (model == ObstacleModel::kConstantVelocity) {
    for (ObstacleState& o : world.obstacles)
      o.pos = o.pos + o.vel * cfg.dt;
    return;
  }
  for (ObstacleState& o : world.obstacles)
    if ((o.pos - o.goal).norm() <= cfg.env.goal_reach_dist)
      o.goal = sample_obstacle_goal(cfg, goal_rng);
  world.obstacles = orca_step(world.obstacles, cfg.dt, cfg.env.orca);
}

}  // namespace

EpisodeResult run_episode(const Scenario& cfg, Controller& ctrl,
                          const EpisodeOptions& opts) {
  WorldState world = spawn_scenario(cfg);
  ctrl.reset(cfg, world);
  Rng goal_rng(mix_seed(cfg.seed, 0xB0A7));

  EpisodeResult res;
  auto record = [&] {
    if (opts.record_trajectory) res.trajectory.push_back(world);
  };
  record();

  for (int t = 0;; ++t) {
    if (hits_obstacle(world.ego.pos(), world.obstacles,
                      cfg.collision_radius)) {
      res.outcome = Outcome::kCollision;
      res.steps = t;
      return res;
    }
    if ((world.ego.pos() - cfg.ego_goal).norm() <= cfg.goal_tolerance) {
      res.outcome = Outcome::kReachedGoal;
      res.steps = t;
      return res;
    }
    if (t >= cfg.max_steps) {
      res.outcome = Outcome::kTimedOut;
      res.steps = t;
      return res;
    }

    const std::optional<ego::Control> u = ctrl.act(cfg, world);
    if (!u) {
      res.outcome = Outcome::kFrozen;
      res.steps = t;
      return res;
    }

    const Vec2 ego_before = world.ego.pos();
    const std::vector<ObstacleState> obs_before = world.obstacles;
    world.ego = ego::step_true(world.ego, *u, cfg.dt);
    advance_obstacles(world, cfg, opts.obstacle_model, goal_rng);
    world.time_step = t + 1;
    record();

    if (midpoint_hit(ego_before, world.ego.pos(), obs_before, world.obstacles,
                     cfg.collision_radius)) {
      res.outcome = Outcome::kCollision;
      res.steps = t + 1;
      return res;
    }
  }
}

double collision_rate(const std::vector<Outcome>& outcomes) {
  if (outcomes.empty()) throw StageError("collision_rate: no episodes");
  int failed = 0;
  for (Outcome o : outcomes)
    if (o != Outcome::kReachedGoal) ++failed;
  return static_cast<double>(failed) / static_cast<double>(outcomes.size());
}

double frozen_fraction(const std::vector<Outcome>& outcomes) {
  if (outcomes.empty()) throw StageError("frozen_fraction: no episodes");
  int frozen = 0;
  for (Outcome o : outcomes)
    if (o == Outcome::kFrozen) ++frozen;
  return static_cast<double>(frozen) / static_cast<double>(outcomes.size());
}

void write_trajectory_csv(const std::string& path,
                          const std::vector<WorldState>& frames) {
  if (frames.empty())
    throw StageError("write_trajectory_csv: empty trajectory");
  const ego::DynKind kind = frames.front().ego.kind;
  const int sd = ego::state_dim(kind);
  const std::size_t n_obs = frames.front().obstacles.size();

  CsvTable table;
  table.header = {"step"};
  for (const std::string& name : ego::state_column_names(kind))
    table.header.push_back(name);
  for (std::size_t i = 0; i < n_obs; ++i) {
    const std::string base = "obs" + std::to_string(i) + "_";
    table.header.push_back(base + "px");
    table.header.push_back(base + "py");
    table.header.push_back(base + "vx");
    table.header.push_back(base + "vy");
  }

  for (const WorldState& w : frames) {
    if (w.obstacles.size() != n_obs)
      throw StageError("write_trajectory_csv: obstacle count changed");
    std::vector<std::string> row;
    row.push_back(std::to_string(w.time_step));
    for (int d = 0; d < sd; ++d) row.push_back(fmt_g9(w.ego.c[d]));
    for (const ObstacleState& o : w.obstacles) {
      row.push_back(fmt_g9(o.pos.x));
      row.push_back(fmt_g9(o.pos.y));
      row.push_back(fmt_g9(o.vel.x));
      row.push_back(fmt_g9(o.vel.y));
    }
    table.rows.push_back(std::move(row));
  }
  write_csv(path, table);
}

Trajectory read_trajectory_csv(const std::string& path) {
  const CsvTable table = read_csv(path);
  if (table.header.empty() || table.header.front() != "step")
    throw IoError("trajectory csv: missing step column in " + path);

  std::vector<std::string> ego_cols;
  std::size_t col = 1;
  while (col < table.header.size() &&
         table.header[col].rfind("ego_", 0) == 0)
    ego_cols.push_back(table.header[col++]);

  Trajectory traj;
  traj.kind = ego::kind_from_columns(ego_cols);
  const int sd = ego::state_dim(traj.kind);
  if (static_cast<int>(ego_cols.size()) != sd)
    throw IoError("trajectory csv: ego column count mismatch in " + path);

  const std::size_t rem = table.header.size() - col;
  if (rem % 4 != 0)
    throw IoError("trajectory csv: obstacle columns not a multiple of 4 in " +
                  path);
  const std::size_t n_obs = rem / 4;

  for (const std::vector<std::string>& row : table.rows) {
    if (row.size() != table.header.size())
      throw IoError("trajectory csv: ragged row in " + path);
    WorldState w;
    w.time_step = std::stoi(row[0]);
    w.ego.kind = traj.kind;
    for (int d = 0; d < sd; ++d) w.ego.c[d] = std::stod(row[1 + d]);
    for (std::size_t i = 0; i < n_obs; ++i) {
      const std::size_t base = col + 4 * i;
      ObstacleState o;
      o.pos = {std::stod(row[base]), std::stod(row[base + 1])};
      o.vel = {std::stod(row[base + 2]), std::stod(row[base + 3])};
      o.goal = o.pos;
      w.obstacles.push_back(o);
    }
    traj.frames.push_back(std::move(w));
  }
  return traj;
}

}  // namespace sncbf::sim
