#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <string>

#include "sncbf/csv.hpp"
#include "sncbf/episode.hpp"
#include "sncbf/errors.hpp"
#include "sncbf/features.hpp"
#include "sncbf/orca.hpp"

using namespace sncbf;
using namespace sncbf::sim;

namespace {

// drives straight at the scenario goal, axis-clamped
class StraightController : public Controller {
 public:
  void reset(const Scenario&, const WorldState&) override {}
  std::optional<ego::Control> act(const Scenario& cfg,
                                  const WorldState& world) override {
    const Vec2 d = cfg.ego_goal - world.ego.pos();
    return ego::Control{{d.x, d.y}};  // step_true clamps per axis
  }
};

class IdleController : public Controller {
 public:
  void reset(const Scenario&, const WorldState&) override {}
  std::optional<ego::Control> act(const Scenario&,
                                  const WorldState&) override {
    return ego::Control{{0.0, 0.0}};
  }
};

class FreezeController : public Controller {
 public:
  void reset(const Scenario&, const WorldState&) override {}
  std::optional<ego::Control> act(const Scenario&,
                                  const WorldState&) override {
    return std::nullopt;
  }
};

// chases the nearest obstacle; with static obstacles this must collide
class ChaseController : public Controller {
 public:
  void reset(const Scenario&, const WorldState&) override {}
  std::optional<ego::Control> act(const Scenario&,
                                  const WorldState& world) override {
    const Vec2 p = world.ego.pos();
    double best = 1e18;
    Vec2 target = p;
    for (const ObstacleState& o : world.obstacles) {
      const double d = (o.pos - p).norm2();
      if (d < best) {
        best = d;
        target = o.pos;
      }
    }
    const Vec2 d = target - p;
    return ego::Control{{d.x * 100, d.y * 100}};
  }
};

Scenario base_scenario() {
  Scenario cfg;
  cfg.ego_dynamics = ego::DynKind::kSingleIntegrator;
  cfg.ego_start = {-8.0, -8.0};
  cfg.ego_goal = {8.0, 8.0};
  cfg.seed = 7;
  return cfg;
}

std::string temp_path(const char* name) {
  return std::string("/tmp/sncbf_test_") + name;
}

}  // namespace

TEST_CASE("spawn respects clearances and is seed-deterministic") {
  Scenario cfg = base_scenario();
  cfg.obstacle_count = 24;
  const WorldState w = spawn_scenario(cfg);
  REQUIRE(w.obstacles.size() == 24);
  const double a = cfg.arena_half_extent - cfg.env.obstacle_radius;
  for (std::size_t i = 0; i < w.obstacles.size(); ++i) {
    const ObstacleState& o = w.obstacles[i];
    CHECK(std::abs(o.pos.x) <= a);
    CHECK(std::abs(o.pos.y) <= a);
    CHECK(o.vel.x == 0.0);
    CHECK(o.vel.y == 0.0);
    CHECK((o.pos - cfg.ego_start).norm() >= cfg.collision_radius + 0.5);
    for (std::size_t j = i + 1; j < w.obstacles.size(); ++j)
      CHECK((o.pos - w.obstacles[j].pos).norm() >= 0.6);
  }

  const WorldState w2 = spawn_scenario(cfg);
  for (std::size_t i = 0; i < w.obstacles.size(); ++i) {
    CHECK(w.obstacles[i].pos.x == w2.obstacles[i].pos.x);
    CHECK(w.obstacles[i].goal.x == w2.obstacles[i].goal.x);
  }

  Scenario other = cfg;
  other.seed = 8;
  const WorldState w3 = spawn_scenario(other);
  bool any_diff = false;
  for (std::size_t i = 0; i < w.obstacles.size(); ++i)
    any_diff = any_diff || w.obstacles[i].pos.x != w3.obstacles[i].pos.x;
  CHECK(any_diff);

  CHECK(w.ego.kind == cfg.ego_dynamics);
  CHECK(w.ego.pos().x == cfg.ego_start.x);
}

TEST_CASE("spawn rejects bad configs and over-dense arenas") {
  Scenario cfg = base_scenario();
  cfg.dt = 0.0;
  CHECK_THROWS_AS(spawn_scenario(cfg), ConfigError);

  cfg = base_scenario();
  cfg.arena_half_extent = 1.2;
  cfg.ego_start = {0.0, 0.0};
  cfg.ego_goal = {1.0, 1.0};
  cfg.obstacle_count = 60;
  CHECK_THROWS_AS(spawn_scenario(cfg), StageError);
}

TEST_CASE("goal run reaches the goal with the right frame count") {
  Scenario cfg = base_scenario();
  cfg.obstacle_count = 0;
  StraightController ctrl;
  const EpisodeResult res = run_episode(cfg, ctrl);
  CHECK(res.outcome == Outcome::kReachedGoal);
  // diagonal 16*sqrt(2) at axis speed 1.0 per axis, minus the tolerance
  CHECK(res.steps > 140);
  CHECK(res.steps < 170);
  REQUIRE(res.trajectory.size() == static_cast<std::size_t>(res.steps) + 1);
  for (int t = 0; t <= res.steps; ++t)
    CHECK(res.trajectory[t].time_step == t);
  const Vec2 last = res.trajectory.back().ego.pos();
  CHECK((last - cfg.ego_goal).norm() <= cfg.goal_tolerance);
}

TEST_CASE("freeze and timeout outcomes") {
  Scenario cfg = base_scenario();
  cfg.obstacle_count = 2;
  FreezeController freeze;
  EpisodeResult res = run_episode(cfg, freeze);
  CHECK(res.outcome == Outcome::kFrozen);
  CHECK(res.steps == 0);
  CHECK(res.trajectory.size() == 1);

  cfg.max_steps = 50;
  cfg.obstacle_count = 0;  // nothing can run the parked ego over
  IdleController idle;
  res = run_episode(cfg, idle);
  CHECK(res.outcome == Outcome::kTimedOut);
  CHECK(res.steps == 50);
  CHECK(res.trajectory.size() == 51);
}

TEST_CASE("driving into a static obstacle collides") {
  Scenario cfg = base_scenario();
  cfg.obstacle_count = 6;
  ChaseController ctrl;
  EpisodeOptions opts;
  opts.obstacle_model = ObstacleModel::kConstantVelocity;  // spawned at rest
  const EpisodeResult res = run_episode(cfg, ctrl, opts);
  REQUIRE(res.outcome == Outcome::kCollision);
  double dmin = 1e18;
  const WorldState& last = res.trajectory.back();
  for (const ObstacleState& o : last.obstacles) {
    const Vec2 em = (last.ego.pos() +
                     res.trajectory[res.steps - 1].ego.pos()) * 0.5;
    dmin = std::min(dmin, (o.pos - last.ego.pos()).norm());
    dmin = std::min(dmin, (o.pos - em).norm());
  }
  CHECK(dmin < cfg.collision_radius);
}

TEST_CASE("obstacle motion does not depend on the controller") {
  Scenario cfg = base_scenario();
  cfg.obstacle_count = 8;
  cfg.max_steps = 60;
  StraightController straight;
  IdleController idle;
  const EpisodeResult a = run_episode(cfg, straight);
  const EpisodeResult b = run_episode(cfg, idle);
  const std::size_t n = std::min(a.trajectory.size(), b.trajectory.size());
  REQUIRE(n > 10);
  for (std::size_t t = 0; t < n; ++t)
    for (int i = 0; i < 8; ++i) {
      CHECK(a.trajectory[t].obstacles[i].pos.x ==
            b.trajectory[t].obstacles[i].pos.x);
      CHECK(a.trajectory[t].obstacles[i].pos.y ==
            b.trajectory[t].obstacles[i].pos.y);
      CHECK(a.trajectory[t].obstacles[i].vel.x ==
            b.trajectory[t].obstacles[i].vel.x);
    }
}

TEST_CASE("orca obstacles eventually move") {
  Scenario cfg = base_scenario();
  cfg.obstacle_count = 5;
  cfg.max_steps = 30;
  IdleController idle;
  const EpisodeResult res = run_episode(cfg, idle);
  double moved = 0.0;
  for (int i = 0; i < 5; ++i)
    moved += (res.trajectory.back().obstacles[i].pos -
              res.trajectory.front().obstacles[i].pos)
                 .norm();
  CHECK(moved > 1.0);
}

TEST_CASE("outcome rates") {
  using O = Outcome;
  const std::vector<O> outcomes = {O::kReachedGoal, O::kCollision, O::kFrozen,
                                   O::kTimedOut,    O::kReachedGoal};
  CHECK(collision_rate(outcomes) == doctest::Approx(0.6));
  CHECK(frozen_fraction(outcomes) == doctest::Approx(0.2));
  CHECK_THROWS_AS(collision_rate({}), StageError);
  CHECK_THROWS_AS(frozen_fraction({}), StageError);
}

TEST_CASE("trajectory csv round-trips") {
  Scenario cfg = base_scenario();
  cfg.ego_dynamics = ego::DynKind::kDubins;
  cfg.obstacle_count = 3;
  cfg.max_steps = 20;
  IdleController idle;
  const EpisodeResult res = run_episode(cfg, idle);
  const std::string path = temp_path("traj.csv");
  write_trajectory_csv(path, res.trajectory);

  const std::string raw = read_file(path);
  CHECK(raw.rfind("step,ego_px,ego_py,ego_v,ego_theta,obs0_px,", 0) == 0);

  const Trajectory back = read_trajectory_csv(path);
  CHECK(back.kind == ego::DynKind::kDubins);
  REQUIRE(back.frames.size() == res.trajectory.size());
  for (std::size_t t = 0; t < back.frames.size(); ++t) {
    const WorldState& w = res.trajectory[t];
    const WorldState& r = back.frames[t];
    CHECK(r.time_step == w.time_step);
    for (int d = 0; d < 4; ++d)
      CHECK(r.ego.c[d] == doctest::Approx(w.ego.c[d]).epsilon(1e-7));
    REQUIRE(r.obstacles.size() == 3);
    for (int i = 0; i < 3; ++i) {
      CHECK(r.obstacles[i].pos.x ==
            doctest::Approx(w.obstacles[i].pos.x).epsilon(1e-7));
      CHECK(r.obstacles[i].vel.y ==
            doctest::Approx(w.obstacles[i].vel.y).epsilon(1e-7));
    }
  }
  std::remove(path.c_str());
}

TEST_CASE("history tracker windows") {
  using feat::HistoryTracker;
  using feat::kQ;

  WorldState w;
  w.ego.kind = ego::DynKind::kSingleIntegrator;
  w.ego.set_pos({1.0, 0.0});
  ObstacleState o;
  o.pos = {3.0, 1.0};
  o.vel = {0.5, 0.0};
  w.obstacles.push_back(o);

  feat::FeatureScales sc;
  HistoryTracker tracker(3, sc);
  tracker.reset(w, 0.1);
  CHECK(tracker.count() == 1);
  CHECK(tracker.ego_vel().x == 0.0);

  double win[3 * kQ];
  tracker.window(0, win);
  // replicated first observation: rel_pos (2, 1), rel_vel (0.5, 0)
  for (int s = 0; s < 3; ++s) {
    CHECK(win[s * kQ + 0] == doctest::Approx(2.0 / sc.pos));
    CHECK(win[s * kQ + 1] == doctest::Approx(1.0 / sc.pos));
    CHECK(win[s * kQ + 2] == doctest::Approx(0.5 / sc.vel));
    CHECK(win[s * kQ + 3] == doctest::Approx(0.0));
  }

  // ego moves +x by 0.2 in one 0.1 s step, obstacle coasts
  WorldState w2 = w;
  w2.ego.set_pos({1.2, 0.0});
  w2.obstacles[0].pos = {3.05, 1.0};
  tracker.push(w2);
  CHECK(tracker.ego_vel().x == doctest::Approx(2.0));
  tracker.window(0, win);
  // newest slot: rel_pos (1.85, 1), rel_vel (0.5 - 2, 0)
  CHECK(win[2 * kQ + 0] == doctest::Approx(1.85 / sc.pos));
  CHECK(win[2 * kQ + 2] == doctest::Approx(-1.5 / sc.vel));
  // older slots keep the reset observation
  CHECK(win[1 * kQ + 0] == doctest::Approx(2.0 / sc.pos));

  // successor window drops the oldest step and appends the prediction
  double suc[3 * kQ];
  tracker.successor_window(0, w2, {1.3, 0.0}, 0.1, suc);
  CHECK(suc[0 * kQ + 0] == win[1 * kQ + 0]);
  CHECK(suc[1 * kQ + 0] == win[2 * kQ + 0]);
  // predicted: obstacle coasts to 3.10, ego lands on 1.3, ego vel 1.0
  CHECK(suc[2 * kQ + 0] == doctest::Approx((3.10 - 1.3) / sc.pos));
  CHECK(suc[2 * kQ + 2] == doctest::Approx((0.5 - 1.0) / sc.vel));
}

TEST_CASE("ego features per kind") {
  feat::FeatureScales sc;
  double out[3];

  ego::EgoState si;
  si.kind = ego::DynKind::kSingleIntegrator;
  CHECK(feat::ego_feature_dim(si.kind) == 1);
  feat::ego_features(si, sc, out);
  CHECK(out[0] == 0.0);

  ego::EgoState di;
  di.kind = ego::DynKind::kDoubleIntegrator;
  di.c = {0.0, 0.0, 0.9, -0.3};
  CHECK(feat::ego_feature_dim(di.kind) == 2);
  feat::ego_features(di, sc, out);
  CHECK(out[0] == doctest::Approx(0.9 / 1.5));
  CHECK(out[1] == doctest::Approx(-0.3 / 1.5));

  ego::EgoState du;
  du.kind = ego::DynKind::kDubins;
  du.c = {0.0, 0.0, 1.2, 0.7};
  CHECK(feat::ego_feature_dim(du.kind) == 3);
  feat::ego_features(du, sc, out);
  CHECK(out[0] == doctest::Approx(0.8));
  CHECK(out[1] == doctest::Approx(std::cos(0.7)));
  CHECK(out[2] == doctest::Approx(std::sin(0.7)));

  ego::EgoState bi;
  bi.kind = ego::DynKind::kBicycle;
  bi.c = {0.0, 0.0, -0.4, 0.3};
  CHECK(feat::ego_feature_dim(bi.kind) == 3);
  feat::ego_features(bi, sc, out);
  CHECK(out[0] == doctest::Approx(std::cos(-0.4)));
  CHECK(out[1] == doctest::Approx(std::sin(-0.4)));
  CHECK(out[2] == doctest::Approx(0.5));
}
