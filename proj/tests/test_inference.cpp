#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "sncbf/episode.hpp"
#include "sncbf/inference.hpp"

using namespace sncbf;

namespace {

std::string temp_path(const char* name) {
  return std::string("/tmp/sncbf_test_") + name;
}

void zero_params(dc::ParamBundle& params) {
  for (std::size_t i = 0; i < params.size(); ++i)
    std::fill(params.value_at(i).data.begin(), params.value_at(i).data.end(),
              0.0);
}

barrier::BarrierNet constant_net(double c) {
  barrier::BarrierSpec spec;
  spec.ego_dim = 1;
  barrier::BarrierNet net = barrier::barrier_init(spec, 1);
  zero_params(net.params);
  net.params.value("head.b2").data[0] = c;
  return net;
}

nonseq::NonseqNet constant_scene_net(double c) {
  nonseq::NonseqSpec spec;
  nonseq::NonseqNet net = nonseq::nonseq_init(spec, 1);
  zero_params(net.params);
  net.params.value("head.b2").data[0] = c;
  return net;
}

// one-step model for the single integrator, fitted once and shared
const ego::LearnedDynamics& si_dynamics() {
  static const ego::LearnedDynamics dyn = [] {
    const std::vector<ego::Transition> data = ego::collect_random_transitions(
        ego::DynKind::kSingleIntegrator, 4000, 5.0, 99);
    ego::DynFitConfig fc;
    fc.iterations = 800;
    return ego::fit_dynamics(ego::DynKind::kSingleIntegrator, data, fc, 4);
  }();
  return dyn;
}

// ego at the origin, one obstacle near, one far beyond sensing range
sim::WorldState two_obstacle_world() {
  sim::WorldState world;
  world.ego = ego::initial_state(ego::DynKind::kSingleIntegrator, {0, 0},
                                 {2, 0});
  sim::ObstacleState near;
  near.pos = {1.0, 0.5};
  near.vel = {0.2, 0.0};
  sim::ObstacleState far;
  far.pos = {9.0, 9.0};
  far.vel = {0, 0};
  world.obstacles = {near, far};
  return world;
}

std::vector<ego::Control> fixed_candidates() {
  return {ego::Control{{1.0, 0.0}}, ego::Control{{0.0, 1.0}},
          ego::Control{{-1.0, 0.0}}, ego::Control{{0.5, -0.5}}};
}

}  // namespace

TEST_CASE("clipped product aggregation hand values") {
  CHECK(infer::aggregate({0.7, 0.9}, 0.5) == 1.0);
  CHECK(infer::aggregate({0.25, -0.1}, 0.5) == 0.0);
  CHECK(infer::aggregate({0.25, 0.4}, 0.5) == doctest::Approx(0.4));
  CHECK(infer::aggregate({}, 0.5) == 1.0);
  CHECK(infer::aggregate({0.0}, 0.5) == 0.0);
}

TEST_CASE("aggregation algebra on random lists") {
  Rng rng(12);
  for (int trial = 0; trial < 2000; ++trial) {
    const int n = 1 + rng.uniform_int(6);
    std::vector<double> v(n);
    double mn = 1e300;
    for (double& x : v) {
      x = rng.uniform(-1.0, 2.0);
      mn = std::min(mn, x);
    }
    const double a = infer::aggregate(v, 0.5);
    CHECK(a >= 0.0);
    CHECK(a <= 1.0);
    CHECK((a == 0.0) == (mn <= 0.0));

    // permutation invariance
    std::vector<double> shuffled = v;
    for (int i = n - 1; i > 0; --i)
      std::swap(shuffled[i], shuffled[rng.uniform_int(i + 1)]);
    CHECK(infer::aggregate(shuffled, 0.5) == doctest::Approx(a).epsilon(1e-12));

    // values at or above the clip are interchangeable with the clip
    std::vector<double> clipped = v;
    for (double& x : clipped)
      if (x >= 0.5) x = 0.5;
    CHECK(infer::aggregate(clipped, 0.5) == doctest::Approx(a).epsilon(1e-12));

    // raising one entry never lowers the product
    std::vector<double> raised = v;
    const int at = rng.uniform_int(n);
    raised[at] += rng.uniform(0.0, 1.0);
    CHECK(infer::aggregate(raised, 0.5) >= a - 1e-12);
  }
}

TEST_CASE("a certifying model accepts the best-scored candidate lazily") {
  const sim::WorldState world = two_obstacle_world();
  feat::FeatureScales scales;
  feat::HistoryTracker tracker(5, scales);
  tracker.reset(world, 0.1);
  const std::vector<int> in_range = infer::obstacles_in_range(world, 5.0);
  REQUIRE(in_range == std::vector<int>{0});

  barrier::BarrierNet net = constant_net(1.0);
  barrier::BarrierEvaluator ev(net);
  const std::vector<ego::Control> cands = fixed_candidates();
  infer::SelectConfig cfg;

  const infer::ControllerDecision lazy = infer::select_from_candidates(
      world, tracker, in_range, ev, si_dynamics(), cands, {2, 0}, cfg, 0.1);
  REQUIRE(lazy.chosen.has_value());
  CHECK(lazy.candidates_evaluated == 1);
  CHECK(lazy.feasible_count == 1);
  CHECK(lazy.successors_predicted == 4);

  // the accepted control is the goal-greedy one under the learned model
  double best = -1e300;
  ego::Control want{};
  for (const ego::Control& u : cands) {
    const ego::EgoState xn = ego::step_learned(si_dynamics(), world.ego, u);
    const double s = -(xn.pos() - Vec2{2, 0}).norm();
    if (s > best) {
      best = s;
      want = u;
    }
  }
  CHECK(lazy.chosen->u == want.u);

  infer::SelectConfig ex = cfg;
  ex.exhaustive = true;
  const infer::ControllerDecision full = infer::select_from_candidates(
      world, tracker, in_range, ev, si_dynamics(), cands, {2, 0}, ex, 0.1);
  REQUIRE(full.chosen.has_value());
  CHECK(full.chosen->u == lazy.chosen->u);
  CHECK(full.candidates_evaluated == 4);
  CHECK(full.feasible_count == 4);
}

TEST_CASE("a rejecting model freezes with zero feasible candidates") {
  const sim::WorldState world = two_obstacle_world();
  feat::FeatureScales scales;
  feat::HistoryTracker tracker(5, scales);
  tracker.reset(world, 0.1);
  const std::vector<int> in_range = {0};

  barrier::BarrierNet net = constant_net(-1.0);
  barrier::BarrierEvaluator ev(net);
  infer::SelectConfig cfg;
  for (const bool exhaustive : {false, true}) {
    infer::SelectConfig c = cfg;
    c.exhaustive = exhaustive;
    const infer::ControllerDecision d = infer::select_from_candidates(
        world, tracker, in_range, ev, si_dynamics(), fixed_candidates(),
        {2, 0}, c, 0.1);
    CHECK_FALSE(d.chosen.has_value());
    CHECK(d.feasible_count == 0);
    CHECK(d.candidates_evaluated == 4);  // had to reject every one
  }
}

TEST_CASE("lazy and exhaustive walks always pick the same control") {
  const sim::WorldState world = two_obstacle_world();
  feat::FeatureScales scales;
  feat::HistoryTracker tracker(5, scales);
  tracker.reset(world, 0.1);
  const std::vector<int> in_range = {0};

  for (uint64_t seed = 1; seed <= 6; ++seed) {
    barrier::BarrierSpec spec;
    spec.ego_dim = 1;
    barrier::BarrierNet net = barrier::barrier_init(spec, seed);
    barrier::BarrierEvaluator ev(net);
    Rng rng(seed);
    const std::vector<ego::Control> cands = ego::sample_controls(
        ego::default_bounds(ego::DynKind::kSingleIntegrator), 16, rng);

    infer::SelectConfig lazy_cfg;
    const infer::ControllerDecision lazy = infer::select_from_candidates(
        world, tracker, in_range, ev, si_dynamics(), cands, {2, 0}, lazy_cfg,
        0.1);
    infer::SelectConfig ex_cfg;
    ex_cfg.exhaustive = true;
    const infer::ControllerDecision full = infer::select_from_candidates(
        world, tracker, in_range, ev, si_dynamics(), cands, {2, 0}, ex_cfg,
        0.1);
    CHECK(lazy.chosen.has_value() == full.chosen.has_value());
    if (lazy.chosen.has_value()) {
      CHECK(lazy.chosen->u == full.chosen->u);
      CHECK(full.feasible_count >= lazy.feasible_count);
    }
    CHECK((lazy.chosen.has_value()) == (lazy.feasible_count > 0));
    CHECK((full.chosen.has_value()) == (full.feasible_count > 0));
  }
}

TEST_CASE("no obstacle in range makes feasibility vacuous") {
  sim::WorldState world = two_obstacle_world();
  world.obstacles.clear();
  feat::FeatureScales scales;
  feat::HistoryTracker tracker(5, scales);
  tracker.reset(world, 0.1);

  barrier::BarrierNet net = constant_net(-1.0);  // would reject everything
  barrier::BarrierEvaluator ev(net);
  infer::SelectConfig cfg;
  const infer::ControllerDecision d = infer::select_from_candidates(
      world, tracker, {}, ev, si_dynamics(), fixed_candidates(), {2, 0}, cfg,
      0.1);
  REQUIRE(d.chosen.has_value());
  CHECK(d.feasible_count == 1);  // first (best) candidate accepted
}

TEST_CASE("decision tracing forces exhaustive evaluation and orders rows") {
  const sim::WorldState world = two_obstacle_world();
  feat::FeatureScales scales;
  feat::HistoryTracker tracker(5, scales);
  tracker.reset(world, 0.1);
  const std::vector<int> in_range = {0};

  barrier::BarrierSpec spec;
  spec.ego_dim = 1;
  barrier::BarrierNet net = barrier::barrier_init(spec, 8);
  barrier::BarrierEvaluator ev(net);
  infer::SelectConfig cfg;  // lazy, but the trace overrides
  infer::DecisionTrace trace;
  const std::vector<ego::Control> cands = fixed_candidates();
  const infer::ControllerDecision d = infer::select_from_candidates(
      world, tracker, in_range, ev, si_dynamics(), cands, {2, 0}, cfg, 0.1,
      &trace);
  CHECK(d.candidates_evaluated == 4);
  REQUIRE(trace.candidates.size() == 4);
  CHECK(trace.obstacles == in_range);
  for (std::size_t i = 1; i < trace.candidates.size(); ++i)
    CHECK(trace.candidates[i - 1].score >= trace.candidates[i].score);
  for (const infer::CandidateTrace& c : trace.candidates) {
    REQUIRE(c.barriers.size() == 1);
    CHECK(c.aggregated ==
          doctest::Approx(infer::aggregate(c.barriers, cfg.agg.b)));
    CHECK(c.feasible == (c.aggregated > 0.0));
  }
  if (d.chosen.has_value()) {
    REQUIRE(trace.chosen_index >= 0);
    CHECK(trace.candidates[trace.chosen_index].u.u == d.chosen->u);
  } else {
    CHECK(trace.chosen_index == -1);
  }
}

TEST_CASE("successor windows shift the history and append the prediction") {
  feat::FeatureScales scales;
  feat::HistoryTracker tracker(5, scales);
  Rng rng(31);

  sim::WorldState world;
  world.ego = ego::initial_state(ego::DynKind::kSingleIntegrator, {0, 0},
                                 {1, 1});
  for (int i = 0; i < 3; ++i) {
    sim::ObstacleState o;
    o.pos = {rng.uniform(-3, 3), rng.uniform(-3, 3)};
    o.vel = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
    world.obstacles.push_back(o);
  }
  tracker.reset(world, 0.1);
  for (int t = 1; t <= 3; ++t) {
    world.time_step = t;
    world.ego.set_pos(world.ego.pos() + Vec2{0.05, -0.02});
    for (sim::ObstacleState& o : world.obstacles)
      o.pos = o.pos + o.vel * 0.1;
    tracker.push(world);
  }

  const Vec2 ego_next = world.ego.pos() + Vec2{0.08, 0.01};
  std::vector<double> now(5 * feat::kQ), succ(5 * feat::kQ);
  for (int i = 0; i < 3; ++i) {
    tracker.window(i, now.data());
    tracker.successor_window(i, world, ego_next, 0.1, succ.data());
    // prefix = old window shifted left one step
    for (int t = 0; t < 4; ++t)
      for (int r = 0; r < feat::kQ; ++r)
        CHECK(succ[t * feat::kQ + r] ==
              doctest::Approx(now[(t + 1) * feat::kQ + r]));
    // appended step: obstacle coasts, ego velocity from the hop
    const sim::ObstacleState& o = world.obstacles[i];
    feat::RelativeState rel;
    rel.rel_pos = (o.pos + o.vel * 0.1) - ego_next;
    rel.rel_vel = o.vel - (ego_next - world.ego.pos()) * 10.0;
    std::vector<double> want(feat::kQ);
    feat::step_features(rel, scales, want.data());
    for (int r = 0; r < feat::kQ; ++r)
      CHECK(succ[4 * feat::kQ + r] == doctest::Approx(want[r]));
  }
}

TEST_CASE("cached history prefixes reproduce the full evaluation") {
  barrier::BarrierSpec spec;
  spec.ego_dim = 1;
  barrier::BarrierNet net = barrier::barrier_init(spec, 40);
  barrier::BarrierEvaluator ev(net);
  Rng rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> window(5 * feat::kQ);
    for (double& v : window) v = rng.uniform(-1, 1);
    const double ego_feat = rng.uniform(-1, 1);

    std::vector<const double*> steps(5);
    for (int t = 0; t < 5; ++t) steps[t] = &window[t * feat::kQ];
    const double direct = ev.value(steps, &ego_feat);

    std::vector<const double*> prefix_steps(steps.begin(), steps.end() - 1);
    const dc::LstmState prefix = ev.run_prefix(prefix_steps);
    std::vector<double> code;
    ev.encode_ego(&ego_feat, code);
    const double cached = ev.value_from(prefix, steps[4], code);
    CHECK(cached == doctest::Approx(direct).epsilon(1e-12));
  }
}

TEST_CASE("an agreeing ensemble behaves like its members") {
  const sim::WorldState world = two_obstacle_world();
  feat::FeatureScales scales;
  feat::HistoryTracker tracker(5, scales);
  tracker.reset(world, 0.1);
  const std::vector<int> in_range = {0};
  const std::vector<ego::Control> cands = fixed_candidates();

  barrier::BarrierSpec spec;
  spec.ego_dim = 1;
  barrier::BarrierNet net = barrier::barrier_init(spec, 3);
  barrier::BarrierEvaluator single(net);
  infer::SelectConfig cfg;
  const infer::ControllerDecision alone = infer::select_from_candidates(
      world, tracker, in_range, single, si_dynamics(), cands, {2, 0}, cfg,
      0.1);

  std::vector<barrier::BarrierEvaluator> members(3,
                                                 barrier::BarrierEvaluator(net));
  infer::EnsembleConfig ens;  // identical members: zero variance
  const infer::ControllerDecision together =
      infer::ensemble_select_from_candidates(world, tracker, in_range, members,
                                             ens, si_dynamics(), cands, {2, 0},
                                             cfg, 0.1);
  CHECK(alone.chosen.has_value() == together.chosen.has_value());
  if (alone.chosen.has_value()) CHECK(alone.chosen->u == together.chosen->u);
}

TEST_CASE("ensemble disagreement trips the variance gate") {
  const sim::WorldState world = two_obstacle_world();
  feat::FeatureScales scales;
  feat::HistoryTracker tracker(5, scales);
  tracker.reset(world, 0.1);
  const std::vector<int> in_range = {0};
  const std::vector<ego::Control> cands = fixed_candidates();
  infer::SelectConfig cfg;

  // +1 and -1: the mean aggregated value is 0.5 > 0, but the raw values
  // disagree with population variance 1
  barrier::BarrierNet up = constant_net(1.0);
  barrier::BarrierNet down = constant_net(-1.0);
  std::vector<barrier::BarrierEvaluator> split{barrier::BarrierEvaluator(up),
                                               barrier::BarrierEvaluator(down)};
  infer::EnsembleConfig ens;
  const infer::ControllerDecision d = infer::ensemble_select_from_candidates(
      world, tracker, in_range, split, ens, si_dynamics(), cands, {2, 0}, cfg,
      0.1);
  CHECK_FALSE(d.chosen.has_value());
  CHECK(d.feasible_count == 0);

  // close agreement passes the default gate but not a zero-tolerance one
  barrier::BarrierNet near_up = constant_net(0.9);
  std::vector<barrier::BarrierEvaluator> close{
      barrier::BarrierEvaluator(up), barrier::BarrierEvaluator(near_up)};
  const infer::ControllerDecision ok = infer::ensemble_select_from_candidates(
      world, tracker, in_range, close, ens, si_dynamics(), cands, {2, 0}, cfg,
      0.1);
  CHECK(ok.chosen.has_value());

  infer::EnsembleConfig strict;
  strict.variance_threshold = 1e-4;  // {1.0, 0.9} has variance 2.5e-3
  const infer::ControllerDecision blocked =
      infer::ensemble_select_from_candidates(world, tracker, in_range, close,
                                             strict, si_dynamics(), cands,
                                             {2, 0}, cfg, 0.1);
  CHECK_FALSE(blocked.chosen.has_value());
}

TEST_CASE("all-positive ensemble mode vetoes any negative member") {
  const sim::WorldState world = two_obstacle_world();
  feat::FeatureScales scales;
  feat::HistoryTracker tracker(5, scales);
  tracker.reset(world, 0.1);
  const std::vector<int> in_range = {0};
  const std::vector<ego::Control> cands = fixed_candidates();
  infer::SelectConfig cfg;

  // small positive plus small negative: mean aggregated is positive and the
  // variance is tiny, so only the all-positive rule can reject it
  barrier::BarrierNet a = constant_net(0.05);
  barrier::BarrierNet b = constant_net(-0.01);
  std::vector<barrier::BarrierEvaluator> members{
      barrier::BarrierEvaluator(a), barrier::BarrierEvaluator(b)};

  infer::EnsembleConfig mean_mode;
  const infer::ControllerDecision accepted =
      infer::ensemble_select_from_candidates(world, tracker, in_range, members,
                                             mean_mode, si_dynamics(), cands,
                                             {2, 0}, cfg, 0.1);
  CHECK(accepted.chosen.has_value());

  infer::EnsembleConfig all_mode;
  all_mode.require_all_positive = true;
  const infer::ControllerDecision vetoed =
      infer::ensemble_select_from_candidates(world, tracker, in_range, members,
                                             all_mode, si_dynamics(), cands,
                                             {2, 0}, cfg, 0.1);
  CHECK_FALSE(vetoed.chosen.has_value());
}

TEST_CASE("obstacle range filter uses current distance") {
  sim::WorldState world = two_obstacle_world();
  CHECK(infer::obstacles_in_range(world, 5.0) == std::vector<int>{0});
  CHECK(infer::obstacles_in_range(world, 20.0) == std::vector<int>{0, 1});
  CHECK(infer::obstacles_in_range(world, 0.5).empty());
}

TEST_CASE("trace files carry per-obstacle columns with blanks out of range") {
  const sim::WorldState world = two_obstacle_world();
  feat::FeatureScales scales;
  feat::HistoryTracker tracker(5, scales);
  tracker.reset(world, 0.1);
  const std::vector<int> in_range = {0};  // obstacle 1 beyond sensing

  barrier::BarrierNet net = constant_net(1.0);
  barrier::BarrierEvaluator ev(net);
  infer::SelectConfig cfg;
  infer::DecisionTrace trace;
  const std::vector<ego::Control> cands = fixed_candidates();
  infer::select_from_candidates(world, tracker, in_range, ev, si_dynamics(),
                                cands, {2, 0}, cfg, 0.1, &trace);

  infer::TraceWriter tw(2);
  tw.add(0, trace);
  tw.add(1, trace);
  const std::string path = temp_path("trace.csv");
  tw.write(path);

  std::ifstream in(path);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "step,candidate,u0,u1,score,aggregated,feasible,chosen,b0,b1");
  int rows = 0, chosen_flags = 0;
  while (std::getline(in, line)) {
    ++rows;
    // last field (b1) is blank: the second obstacle was out of range
    CHECK(line.back() == ',');
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells[7] == "1") ++chosen_flags;
  }
  CHECK(rows == 2 * 4);
  CHECK(chosen_flags == 2);  // one chosen row per step
  std::remove(path.c_str());
}

TEST_CASE("closed-loop controller reaches the goal when never vetoed") {
  sim::Scenario cfg;
  cfg.arena_half_extent = 6.0;
  cfg.obstacle_count = 1;
  cfg.ego_dynamics = ego::DynKind::kSingleIntegrator;
  cfg.ego_start = {-1.5, -1.5};
  cfg.ego_goal = {1.5, 1.5};
  cfg.max_steps = 150;
  cfg.seed = 11;

  infer::SelectConfig sel;
  sel.l = 16;
  infer::SncbfController ctrl(constant_net(1.0), si_dynamics(), sel);
  const sim::EpisodeResult res = sim::run_episode(cfg, ctrl);
  CHECK(res.outcome != sim::Outcome::kFrozen);
  CHECK(res.outcome != sim::Outcome::kTimedOut);
  CHECK(ctrl.decisions() == res.steps);
  CHECK(ctrl.successors_predicted() == 16 * ctrl.decisions());

  // the whole loop is a pure function of the scenario
  infer::SncbfController ctrl2(constant_net(1.0), si_dynamics(), sel);
  const sim::EpisodeResult res2 = sim::run_episode(cfg, ctrl2);
  REQUIRE(res2.trajectory.size() == res.trajectory.size());
  for (std::size_t t = 0; t < res.trajectory.size(); ++t) {
    CHECK(res2.trajectory[t].ego.c == res.trajectory[t].ego.c);
    for (std::size_t i = 0; i < res.trajectory[t].obstacles.size(); ++i)
      CHECK(res2.trajectory[t].obstacles[i].pos.x ==
            res.trajectory[t].obstacles[i].pos.x);
  }
}

TEST_CASE("a rejecting model freezes the episode at the first decision") {
  sim::Scenario cfg;
  cfg.arena_half_extent = 2.0;  // everything lands within sensing range
  cfg.obstacle_count = 3;
  cfg.ego_dynamics = ego::DynKind::kSingleIntegrator;
  cfg.ego_start = {0, 0};
  cfg.ego_goal = {1.5, 1.5};
  cfg.max_steps = 50;
  cfg.seed = 21;

  infer::SelectConfig sel;
  sel.l = 8;
  infer::SncbfController ctrl(constant_net(-1.0), si_dynamics(), sel);
  const sim::EpisodeResult res = sim::run_episode(cfg, ctrl);
  CHECK(res.outcome == sim::Outcome::kFrozen);
  CHECK(res.steps == 0);
  CHECK(ctrl.last_decision().feasible_count == 0);
}

TEST_CASE("ensemble controller runs the closed loop") {
  sim::Scenario cfg;
  cfg.arena_half_extent = 6.0;
  cfg.obstacle_count = 1;
  cfg.ego_dynamics = ego::DynKind::kSingleIntegrator;
  cfg.ego_start = {-1.5, -1.5};
  cfg.ego_goal = {1.5, 1.5};
  cfg.max_steps = 150;
  cfg.seed = 13;

  std::vector<barrier::BarrierNet> members;
  members.push_back(constant_net(1.0));
  members.push_back(constant_net(0.9));
  members.push_back(constant_net(0.8));
  infer::SelectConfig sel;
  sel.l = 8;
  infer::EnsembleController ctrl(std::move(members), si_dynamics(), {}, sel);
  const sim::EpisodeResult res = sim::run_episode(cfg, ctrl);
  CHECK(res.outcome != sim::Outcome::kFrozen);
}

TEST_CASE("pooled-model controller moves when certified and freezes when not") {
  sim::Scenario cfg;
  cfg.arena_half_extent = 2.0;
  cfg.obstacle_count = 2;
  cfg.ego_dynamics = ego::DynKind::kSingleIntegrator;
  cfg.ego_start = {0, 0};
  cfg.ego_goal = {1.2, 1.2};
  cfg.max_steps = 60;
  cfg.seed = 17;

  infer::SelectConfig sel;
  sel.l = 8;
  infer::NonseqController go(constant_scene_net(1.0), si_dynamics(), sel);
  const sim::EpisodeResult moving = sim::run_episode(cfg, go);
  CHECK(moving.outcome != sim::Outcome::kFrozen);
  CHECK(moving.steps > 0);

  infer::NonseqController stop(constant_scene_net(-1.0), si_dynamics(), sel);
  const sim::EpisodeResult frozen = sim::run_episode(cfg, stop);
  CHECK(frozen.outcome == sim::Outcome::kFrozen);
  CHECK(frozen.steps == 0);
}
