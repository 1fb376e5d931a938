#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "sncbf/barrier.hpp"
#include "sncbf/dataset.hpp"
#include "sncbf/errors.hpp"
#include "sncbf/train.hpp"

using namespace sncbf;

namespace {

void zero_params(dc::ParamBundle& params) {
  for (std::size_t i = 0; i < params.size(); ++i)
    std::fill(params.value_at(i).data.begin(), params.value_at(i).data.end(),
              0.0);
}

// constant-output model: all weights zero, final head bias = c
barrier::BarrierNet constant_net(double c, int k = 5, int ego_dim = 1) {
  barrier::BarrierSpec spec;
  spec.k = k;
  spec.ego_dim = ego_dim;
  barrier::BarrierNet net = barrier::barrier_init(spec, 1);
  zero_params(net.params);
  net.params.value("head.b2").data[0] = c;
  return net;
}

// window of k identical steps at the given relative offset, still obstacle
train::Sample still_sample(double rel_x, double rel_y, int k = 5) {
  feat::RelativeState rel;
  rel.rel_pos = {rel_x, rel_y};
  rel.rel_vel = {0, 0};
  feat::FeatureScales scales;
  train::Sample s;
  s.window.resize(static_cast<std::size_t>(k) * feat::kQ);
  for (int t = 0; t < k; ++t)
    feat::step_features(rel, scales, &s.window[t * feat::kQ]);
  s.ego = {0.0};
  return s;
}

train::Sample member_sample(const ego::EgoState& x,
                            const std::vector<feat::RelativeState>& win) {
  feat::FeatureScales scales;
  train::Sample s;
  s.window.resize(win.size() * feat::kQ);
  for (std::size_t t = 0; t < win.size(); ++t)
    feat::step_features(win[t], scales, &s.window[t * feat::kQ]);
  s.ego.resize(static_cast<std::size_t>(feat::ego_feature_dim(x.kind)));
  feat::ego_features(x, scales, s.ego.data());
  return s;
}

train::LabeledDataset tiny_dataset() {
  train::LabeledDataset data;
  data.k = 5;
  data.ego_dim = 1;
  data.safe = {still_sample(3.0, 0), still_sample(0, 2.5)};
  data.unsafe = {still_sample(0.2, 0)};
  data.pairs = {{still_sample(3.0, 0), still_sample(2.9, 0)}};
  return data;
}

}  // namespace

TEST_CASE("all-zero model pays exactly the margin on every term") {
  barrier::BarrierNet net = constant_net(0.0);
  const train::LabeledDataset data = tiny_dataset();
  // every hinge sits at the kink: 3 * gamma
  CHECK(train::full_loss(net, data) == doctest::Approx(0.03).epsilon(1e-12));

  Rng rng(4);
  const barrier::LossBatch batch = train::make_batch(data, 8, 4, 6, rng);
  dc::Graph g;
  const barrier::LossNodes nodes = barrier::build_loss(g, net, batch);
  CHECK(g.scalar(nodes.loss) == doctest::Approx(0.03).epsilon(1e-12));
  CHECK(g.scalar(nodes.term_safe) == doctest::Approx(0.01));
  CHECK(g.scalar(nodes.term_unsafe) == doctest::Approx(0.01));
  CHECK(g.scalar(nodes.term_invariance) == doctest::Approx(0.01));
}

TEST_CASE("constant positive model zeroes the safe and invariance terms") {
  barrier::BarrierNet net = constant_net(1.0);
  // batch with only safe columns and equal-value pairs: kappa > gamma makes
  // both active terms vanish
  train::LabeledDataset data = tiny_dataset();
  data.unsafe.clear();
  barrier::LossBatch batch;
  batch.n_safe = 3;
  batch.n_unsafe = 0;
  batch.n_pairs = 2;
  const train::Sample s = still_sample(3.0, 0);
  std::vector<const train::Sample*> cols(7, &s);
  batch.steps.assign(5, dc::Tensor::zeros({feat::kQ, 7}));
  batch.ego = dc::Tensor::zeros({1, 7});
  for (int j = 0; j < 7; ++j)
    for (int t = 0; t < 5; ++t)
      for (int r = 0; r < feat::kQ; ++r)
        batch.steps[t].at(r, j) = s.window[t * feat::kQ + r];
  dc::Graph g;
  const barrier::LossNodes nodes = barrier::build_loss(g, net, batch);
  CHECK(g.scalar(nodes.loss) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(nodes.term_unsafe == -1);
}

TEST_CASE("full dataset loss agrees with the training graph") {
  barrier::BarrierSpec spec;
  barrier::BarrierNet net = barrier::barrier_init(spec, 17);
  Rng gen(33);
  train::LabeledDataset data;
  data.k = spec.k;
  data.ego_dim = spec.ego_dim;
  auto random_sample = [&] {
    train::Sample s;
    s.window.resize(static_cast<std::size_t>(spec.k) * feat::kQ);
    for (double& v : s.window) v = gen.uniform(-1, 1);
    s.ego = {gen.uniform(-1, 1)};
    return s;
  };
  for (int i = 0; i < 20; ++i) data.safe.push_back(random_sample());
  for (int i = 0; i < 10; ++i) data.unsafe.push_back(random_sample());
  for (int i = 0; i < 15; ++i)
    data.pairs.emplace_back(random_sample(), random_sample());

  // assemble the whole dataset as one batch, in order
  barrier::LossBatch batch;
  batch.n_safe = 20;
  batch.n_unsafe = 10;
  batch.n_pairs = 15;
  const int total = batch.total();
  batch.steps.assign(spec.k, dc::Tensor::zeros({feat::kQ, total}));
  batch.ego = dc::Tensor::zeros({1, total});
  std::vector<const train::Sample*> cols;
  for (const auto& s : data.safe) cols.push_back(&s);
  for (const auto& s : data.unsafe) cols.push_back(&s);
  for (const auto& pr : data.pairs) cols.push_back(&pr.first);
  for (const auto& pr : data.pairs) cols.push_back(&pr.second);
  for (int j = 0; j < total; ++j) {
    for (int t = 0; t < spec.k; ++t)
      for (int r = 0; r < feat::kQ; ++r)
        batch.steps[t].at(r, j) = cols[j]->window[t * feat::kQ + r];
    batch.ego.at(0, j) = cols[j]->ego[0];
  }
  dc::Graph g;
  const barrier::LossNodes nodes = barrier::build_loss(g, net, batch);
  CHECK(train::full_loss(net, data) ==
        doctest::Approx(g.scalar(nodes.loss)).epsilon(1e-12));
}

TEST_CASE("minibatches have the layout the loss expects") {
  train::LabeledDataset data;
  data.k = 5;
  data.ego_dim = 1;
  for (int i = 0; i < 5; ++i) data.safe.push_back(still_sample(2.0 + i, 0));
  for (int i = 0; i < 3; ++i) data.unsafe.push_back(still_sample(0.1, 0));
  for (int i = 0; i < 4; ++i) {
    train::Sample a = still_sample(2.0, 0);
    train::Sample b = still_sample(2.0, 0);
    a.window[0] = i;        // markers to verify pair alignment
    b.window[0] = 100 + i;
    data.pairs.emplace_back(a, b);
  }

  Rng rng(9);
  const barrier::LossBatch batch = train::make_batch(data, 128, 32, 96, rng);
  CHECK(batch.total() == 352);
  REQUIRE(batch.steps.size() == 5);
  CHECK(batch.steps[0].dims == std::vector<int>{feat::kQ, 352});
  CHECK(batch.ego.dims == std::vector<int>{1, 352});
  for (int j = 0; j < 96; ++j) {
    const double first = batch.steps[0].at(0, 160 + j);
    const double second = batch.steps[0].at(0, 160 + 96 + j);
    CHECK(second == first + 100);  // columns j and j+96 hold one transition
  }

  Rng r1(9), r2(9);
  const barrier::LossBatch b1 = train::make_batch(data, 16, 8, 8, r1);
  const barrier::LossBatch b2 = train::make_batch(data, 16, 8, 8, r2);
  CHECK(b1.steps[2].data == b2.steps[2].data);

  train::LabeledDataset missing = data;
  missing.unsafe.clear();
  CHECK_THROWS_AS(train::make_batch(missing, 8, 4, 4, rng), StageError);
}

TEST_CASE("zero-iteration training leaves the model untouched") {
  barrier::BarrierSpec spec;
  barrier::BarrierNet net = barrier::barrier_init(spec, 3);
  std::vector<std::vector<double>> before;
  for (std::size_t i = 0; i < net.params.size(); ++i)
    before.push_back(net.params.value_at(i).data);
  train::TrainConfig cfg;
  cfg.initial_iterations = 0;
  const std::vector<double> curve =
      train::train_initial(net, tiny_dataset(), cfg);
  CHECK(curve.empty());
  for (std::size_t i = 0; i < net.params.size(); ++i)
    CHECK(net.params.value_at(i).data == before[i]);
}

TEST_CASE("training separates an easily separable dataset") {
  // safe: obstacle at least 2 m away; unsafe: within 0.5 m
  Rng gen(21);
  train::LabeledDataset data;
  data.k = 5;
  data.ego_dim = 1;
  auto safe_at = [&](Rng& r) {
    const double ang = r.uniform(0, 2 * M_PI);
    const double d = r.uniform(2.0, 4.0);
    return still_sample(d * std::cos(ang), d * std::sin(ang));
  };
  auto unsafe_at = [&](Rng& r) {
    const double ang = r.uniform(0, 2 * M_PI);
    const double d = r.uniform(0.05, 0.45);
    return still_sample(d * std::cos(ang), d * std::sin(ang));
  };
  for (int i = 0; i < 400; ++i) data.safe.push_back(safe_at(gen));
  for (int i = 0; i < 400; ++i) data.unsafe.push_back(unsafe_at(gen));
  for (int i = 0; i < 200; ++i) {
    train::Sample a = safe_at(gen);
    data.pairs.emplace_back(a, a);  // static transition, Bdot = 0
  }

  barrier::BarrierSpec spec;
  barrier::BarrierNet net = barrier::barrier_init(spec, 11);
  train::TrainConfig cfg;
  cfg.initial_iterations = 400;
  cfg.batch_safe = 64;
  cfg.batch_unsafe = 16;
  cfg.batch_pairs = 48;
  cfg.seed = 2;
  const std::vector<double> curve = train::train_initial(net, data, cfg);
  REQUIRE(curve.size() == 400);
  for (double v : curve) CHECK(std::isfinite(v));
  // averaged tail an order of magnitude under the flat-model loss
  double head = 0, tail = 0;
  for (int i = 0; i < 20; ++i) head += curve[i] / 20;
  for (int i = 380; i < 400; ++i) tail += curve[i] / 20;
  CHECK(tail < head);

  // held-out sign accuracy
  Rng hold(77);
  int correct = 0, total = 0;
  std::vector<const train::Sample*> cols;
  std::vector<train::Sample> held;
  for (int i = 0; i < 200; ++i) held.push_back(safe_at(hold));
  for (int i = 0; i < 200; ++i) held.push_back(unsafe_at(hold));
  std::vector<dc::Tensor> steps(5, dc::Tensor::zeros({feat::kQ, 400}));
  dc::Tensor egoT = dc::Tensor::zeros({1, 400});
  for (int j = 0; j < 400; ++j)
    for (int t = 0; t < 5; ++t)
      for (int r = 0; r < feat::kQ; ++r)
        steps[t].at(r, j) = held[j].window[t * feat::kQ + r];
  const std::vector<double> b = barrier::barrier_values(net, steps, egoT);
  for (int j = 0; j < 400; ++j) {
    const bool want_safe = j < 200;
    if ((b[j] > 0) == want_safe) ++correct;
    ++total;
  }
  CHECK(static_cast<double>(correct) / total >= 0.99);
}

TEST_CASE("invariance violation fraction tracks the model sign") {
  const train::LabeledDataset data = tiny_dataset();
  // constant model: Bdot = 0, so the condition is just kappa * B >= 0
  CHECK(train::violation_fraction(constant_net(0.0), data.pairs) == 0.0);
  CHECK(train::violation_fraction(constant_net(1.0), data.pairs) == 0.0);
  CHECK(train::violation_fraction(constant_net(-1.0), data.pairs) == 1.0);
  CHECK_THROWS_AS(train::violation_fraction(constant_net(0.0), {}),
                  StageError);
}

namespace {

struct RefineFixture {
  train::LabeledDataset data;
  std::vector<train::SeedRecord> seeds;

  // four boundary members with distinct goals so the injected nominal can
  // tell them apart
  RefineFixture() {
    data.k = 5;
    data.ego_dim = 1;
    ego::EgoState origin;
    origin.kind = ego::DynKind::kSingleIntegrator;

    auto add = [&](double rel_x, const Vec2& goal, const Vec2& obs_next) {
      std::vector<feat::RelativeState> win(
          5, feat::RelativeState{{rel_x, 0.0}, {0.0, 0.0}});
      data.safe.push_back(member_sample(origin, win));
      train::SeedRecord sr;
      sr.ego_state = origin;
      sr.goal = goal;
      sr.window = win;
      sr.obs_next_pos = obs_next;
      sr.obs_next_vel = {0, 0};
      seeds.push_back(sr);
    };
    add(0.3, {1, 0}, {5, 5});     // A: already in collision
    add(2.0, {2, 0}, {0.15, 0});  // B: nominal successor collides
    add(2.0, {3, 0}, {0.0, 0});   // C: only the random successor collides
    add(3.0, {4, 0}, {3.5, 0});   // D: everything stays clear
    data.unsafe = {still_sample(0.2, 0)};
    data.pairs = {{still_sample(3.0, 0), still_sample(3.0, 0)}};
  }
};

train::NominalFn branch_nominal() {
  return [](const ego::EgoState&, const std::vector<feat::RelativeState>&,
            const Vec2& goal) {
    if (goal.x == 3.0) return ego::Control{{9.0, 0.0}};  // teleport marker
    return ego::Control{{1.0, 0.0}};
  };
}

train::StepFn branch_stepper() {
  return [](const ego::EgoState& x, const ego::Control& u) {
    if (u.u[0] == 9.0) {
      ego::EgoState far = x;
      far.set_pos({10.0, 10.0});
      return far;
    }
    return ego::step_true(x, u, 0.1);
  };
}

}  // namespace

TEST_CASE("boundary refinement walks all four relabeling branches") {
  RefineFixture fx;
  barrier::BarrierNet net = constant_net(0.0);  // everything sits on B = 0

  train::TrainConfig cfg;
  cfg.theta = 0.05;
  cfg.boundary_samples = 0;  // members only, no jitter
  cfg.refine_rounds_max = 1;
  cfg.refine_iterations = 0;
  cfg.seed = 7;
  const ego::ControlBounds bounds =
      ego::default_bounds(ego::DynKind::kSingleIntegrator);

  const train::RefineResult res =
      train::refine_boundary(net, fx.data, fx.seeds, cfg, branch_nominal(),
                             branch_stepper(), bounds, 0.1);

  REQUIRE(res.rounds.size() == 1);
  const train::RefineRound& r = res.rounds[0];
  CHECK_FALSE(r.no_op);
  CHECK(r.boundary_members == 4);
  CHECK(r.sampled == 0);
  CHECK(r.removed_safe == 2);   // A and B evicted
  CHECK(r.added_safe == 0);
  CHECK(r.random_unsafe == 1);  // C's exploratory successor
  CHECK(r.to_unsafe == 5);

  // collision-marked members never survive in the safe set
  REQUIRE(fx.data.safe.size() == 2);
  REQUIRE(fx.seeds.size() == 2);
  CHECK(fx.seeds[0].goal.x == 3.0);  // C kept
  CHECK(fx.seeds[1].goal.x == 4.0);  // D kept

  REQUIRE(fx.data.unsafe.size() == 6);
  // A contributed its own state and its nominal successor
  const train::Sample& a_now = fx.data.unsafe[1];
  CHECK(a_now.window[4 * feat::kQ + 0] == doctest::Approx(0.3 / 5.0));
  const train::Sample& a_next = fx.data.unsafe[2];
  // successor: obstacle lands at (5,5), ego stepped to (0.1, 0)
  CHECK(a_next.window[4 * feat::kQ + 0] == doctest::Approx(4.9 / 5.0));
  CHECK(a_next.window[4 * feat::kQ + 1] == doctest::Approx(5.0 / 5.0));
  CHECK(a_next.window[4 * feat::kQ + 2] == doctest::Approx(-1.0 / 3.0));
  // shifted prefix keeps the old steps
  CHECK(a_next.window[0] == doctest::Approx(0.3 / 5.0));
  // B: still clear now, in collision after the nominal step
  const train::Sample& b_next = fx.data.unsafe[4];
  CHECK(b_next.window[4 * feat::kQ + 0] == doctest::Approx(0.05 / 5.0));
  // C: the random-control successor lands within the collision radius
  const train::Sample& c_rand = fx.data.unsafe[5];
  const double cx = c_rand.window[4 * feat::kQ + 0] * 5.0;
  const double cy = c_rand.window[4 * feat::kQ + 1] * 5.0;
  CHECK(std::hypot(cx, cy) < 0.5);

  // nothing changed the model (zero retrain budget), loss stays flat
  CHECK(res.converged);
}

TEST_CASE("refinement with an empty boundary band is a reported no-op") {
  RefineFixture fx;
  barrier::BarrierNet net = constant_net(1.0);  // far above the band
  const std::size_t safe_before = fx.data.safe.size();
  const std::size_t unsafe_before = fx.data.unsafe.size();

  train::TrainConfig cfg;
  cfg.refine_rounds_max = 3;
  cfg.refine_iterations = 0;
  const ego::ControlBounds bounds =
      ego::default_bounds(ego::DynKind::kSingleIntegrator);
  const train::RefineResult res =
      train::refine_boundary(net, fx.data, fx.seeds, cfg, branch_nominal(),
                             branch_stepper(), bounds, 0.1);
  REQUIRE(res.rounds.size() == 1);
  CHECK(res.rounds[0].no_op);
  CHECK(res.rounds[0].boundary_members == 0);
  CHECK(res.converged);
  CHECK(fx.data.safe.size() == safe_before);
  CHECK(fx.data.unsafe.size() == unsafe_before);
}

TEST_CASE("jittered boundary states join the safe set when clear") {
  // one boundary member, everything safe around it: sampling must add the
  // in-band jitters as new safe rows with aligned seed records
  train::LabeledDataset data;
  data.k = 5;
  data.ego_dim = 1;
  ego::EgoState origin;
  origin.kind = ego::DynKind::kSingleIntegrator;
  std::vector<feat::RelativeState> win(
      5, feat::RelativeState{{3.0, 0.0}, {0.0, 0.0}});
  data.safe.push_back(member_sample(origin, win));
  std::vector<train::SeedRecord> seeds(1);
  seeds[0].ego_state = origin;
  seeds[0].goal = {4, 0};
  seeds[0].window = win;
  seeds[0].obs_next_pos = {3.5, 0};
  seeds[0].obs_next_vel = {0, 0};
  data.unsafe = {still_sample(0.2, 0)};
  data.pairs = {{still_sample(3.0, 0), still_sample(3.0, 0)}};

  barrier::BarrierNet net = constant_net(0.0);  // all jitters stay in band
  train::TrainConfig cfg;
  cfg.boundary_samples = 25;
  cfg.refine_rounds_max = 1;
  cfg.refine_iterations = 0;
  cfg.seed = 13;
  const ego::ControlBounds bounds =
      ego::default_bounds(ego::DynKind::kSingleIntegrator);
  const train::RefineResult res =
      train::refine_boundary(net, data, seeds, cfg, branch_nominal(),
                             branch_stepper(), bounds, 0.1);
  REQUIRE(res.rounds.size() == 1);
  CHECK(res.rounds[0].boundary_members == 1);
  CHECK(res.rounds[0].sampled == 25);
  CHECK(res.rounds[0].added_safe == 25);
  CHECK(data.safe.size() == 26);
  CHECK(seeds.size() == data.safe.size());
  // jitter moves the ego, so the relative window shifts the other way
  bool any_shifted = false;
  for (std::size_t i = 1; i < data.safe.size(); ++i)
    if (std::abs(data.safe[i].window[0] - 3.0 / 5.0) > 1e-6)
      any_shifted = true;
  CHECK(any_shifted);
}

TEST_CASE("hand-built two-step collision trajectory labels the crash unsafe") {
  sim::Scenario cfg;
  cfg.ego_dynamics = ego::DynKind::kSingleIntegrator;
  train::DemoConfig demo;

  std::vector<sim::WorldState> frames(2);
  frames[0].time_step = 0;
  frames[0].ego = ego::initial_state(ego::DynKind::kSingleIntegrator, {0, 0},
                                     {1, 0});
  sim::ObstacleState o;
  o.pos = {3.0, 0.0};
  o.vel = {0, 0};
  frames[0].obstacles = {o};
  frames[1] = frames[0];
  frames[1].time_step = 1;
  frames[1].obstacles[0].pos = {0.3, 0.0};

  train::DemoResult out;
  train::label_trajectory(cfg, frames, demo, out);
  CHECK(out.data.unsafe.size() == 1);   // the crash frame
  CHECK(out.data.safe.empty());         // t=0 poisoned by the horizon
  CHECK(out.data.pairs.empty());
  CHECK(out.scene.unsafe.size() == 1);
}

TEST_CASE("labeling horizon splits a slow approach into safe/excluded/unsafe") {
  sim::Scenario cfg;
  cfg.ego_dynamics = ego::DynKind::kSingleIntegrator;
  train::DemoConfig demo;  // horizon 5, sensing 5

  // obstacle marches in along x: 5.8 - 0.6 t; collision (0.4 m) at t = 9
  std::vector<sim::WorldState> frames(10);
  for (int t = 0; t < 10; ++t) {
    frames[t].time_step = t;
    frames[t].ego = ego::initial_state(ego::DynKind::kSingleIntegrator,
                                       {0, 0}, {1, 0});
    sim::ObstacleState o;
    o.pos = {5.8 - 0.6 * t, 0.0};
    o.vel = {-6.0, 0.0};  // consistent with the motion at dt = 0.1
    frames[t].obstacles = {o};
  }

  train::DemoResult out;
  train::label_trajectory(cfg, frames, demo, out);
  // t=0,1 out of sensing range; t=2,3 safe; t=4..8 inside the horizon of the
  // crash; t=9 unsafe
  CHECK(out.data.safe.size() == 2);
  CHECK(out.data.unsafe.size() == 1);
  CHECK(out.data.pairs.size() == 2);
  CHECK(out.seeds.size() == 2);
  // seeds record the next obstacle state for the successor rule
  CHECK(out.seeds[0].obs_next_pos.x == doctest::Approx(5.8 - 0.6 * 3));
  // the tracker replicates the first observation, so the oldest step of the
  // first safe window still shows the t=0 offset
  CHECK(out.data.safe[0].window[0] == doctest::Approx(5.8 / 5.0));
  CHECK(out.scene.safe.size() == 2);
  CHECK(out.scene.unsafe.size() == 1);
}

TEST_CASE("a midpoint sweep counts as a collision even if endpoints clear") {
  sim::Scenario cfg;
  cfg.ego_dynamics = ego::DynKind::kSingleIntegrator;
  train::DemoConfig demo;

  std::vector<sim::WorldState> frames(2);
  for (int t = 0; t < 2; ++t) {
    frames[t].time_step = t;
    frames[t].ego = ego::initial_state(ego::DynKind::kSingleIntegrator,
                                       {t == 0 ? -1.0 : 1.0, 0.0}, {1, 0});
    sim::ObstacleState o;
    o.pos = {0.0, 0.05};
    o.vel = {0, 0};
    frames[t].obstacles = {o};
  }
  train::DemoResult out;
  train::label_trajectory(cfg, frames, demo, out);
  CHECK(out.data.unsafe.size() == 1);
}

namespace {

// drives straight at the goal, blind to obstacles; dense fields guarantee
// collision rows for the unsafe set
struct GreedyController : sim::Controller {
  void reset(const sim::Scenario&, const sim::WorldState&) override {}
  std::optional<ego::Control> act(const sim::Scenario& cfg,
                                  const sim::WorldState& world) override {
    const Vec2 d = cfg.ego_goal - world.ego.pos();
    const double n = d.norm();
    if (n < 1e-12) return ego::Control{};
    return ego::Control{{d.x / n, d.y / n}};
  }
};

}  // namespace

TEST_CASE("demonstration collection fills every label set deterministically") {
  sim::Scenario cfg;
  cfg.arena_half_extent = 6.0;
  cfg.obstacle_count = 14;
  cfg.ego_dynamics = ego::DynKind::kSingleIntegrator;
  cfg.ego_start = {-4.5, -4.5};
  cfg.ego_goal = {4.5, 4.5};
  cfg.max_steps = 120;
  cfg.seed = 5;

  GreedyController nominal;
  train::DemoConfig demo;
  const train::DemoResult out =
      train::collect_demonstrations(cfg, nominal, 8, demo);

  CHECK(out.episodes == 8);
  CHECK(out.frames > 8);
  CHECK_FALSE(out.data.safe.empty());
  CHECK_FALSE(out.data.unsafe.empty());
  CHECK_FALSE(out.data.pairs.empty());
  CHECK_FALSE(out.scene.unsafe.empty());
  CHECK(out.seeds.size() == out.data.safe.size());
  // pairs split between training and holdout, one in ten withheld
  CHECK(out.data.pairs.size() + out.holdout_pairs.size() == out.seeds.size());
  CHECK(out.holdout_pairs.size() ==
        out.seeds.size() / 10);
  // sensing range bounds every emitted sample's newest offset
  for (const train::Sample& s : out.data.safe) {
    const double x = s.window[4 * feat::kQ + 0] * 5.0;
    const double y = s.window[4 * feat::kQ + 1] * 5.0;
    CHECK(std::hypot(x, y) <= 5.0 + 1e-9);
  }

  GreedyController nominal2;
  const train::DemoResult again =
      train::collect_demonstrations(cfg, nominal2, 8, demo);
  CHECK(again.data.safe.size() == out.data.safe.size());
  CHECK(again.data.unsafe.size() == out.data.unsafe.size());
  REQUIRE_FALSE(again.data.safe.empty());
  CHECK(again.data.safe[0].window == out.data.safe[0].window);

  CHECK_THROWS_AS(train::collect_demonstrations(cfg, nominal, 0, demo),
                  StageError);
  sim::Scenario empty_cfg = cfg;
  empty_cfg.obstacle_count = 0;
  CHECK_THROWS_AS(train::collect_demonstrations(empty_cfg, nominal, 2, demo),
                  StageError);
}
