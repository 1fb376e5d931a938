#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sncbf/learned_dynamics.hpp"
#include "sncbf/rng.hpp"

using namespace sncbf;
using namespace sncbf::ego;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("kind names round-trip") {
  for (DynKind k : {DynKind::kSingleIntegrator, DynKind::kDoubleIntegrator,
                    DynKind::kDubins, DynKind::kBicycle}) {
    CHECK(parse_dyn_kind(to_string(k)) == k);
    CHECK(kind_from_columns(state_column_names(k)) == k);
    CHECK(static_cast<int>(state_column_names(k).size()) == state_dim(k));
  }
  CHECK_THROWS(parse_dyn_kind("hovercraft"));
}

TEST_CASE("single integrator step") {
  EgoState x;
  x.kind = DynKind::kSingleIntegrator;
  x.c = {1.0, 2.0, 0.0, 0.0};
  EgoState y = step_true(x, {{0.5, -0.25}}, 0.1);
  CHECK(y.c[0] == doctest::Approx(1.05).epsilon(1e-12));
  CHECK(y.c[1] == doctest::Approx(1.975).epsilon(1e-12));

  // out-of-range commands clamp to the unit box
  y = step_true(x, {{2.0, -3.0}}, 0.1);
  CHECK(y.c[0] == doctest::Approx(1.1).epsilon(1e-12));
  CHECK(y.c[1] == doctest::Approx(1.9).epsilon(1e-12));
}

TEST_CASE("double integrator uses pre-step velocity for position") {
  EgoState x;
  x.kind = DynKind::kDoubleIntegrator;
  x.c = {0.0, 0.0, 0.5, -0.5};
  EgoState y = step_true(x, {{1.0, 0.2}}, 0.1);
  CHECK(y.c[0] == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(y.c[1] == doctest::Approx(-0.05).epsilon(1e-12));
  CHECK(y.c[2] == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(y.c[3] == doctest::Approx(-0.48).epsilon(1e-12));
}

TEST_CASE("dubins step, speed clamp, heading wrap") {
  EgoState x;
  x.kind = DynKind::kDubins;
  x.c = {0.0, 0.0, 1.0, kPi / 2};
  EgoState y = step_true(x, {{0.2, 0.5}}, 0.1);
  CHECK(y.c[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(y.c[1] == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(y.c[2] == doctest::Approx(1.02).epsilon(1e-12));
  CHECK(y.c[3] == doctest::Approx(kPi / 2 + 0.05).epsilon(1e-12));

  x.c = {0.0, 0.0, 1.49, 0.0};
  y = step_true(x, {{0.5, 0.0}}, 0.1);
  CHECK(y.c[2] == doctest::Approx(1.5).epsilon(1e-12));

  x.c = {0.0, 0.0, 0.01, 0.0};
  y = step_true(x, {{-0.5, 0.0}}, 0.1);
  CHECK(y.c[2] == doctest::Approx(0.0).epsilon(1e-12));

  x.c = {0.0, 0.0, 1.0, kPi - 0.01};
  y = step_true(x, {{0.0, 1.0}}, 0.1);
  CHECK(y.c[3] == doctest::Approx(0.09 - kPi).epsilon(1e-9));
}

TEST_CASE("bicycle step and steering clamp") {
  EgoState x;
  x.kind = DynKind::kBicycle;
  x.c = {0.0, 0.0, 0.3, 0.2};
  EgoState y = step_true(x, {{0.8, 0.5}}, 0.1);
  CHECK(y.c[0] == doctest::Approx(std::cos(0.3) * 0.8 * 0.1).epsilon(1e-12));
  CHECK(y.c[1] == doctest::Approx(std::sin(0.3) * 0.8 * 0.1).epsilon(1e-12));
  CHECK(y.c[2] == doctest::Approx(0.3 + std::tan(0.2) * 0.8 * 0.1)
                      .epsilon(1e-12));
  CHECK(y.c[3] == doctest::Approx(0.25).epsilon(1e-12));

  x.c = {0.0, 0.0, 0.0, 0.58};
  y = step_true(x, {{0.5, 1.0}}, 0.1);
  CHECK(y.c[3] == doctest::Approx(0.6).epsilon(1e-12));

  // speed command clamps to [0, 1]
  x.c = {0.0, 0.0, 0.0, 0.0};
  y = step_true(x, {{1.7, 0.0}}, 0.1);
  CHECK(y.c[0] == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("initial_state points heading at the goal") {
  EgoState d = initial_state(DynKind::kDubins, {0.0, 0.0}, {1.0, 1.0});
  CHECK(d.c[2] == 0.0);
  CHECK(d.c[3] == doctest::Approx(kPi / 4).epsilon(1e-12));
  EgoState b = initial_state(DynKind::kBicycle, {2.0, 0.0}, {2.0, -3.0});
  CHECK(b.c[2] == doctest::Approx(-kPi / 2).epsilon(1e-12));
  CHECK(b.c[3] == 0.0);
  EgoState s = initial_state(DynKind::kSingleIntegrator, {5.0, -1.0},
                             {0.0, 0.0});
  CHECK(s.pos().x == 5.0);
  CHECK(s.pos().y == -1.0);
}

TEST_CASE("sample_controls stays in bounds and is seed-deterministic") {
  const ControlBounds bounds = default_bounds(DynKind::kDubins);
  Rng a(42), b(42), c(43);
  const auto ua = sample_controls(bounds, 200, a);
  const auto ub = sample_controls(bounds, 200, b);
  const auto uc = sample_controls(bounds, 200, c);
  REQUIRE(ua.size() == 200);
  bool same = true, diff = false;
  for (int i = 0; i < 200; ++i) {
    CHECK(ua[i].u[0] >= bounds.lo[0]);
    CHECK(ua[i].u[0] <= bounds.hi[0]);
    CHECK(ua[i].u[1] >= bounds.lo[1]);
    CHECK(ua[i].u[1] <= bounds.hi[1]);
    same = same && ua[i].u == ub[i].u;
    diff = diff || ua[i].u != uc[i].u;
  }
  CHECK(same);
  CHECK(diff);
}

TEST_CASE("learned single-integrator model reproduces the true step") {
  const DynKind kind = DynKind::kSingleIntegrator;
  auto data = collect_random_transitions(kind, 4000, 10.0, 11);
  DynFitConfig cfg;
  cfg.iterations = 4000;
  cfg.batch = 256;
  cfg.hidden = 32;
  std::vector<std::pair<int, double>> curve;
  LearnedDynamics dyn = fit_dynamics(kind, data, cfg, 5, &curve);

  REQUIRE(!curve.empty());
  CHECK(curve.back().second < curve.front().second);

  auto held_out = collect_random_transitions(kind, 500, 10.0, 99);
  const double rmse = position_rmse(dyn, held_out);
  CHECK(rmse < 2e-3);

  // one-step agreement on a fresh state
  EgoState x = initial_state(kind, {1.0, -2.0}, {0.0, 0.0});
  const Control u{{0.3, -0.7}};
  const EgoState yt = step_true(x, u, 0.1);
  const EgoState yl = step_learned(dyn, x, u);
  CHECK(std::abs(yt.c[0] - yl.c[0]) < 5e-3);
  CHECK(std::abs(yt.c[1] - yl.c[1]) < 5e-3);
}

TEST_CASE("fit is seed-deterministic") {
  const DynKind kind = DynKind::kSingleIntegrator;
  auto data = collect_random_transitions(kind, 600, 10.0, 11);
  DynFitConfig cfg;
  cfg.iterations = 40;
  cfg.batch = 64;
  cfg.hidden = 16;
  LearnedDynamics a = fit_dynamics(kind, data, cfg, 7);
  LearnedDynamics b = fit_dynamics(kind, data, cfg, 7);
  REQUIRE(a.params.total_params() == b.params.total_params());
  for (std::size_t i = 0; i < a.params.size(); ++i) {
    const dc::Tensor& ta = a.params.value_at(i);
    const dc::Tensor& tb = b.params.value_at(i);
    REQUIRE(ta.count() == tb.count());
    for (std::size_t j = 0; j < ta.count(); ++j)
      CHECK(ta.data[j] == tb.data[j]);
  }
}
