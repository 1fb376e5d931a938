#pragma once

#include <array>
#include <string>
#include <vector>

#include "sncbf/rng.hpp"
#include "sncbf/vec2.hpp"

namespace sncbf::ego {

enum class DynKind {
  kSingleIntegrator,
  kDoubleIntegrator,
  kDubins,
  kBicycle,
};

const char* to_string(DynKind kind);
DynKind parse_dyn_kind(const std::string& name);

int state_dim(DynKind kind);
constexpr int control_dim(DynKind) { return 2; }

// State layouts:
//   single_integrator  [px, py]
//   double_integrator  [px, py, vx, vy]
//   dubins             [px, py, v, theta]
//   bicycle            [px, py, theta, delta]
struct EgoState {
  DynKind kind = DynKind::kSingleIntegrator;
  std::array<double, 4> c{};

  Vec2 pos() const { return {c[0], c[1]}; }
  void set_pos(const Vec2& p) {
    c[0] = p.x;
    c[1] = p.y;
  }
};

struct Control {
  std::array<double, 2> u{};
};

struct ControlBounds {
  std::array<double, 2> lo{};
  std::array<double, 2> hi{};

  Control clamp(const Control& in) const {
    Control out = in;
    for (int i = 0; i < 2; ++i) {
      if (out.u[i] < lo[i]) out.u[i] = lo[i];
      if (out.u[i] > hi[i]) out.u[i] = hi[i];
    }
    return out;
  }
};

// Control semantics per kind:
//   single_integrator  u = velocity command, each axis in [-1, 1]
//   double_integrator  u = acceleration, each axis in [-1, 1]
//   dubins             u = [accel in [-0.5, 0.5], turn rate in [-1, 1]]
//   bicycle            u = [speed in [0, 1], steering rate in [-1, 1]]
ControlBounds default_bounds(DynKind kind);

struct EgoParams {
  double wheelbase = 1.0;        // bicycle
  double dubins_v_min = 0.0;
  double dubins_v_max = 1.5;
  double bicycle_delta_max = 0.6;
};

// Forward Euler step. Controls are clamped to default bounds, speed and
// steering states to their configured ranges, and angles wrapped to
// (-pi, pi]. Throws std::invalid_argument on a kind mismatch.
EgoState step_true(const EgoState& x, const Control& u, double dt,
                   const EgoParams& params = {});

// Fresh ego state at `pos` heading toward `goal` (where the kind has a
// heading), all rates zero.
EgoState initial_state(DynKind kind, const Vec2& pos, const Vec2& goal);

// l controls drawn uniformly per component within bounds.
std::vector<Control> sample_controls(const ControlBounds& bounds, int l,
                                     Rng& rng);

// Column names of the state components in the trajectory CSV; the set of
// names identifies the kind when a trajectory is read back.
std::vector<std::string> state_column_names(DynKind kind);
DynKind kind_from_columns(const std::vector<std::string>& ego_columns);

}  // namespace sncbf::ego
