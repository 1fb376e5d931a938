#include "sncbf/ego.hpp"

#include <algorithm>
#include <stdexcept>

namespace sncbf::ego {

const char* to_string(DynKind kind) {
  switch (kind) {
    case DynKind::kSingleIntegrator: return "single_integrator";
    case DynKind::kDoubleIntegrator: return "double_integrator";
    case DynKind::kDubins: return "dubins";
    case DynKind::kBicycle: return "bicycle";
  }
  return "?";
}

DynKind parse_dyn_kind(const std::string& name) {
  if (name == "single_integrator") return DynKind::kSingleIntegrator;
  if (name == "double_integrator") return DynKind::kDoubleIntegrator;
  if (name == "dubins") return DynKind::kDubins;
  if (name == "bicycle") return DynKind::kBicycle;
  throw std::invalid_argument("unknown dynamics kind: " + name);
}

int state_dim(DynKind kind) {
  return kind == DynKind::kSingleIntegrator ? 2 : 4;
}

ControlBounds default_bounds(DynKind kind) {
  switch (kind) {
    case DynKind::kSingleIntegrator: return {{-1.0, -1.0}, {1.0, 1.0}};
    case DynKind::kDoubleIntegrator: return {{-1.0, -1.0}, {1.0, 1.0}};
    case DynKind::kDubins: return {{-0.5, -1.0}, {0.5, 1.0}};
    case DynKind::kBicycle: return {{0.0, -1.0}, {1.0, 1.0}};
  }
  return {};
}

EgoState step_true(const EgoState& x, const Control& u_in, double dt,
                   const EgoParams& p) {
  const Control u = default_bounds(x.kind).clamp(u_in);
  EgoState n = x;
  switch (x.kind) {
    case DynKind::kSingleIntegrator:
      n.c[0] = x.c[0] + u.u[0] * dt;
      n.c[1] = x.c[1] + u.u[1] * dt;
      break;
    case DynKind::kDoubleIntegrator:
      n.c[0] = x.c[0] + x.c[2] * dt;
      n.c[1] = x.c[1] + x.c[3] * dt;
      n.c[2] = x.c[2] + u.u[0] * dt;
      n.c[3] = x.c[3] + u.u[1] * dt;
      break;
    case DynKind::kDubins: {
      const double v = x.c[2];
      const double th = x.c[3];
      n.c[0] = x.c[0] + v * std::cos(th) * dt;
      n.c[1] = x.c[1] + v * std::sin(th) * dt;
      n.c[2] = std::clamp(v + u.u[0] * dt, p.dubins_v_min, p.dubins_v_max);
      n.c[3] = wrap_angle(th + u.u[1] * dt);
      break;
    }
    case DynKind::kBicycle: {
      const double th = x.c[2];
      const double de = x.c[3];
      const double v = u.u[0];
      const double L = p.wheelbase;
      n.c[0] = x.c[0] + std::cos(th) * v / L * dt;
      n.c[1] = x.c[1] + std::sin(th) * v / L * dt;
      n.c[2] = wrap_angle(th + std::tan(de) * v / L * dt);
      n.c[3] = std::clamp(de + u.u[1] * dt, -p.bicycle_delta_max,
                          p.bicycle_delta_max);
      break;
    }
  }
  return n;
}

EgoState initial_state(DynKind kind, const Vec2& pos, const Vec2& goal) {
  EgoState s;
  s.kind = kind;
  s.set_pos(pos);
  const Vec2 d = goal - pos;
  const double heading = (d.norm2() > 0.0) ? std::atan2(d.y, d.x) : 0.0;
  if (kind == DynKind::kDubins) s.c[3] = heading;
  if (kind == DynKind::kBicycle) s.c[2] = heading;
  return s;
}

std::vector<Control> sample_controls(const ControlBounds& bounds, int l,
                                     Rng& rng) {
  std::vector<Control> out(static_cast<size_t>(l));
  for (Control& c : out)
    for (int i = 0; i < 2; ++i) c.u[i] = rng.uniform(bounds.lo[i], bounds.hi[i]);
  return out;
}

std::vector<std::string> state_column_names(DynKind kind) {
  switch (kind) {
    case DynKind::kSingleIntegrator: return {"ego_px", "ego_py"};
    case DynKind::kDoubleIntegrator:
      return {"ego_px", "ego_py", "ego_vx", "ego_vy"};
    case DynKind::kDubins: return {"ego_px", "ego_py", "ego_v", "ego_theta"};
    case DynKind::kBicycle:
      return {"ego_px", "ego_py", "ego_theta", "ego_delta"};
  }
  return {};
}

DynKind kind_from_columns(const std::vector<std::string>& ego_columns) {
  auto has = [&](const char* name) {
    return std::find(ego_columns.begin(), ego_columns.end(), name) !=
           ego_columns.end();
  };
  if (has("ego_v")) return DynKind::kDubins;
  if (has("ego_delta")) return DynKind::kBicycle;
  if (has("ego_vx")) return DynKind::kDoubleIntegrator;
  return DynKind::kSingleIntegrator;
}

}  // namespace sncbf::ego
