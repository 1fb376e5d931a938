#include "sncbf/replay.hpp"

#include <algorithm>
#include <cmath>

#include "sncbf/errors.hpp"
#include "sncbf/inference.hpp"
#include "sncbf/svg.hpp"

namespace sncbf::replay {
namespace {

// Ego planar velocity per frame, backward difference like the tracker: zero
// on the first frame.
std::vector<Vec2> ego_velocities(const std::vector<sim::WorldState>& frames,
                                 double dt) {
  std::vector<Vec2> out(frames.size());
  for (size_t t = 0; t < frames.size(); ++t) {
    if (t == 0) {
      out[t] = {0.0, 0.0};
    } else {
      Vec2 a = frames[t - 1].ego.pos(), b = frames[t].ego.pos();
      out[t] = {(b.x - a.x) / dt, (b.y - a.y) / dt};
    }
  }
  return out;
}

}  // namespace

std::vector<int> default_frames(int n_frames) {
  std::vector<int> out;
  if (n_frames <= 0) return out;
  for (int i = 0; i < 4; ++i) {
    int f = static_cast<int>(std::lround((n_frames - 1) * (i / 3.0)));
    if (out.empty() || out.back() != f) out.push_back(f);
  }
  return out;
}

FrameGrid eval_frame_grid(const barrier::BarrierNet& net,
                          const sim::Trajectory& traj, int frame,
                          const ReplayOptions& opt) {
  const auto& frames = traj.frames;
  if (frames.empty()) throw ConfigError("replay: trajectory has no frames");
  if (frame < 0 || frame >= static_cast<int>(frames.size()))
    throw ConfigError("replay: frame " + std::to_string(frame) +
                      " out of range, trajectory has " +
                      std::to_string(frames.size()) + " frames");
  if (!(opt.pitch > 0)) throw ConfigError("replay: pitch must be positive");

  // Grid covers everything the picture shows: the ego path and every
  // obstacle position over the whole trajectory, padded one meter.
  double lo_x = frames[0].ego.pos().x, hi_x = lo_x;
  double lo_y = frames[0].ego.pos().y, hi_y = lo_y;
  auto widen = [&](const Vec2& p) {
    lo_x = std::min(lo_x, p.x);
    hi_x = std::max(hi_x, p.x);
    lo_y = std::min(lo_y, p.y);
    hi_y = std::max(hi_y, p.y);
  };
  for (const auto& w : frames) {
    widen(w.ego.pos());
    for (const auto& o : w.obstacles) widen(o.pos);
  }
  const double pad = 1.0;
  lo_x -= pad;
  lo_y -= pad;
  hi_x += pad;
  hi_y += pad;

  FrameGrid grid;
  grid.frame = frame;
  grid.pitch = opt.pitch;
  grid.x0 = lo_x;
  grid.y0 = lo_y;
  grid.nx = static_cast<int>(std::ceil((hi_x - lo_x) / opt.pitch)) + 1;
  grid.ny = static_cast<int>(std::ceil((hi_y - lo_y) / opt.pitch)) + 1;
  long cells = static_cast<long>(grid.nx) * grid.ny;
  if (cells > opt.max_cells)
    throw ConfigError(
        "replay: grid " + std::to_string(grid.nx) + "x" +
        std::to_string(grid.ny) + " = " + std::to_string(cells) +
        " nodes exceeds the limit of " + std::to_string(opt.max_cells) +
        "; raise replay.max_cells or coarsen replay.pitch");

  const int k = net.spec.k;
  const auto& world = frames[frame];
  const int n_obs = static_cast<int>(world.obstacles.size());
  auto ego_vel = ego_velocities(frames, opt.dt);

  // Per obstacle and window step: absolute obstacle state and the ego
  // velocity of that frame (frames before the start replicate frame 0, the
  // same fill rule the online tracker uses).
  struct StepObs {
    Vec2 obs_pos, obs_vel, ego_vel;
  };
  std::vector<StepObs> hist(static_cast<size_t>(n_obs) * k);
  for (int i = 0; i < n_obs; ++i) {
    for (int s = 0; s < k; ++s) {
      int t = std::max(0, frame - (k - 1) + s);
      const auto& o = frames[t].obstacles[i];
      hist[size_t(i) * k + s] = {o.pos, o.vel, ego_vel[t]};
    }
  }

  std::vector<double> ego_feat(static_cast<size_t>(
      feat::ego_feature_dim(traj.kind)));
  feat::ego_features(world.ego, opt.scales, ego_feat.data());

  barrier::BarrierEvaluator ev(net);
  std::vector<double> window(static_cast<size_t>(k) * feat::kQ);
  std::vector<const double*> steps(k);
  for (int s = 0; s < k; ++s) steps[s] = &window[size_t(s) * feat::kQ];

  grid.value.resize(static_cast<size_t>(cells));
  std::vector<double> values;
  for (int iy = 0; iy < grid.ny; ++iy) {
    for (int ix = 0; ix < grid.nx; ++ix) {
      Vec2 p{grid.x0 + ix * grid.pitch, grid.y0 + iy * grid.pitch};
      values.clear();
      for (int i = 0; i < n_obs; ++i) {
        Vec2 cur = world.obstacles[i].pos;
        double dx = cur.x - p.x, dy = cur.y - p.y;
        if (std::sqrt(dx * dx + dy * dy) > opt.sensing_range) continue;
        for (int s = 0; s < k; ++s) {
          const auto& h = hist[size_t(i) * k + s];
          feat::RelativeState rel;
          rel.rel_pos = {h.obs_pos.x - p.x, h.obs_pos.y - p.y};
          rel.rel_vel = {h.obs_vel.x - h.ego_vel.x, h.obs_vel.y - h.ego_vel.y};
          feat::step_features(rel, opt.scales, &window[size_t(s) * feat::kQ]);
        }
        values.push_back(ev.value(steps, ego_feat.data()));
      }
      // Sorting first makes the clipped product independent of the obstacle
      // column order, bit for bit.
      std::sort(values.begin(), values.end());
      grid.value[size_t(iy) * grid.nx + ix] = infer::aggregate(values, opt.b);
    }
  }
  return grid;
}

std::vector<std::array<double, 4>> contour_segments(const FrameGrid& grid,
                                                    double level) {
  std::vector<std::array<double, 4>> segs;
  auto node_x = [&](int ix) { return grid.x0 + ix * grid.pitch; };
  auto node_y = [&](int iy) { return grid.y0 + iy * grid.pitch; };
  auto lerp = [&](double a, double b) {
    double d = b - a;
    double t = d == 0.0 ? 0.5 : (level - a) / d;
    return std::clamp(t, 0.0, 1.0);
  };
  for (int iy = 0; iy + 1 < grid.ny; ++iy) {
    for (int ix = 0; ix + 1 < grid.nx; ++ix) {
      double v00 = grid.at(ix, iy), v10 = grid.at(ix + 1, iy);
      double v01 = grid.at(ix, iy + 1), v11 = grid.at(ix + 1, iy + 1);
      int mask = (v00 >= level ? 1 : 0) | (v10 >= level ? 2 : 0) |
                 (v11 >= level ? 4 : 0) | (v01 >= level ? 8 : 0);
      if (mask == 0 || mask == 15) continue;
      double x0 = node_x(ix), x1 = node_x(ix + 1);
      double y0 = node_y(iy), y1 = node_y(iy + 1);
      // Edge crossing points; b(ottom), t(op), l(eft), r(ight).
      double bx = x0 + lerp(v00, v10) * grid.pitch, by = y0;
      double tx = x0 + lerp(v01, v11) * grid.pitch, ty = y1;
      double lx = x0, ly = y0 + lerp(v00, v01) * grid.pitch;
      double rx = x1, ry = y0 + lerp(v10, v11) * grid.pitch;
      auto add = [&](double ax, double ay, double cx, double cy) {
        segs.push_back({ax, ay, cx, cy});
      };
      switch (mask) {
        case 1: case 14: add(lx, ly, bx, by); break;
        case 2: case 13: add(bx, by, rx, ry); break;
        case 3: case 12: add(lx, ly, rx, ry); break;
        case 4: case 11: add(tx, ty, rx, ry); break;
        case 6: case 9:  add(bx, by, tx, ty); break;
        case 7: case 8:  add(lx, ly, tx, ty); break;
        case 5: case 10: {
          double center = 0.25 * (v00 + v10 + v01 + v11);
          bool center_in = center >= level;
          if ((mask == 5) == center_in) {
            add(lx, ly, bx, by);
            add(tx, ty, rx, ry);
          } else {
            add(lx, ly, tx, ty);
            add(bx, by, rx, ry);
          }
          break;
        }
        default: break;
      }
    }
  }
  return segs;
}

std::string render_frame_svg(const FrameGrid& grid, const sim::Trajectory& traj,
                             const ReplayOptions& opt) {
  const double margin = 28;
  double world_w = (grid.nx - 1) * grid.pitch;
  double world_h = (grid.ny - 1) * grid.pitch;
  double scale = 640.0 / std::max(world_w, world_h);
  double w = world_w * scale + 2 * margin;
  double h = world_h * scale + 2 * margin;
  auto px = [&](double x) { return margin + (x - grid.x0) * scale; };
  auto py = [&](double y) { return margin + (grid.y0 + world_h - y) * scale; };

  svg::SvgBuilder b(w, h);
  b.rect(0, 0, w, h, "#ffffff");
  b.rect(px(grid.x0), py(grid.y0 + world_h), world_w * scale, world_h * scale,
         "none", "#888888");

  struct Level {
    double value;
    const char* color;
    double width;
  };
  const Level levels[] = {{0.0, "#d62728", 2.2},
                          {0.25, "#9ecae1", 1.2},
                          {0.5, "#6baed6", 1.2},
                          {0.75, "#3182bd", 1.2}};
  for (const auto& lv : levels) {
    for (const auto& s : contour_segments(grid, lv.value))
      b.line(px(s[0]), py(s[1]), px(s[2]), py(s[3]), lv.color, lv.width);
  }

  std::vector<double> path_x, path_y;
  for (const auto& fr : traj.frames) {
    path_x.push_back(px(fr.ego.pos().x));
    path_y.push_back(py(fr.ego.pos().y));
  }
  b.polyline(path_x, path_y, "#2ca02c", 1.6);

  const auto& world = traj.frames[grid.frame];
  for (const auto& o : world.obstacles)
    b.circle(px(o.pos.x), py(o.pos.y), opt.obstacle_radius * scale, "#555555");
  b.circle(px(world.ego.pos().x), py(world.ego.pos().y), 5.0, "#2ca02c",
           "#145214", 1.5);

  b.text(margin, 18,
         "frame " + std::to_string(grid.frame) + ", levels 0 / 0.25 / 0.5 / 0.75",
         12);
  return b.str();
}

}  // namespace sncbf::replay
