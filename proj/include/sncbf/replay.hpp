#pragma once

#include <array>
#include <string>
#include <vector>

#include "sncbf/barrier.hpp"
#include "sncbf/episode.hpp"
#include "sncbf/features.hpp"

namespace sncbf::replay {

struct ReplayOptions {
  double pitch = 0.1;        // meters between grid nodes
  long max_cells = 4000000;  // refuse larger grids, with a size hint
  double sensing_range = 5.0;
  double b = 0.5;            // aggregation clip
  double dt = 0.1;           // frame spacing; the CSV stores no timestamps
  double obstacle_radius = 0.3;  // drawn size; the CSV stores no radius
  feat::FeatureScales scales;
};

// Aggregated barrier values over a position grid for one trajectory frame.
// Node (ix, iy) sits at (x0 + ix * pitch, y0 + iy * pitch); values are
// row-major, iy * nx + ix.
struct FrameGrid {
  int frame = 0;
  double x0 = 0, y0 = 0, pitch = 0.1;
  int nx = 0, ny = 0;
  std::vector<double> value;

  double at(int ix, int iy) const { return value[size_t(iy) * nx + ix]; }
};

// Evaluates the clipped barrier product with the ego placed at every grid
// node. Obstacle history windows are rebuilt from the recorded frames
// relative to the node; the ego's non-positional features stay at their
// frame values. Per-obstacle values are sorted before aggregation, so the
// grid is invariant to obstacle column order. Throws ConfigError when the
// frame index is out of range or the grid exceeds max_cells.
FrameGrid eval_frame_grid(const barrier::BarrierNet& net,
                          const sim::Trajectory& traj, int frame,
                          const ReplayOptions& opt);

// Marching-squares segments (x1, y1, x2, y2) of one iso-level.
std::vector<std::array<double, 4>> contour_segments(const FrameGrid& grid,
                                                    double level);

// One frame as SVG: level sets {0, 0.25, 0.5, 0.75}, obstacles, the full ego
// path, and the ego position at the frame.
std::string render_frame_svg(const FrameGrid& grid, const sim::Trajectory& traj,
                             const ReplayOptions& opt);

// Default frame picks when the config lists none: up to four spread over the
// trajectory, always including the last frame.
std::vector<int> default_frames(int n_frames);

}  // namespace sncbf::replay
