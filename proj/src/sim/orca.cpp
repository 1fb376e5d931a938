#include "sncbf/orca.hpp"

#include <algorithm>
#include <cmath>

namespace sncbf::sim {

namespace {

constexpr double kLpEpsilon = 1e-10;

// One-dimensional program along constraint `line_no`, restricted by the
// earlier lines and the speed circle. Returns false when infeasible.
bool linear_program1(const std::vector<OrcaLine>& lines, size_t line_no,
                     double radius, const Vec2& opt_vel, bool direction_opt,
                     Vec2& result) {
  const OrcaLine& ln = lines[line_no];
  const double dot_product = ln.point.dot(ln.dir);
  const double discriminant =
      dot_product * dot_product + radius * radius - ln.point.norm2();
  if (discriminant < 0.0) return false;

  const double sqrt_disc = std::sqrt(discriminant);
  double t_left = -dot_product - sqrt_disc;
  double t_right = -dot_product + sqrt_disc;

  for (size_t i = 0; i < line_no; ++i) {
    const double denominator = det(ln.dir, lines[i].dir);
    const double numerator = det(lines[i].dir, ln.point - lines[i].point);
    if (std::abs(denominator) <= kLpEpsilon) {
      if (numerator < 0.0) return false;
      continue;
    }
    const double t = numerator / denominator;
    if (denominator >= 0.0)
      t_right = std::min(t_right, t);
    else
      t_left = std::max(t_left, t);
    if (t_left > t_right) return false;
  }

  if (direction_opt) {
    if (opt_vel.dot(ln.dir) > 0.0)
      result = ln.point + t_right * ln.dir;
    else
      result = ln.point + t_left * ln.dir;
  } else {
    const double t = ln.dir.dot(opt_vel - ln.point);
    if (t < t_left)
      result = ln.point + t_left * ln.dir;
    else if (t > t_right)
      result = ln.point + t_right * ln.dir;
    else
      result = ln.point + t * ln.dir;
  }
  return true;
}

// Two-dimensional program; returns the index of the first failing line, or
// lines.size() on success.
size_t linear_program2(const std::vector<OrcaLine>& lines, double radius,
                       const Vec2& opt_vel, bool direction_opt, Vec2& result) {
  if (direction_opt) {
    result = opt_vel * radius;
  } else if (opt_vel.norm2() > radius * radius) {
    result = opt_vel * (radius / opt_vel.norm());
  } else {
    result = opt_vel;
  }

  for (size_t i = 0; i < lines.size(); ++i) {
    if (det(lines[i].dir, lines[i].point - result) > 0.0) {
      const Vec2 temp = result;
      if (!linear_program1(lines, i, radius, opt_vel, direction_opt, result)) {
        result = temp;
        return i;
      }
    }
  }
  return lines.size();
}

// Fallback for an infeasible program: minimize the worst constraint
// violation.
void linear_program3(const std::vector<OrcaLine>& lines, size_t begin_line,
                     double radius, Vec2& result) {
  double distance = 0.0;
  for (size_t i = begin_line; i < lines.size(); ++i) {
    if (det(lines[i].dir, lines[i].point - result) > distance) {
      std::vector<OrcaLine> proj_lines;
      for (size_t j = 0; j < i; ++j) {
        OrcaLine line;
        const double determinant = det(lines[i].dir, lines[j].dir);
        if (std::abs(determinant) <= kLpEpsilon) {
          if (lines[i].dir.dot(lines[j].dir) > 0.0) continue;
          line.point = 0.5 * (lines[i].point + lines[j].point);
        } else {
          line.point =
              lines[i].point +
              (det(lines[j].dir, lines[i].point - lines[j].point) /
               determinant) *
                  lines[i].dir;
        }
        Vec2 d = lines[j].dir - lines[i].dir;
        line.dir = d / d.norm();
        proj_lines.push_back(line);
      }

      const Vec2 temp = result;
      if (linear_program2(proj_lines, radius,
                          Vec2(-lines[i].dir.y, lines[i].dir.x), true,
                          result) < proj_lines.size()) {
        result = temp;
      }
      distance = det(lines[i].dir, lines[i].point - result);
    }
  }
}

}  // namespace

Vec2 preferred_velocity(const ObstacleState& a, double dt) {
  const Vec2 d = a.goal - a.pos;
  const double dist = d.norm();
  if (dist <= 1e-12) return {0.0, 0.0};
  if (dist <= a.pref_speed * dt) return d / dt;
  return d * (a.pref_speed / dist);
}

Vec2 orca_solve(const std::vector<OrcaLine>& lines, double max_speed,
                const Vec2& pref_vel, bool* feasible) {
  Vec2 result;
  const size_t fail = linear_program2(lines, max_speed, pref_vel, false,
                                      result);
  if (feasible != nullptr) *feasible = fail == lines.size();
  if (fail < lines.size())
    linear_program3(lines, fail, max_speed, result);
  return result;
}

std::vector<ObstacleState> orca_step(const std::vector<ObstacleState>& agents,
                                     double dt, const OrcaParams& params,
                                     OrcaStepInfo* info) {
  const size_t n = agents.size();
  const double inv_horizon = 1.0 / params.time_horizon;
  const double inv_dt = 1.0 / dt;
  if (info != nullptr) {
    info->lines.assign(n, {});
    info->feasible.assign(n, true);
    info->degenerate_pairs = 0;
  }

  std::vector<ObstacleState> next = agents;
  std::vector<std::pair<double, size_t>> neighbors;
  for (size_t i = 0; i < n; ++i) {
    const ObstacleState& self = agents[i];

    neighbors.clear();
    for (size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double dist_sq = (agents[j].pos - self.pos).norm2();
      if (dist_sq < params.neighbor_dist * params.neighbor_dist)
        neighbors.emplace_back(dist_sq, j);
    }
    std::sort(neighbors.begin(), neighbors.end());

    std::vector<OrcaLine> lines;
    lines.reserve(neighbors.size());
    for (const auto& [dist_sq_sorted, j] : neighbors) {
      const ObstacleState& other = agents[j];
      Vec2 relative_position = other.pos - self.pos;
      const Vec2 relative_velocity = self.vel - other.vel;
      const double combined_radius = self.radius + other.radius;
      const double combined_radius_sq = combined_radius * combined_radius;

      OrcaLine line;
      Vec2 u;

      double dist_sq = relative_position.norm2();
      if (dist_sq > combined_radius_sq) {
        Vec2 w = relative_velocity - inv_horizon * relative_position;
        // Exactly aligned approach: rotate the relative position a hair so
        // the two agents pick complementary legs.
        const double scale =
            std::max(1.0, relative_position.norm() * w.norm());
        if (std::abs(det(relative_position, w)) <= 1e-12 * scale) {
          relative_position =
              rotate(relative_position, i < j ? 1e-6 : -1e-6);
          dist_sq = relative_position.norm2();
          w = relative_velocity - inv_horizon * relative_position;
        }
        const double w_length_sq = w.norm2();
        const double dot_product = w.dot(relative_position);
        if (dot_product < 0.0 &&
            dot_product * dot_product > combined_radius_sq * w_length_sq) {
          // Project on the cut-off circle.
          const double w_length = std::sqrt(w_length_sq);
          const Vec2 unit_w = w / w_length;
          line.dir = Vec2(unit_w.y, -unit_w.x);
          u = (combined_radius * inv_horizon - w_length) * unit_w;
        } else {
          // Project on the nearer leg.
          const double leg = std::sqrt(dist_sq - combined_radius_sq);
          if (det(relative_position, w) > 0.0) {
            line.dir = Vec2(relative_position.x * leg -
                                relative_position.y * combined_radius,
                            relative_position.x * combined_radius +
                                relative_position.y * leg) /
                       dist_sq;
          } else {
            line.dir = -(Vec2(relative_position.x * leg +
                                  relative_position.y * combined_radius,
                              -relative_position.x * combined_radius +
                                  relative_position.y * leg) /
                         dist_sq);
          }
          u = (relative_velocity.dot(line.dir)) * line.dir -
              relative_velocity;
        }
      } else {
        // Already overlapping: push apart within one time step.
        const Vec2 w = relative_velocity - inv_dt * relative_position;
        const double w_length = w.norm();
        if (w_length < 1e-12) {
          // Coincident states carry no usable geometry; skip the pair.
          if (info != nullptr && i < j) ++info->degenerate_pairs;
          continue;
        }
        const Vec2 unit_w = w / w_length;
        line.dir = Vec2(unit_w.y, -unit_w.x);
        u = (combined_radius * inv_dt - w_length) * unit_w;
      }

      line.point = self.vel + 0.5 * u;
      lines.push_back(line);
    }

    bool feasible = true;
    const Vec2 pref = preferred_velocity(self, dt);
    const Vec2 new_vel = orca_solve(lines, params.max_speed, pref, &feasible);

    if (info != nullptr) {
      info->lines[i] = std::move(lines);
      info->feasible[i] = feasible;
    }
    next[i].vel = new_vel;
    next[i].pos = self.pos + new_vel * dt;
  }
  return next;
}

}  // namespace sncbf::sim
