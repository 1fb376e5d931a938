#include "sncbf/dataset.hpp"

#include <algorithm>
#include <cmath>

#include "sncbf/errors.hpp"
#include "sncbf/rng.hpp"

namespace sncbf::train {

namespace {

enum Label : unsigned char { kExcluded = 0, kSafe = 1, kUnsafe = 2 };

Sample make_sample(const feat::RelativeState* win, int k,
                   const double* ego_feats, int ego_dim,
                   const feat::FeatureScales& scales) {
  Sample s;
  s.window.resize(static_cast<std::size_t>(k) * feat::kQ);
  for (int t = 0; t < k; ++t)
    feat::step_features(win[t], scales, &s.window[t * feat::kQ]);
  s.ego.assign(ego_feats, ego_feats + ego_dim);
  return s;
}

}  // namespace

void label_trajectory(const sim::Scenario& cfg,
                      const std::vector<sim::WorldState>& frames,
                      const DemoConfig& demo, DemoResult& out) {
  const int k = demo.k;
  const int ego_dim = feat::ego_feature_dim(cfg.ego_dynamics);
  out.data.k = k;
  out.data.ego_dim = ego_dim;
  out.scene.ego_dim = ego_dim;

  const int T = static_cast<int>(frames.size());
  if (T < 2) return;
  const int n_obs = static_cast<int>(frames[0].obstacles.size());
  if (n_obs == 0) return;

  // replay the episode through the tracker, keeping raw windows and
  // per-frame geometry
  feat::HistoryTracker tracker(k, demo.scales);
  tracker.reset(frames[0], cfg.dt);
  std::vector<feat::RelativeState> windows(
      static_cast<std::size_t>(T) * n_obs * k);
  std::vector<double> ego_feats(static_cast<std::size_t>(T) * ego_dim);
  std::vector<double> dist(static_cast<std::size_t>(T) * n_obs);
  std::vector<char> hit(static_cast<std::size_t>(T) * n_obs, 0);
  for (int t = 0; t < T; ++t) {
    if (t > 0) tracker.push(frames[t]);
    for (int i = 0; i < n_obs; ++i)
      std::copy(tracker.history(i), tracker.history(i) + k,
                &windows[(static_cast<std::size_t>(t) * n_obs + i) * k]);
    feat::ego_features(frames[t].ego, demo.scales, &ego_feats[t * ego_dim]);
    const Vec2 ep_pos = frames[t].ego.pos();
    for (int i = 0; i < n_obs; ++i) {
      const double d = (frames[t].obstacles[i].pos - ep_pos).norm();
      dist[static_cast<std::size_t>(t) * n_obs + i] = d;
      bool collided = d < cfg.collision_radius;
      if (t > 0) {
        const Vec2 em = (ep_pos + frames[t - 1].ego.pos()) * 0.5;
        const Vec2 om = (frames[t].obstacles[i].pos +
                         frames[t - 1].obstacles[i].pos) * 0.5;
        collided = collided || (em - om).norm() < cfg.collision_radius;
      }
      hit[static_cast<std::size_t>(t) * n_obs + i] = collided ? 1 : 0;
    }
  }

  // per-obstacle labels with the forward horizon
  std::vector<Label> label(static_cast<std::size_t>(T) * n_obs, kExcluded);
  for (int t = 0; t < T; ++t)
    for (int i = 0; i < n_obs; ++i) {
      const std::size_t at = static_cast<std::size_t>(t) * n_obs + i;
      if (hit[at]) {
        label[at] = kUnsafe;
        continue;
      }
      bool doomed = false;
      const int last = std::min(T - 1, t + demo.label_horizon);
      for (int s = t + 1; s <= last && !doomed; ++s)
        doomed = hit[static_cast<std::size_t>(s) * n_obs + i] != 0;
      label[at] = doomed ? kExcluded : kSafe;
    }

  auto sample_at = [&](int t, int i) {
    return make_sample(
        &windows[(static_cast<std::size_t>(t) * n_obs + i) * k], k,
        &ego_feats[t * ego_dim], ego_dim, demo.scales);
  };

  for (int t = 0; t < T; ++t)
    for (int i = 0; i < n_obs; ++i) {
      const std::size_t at = static_cast<std::size_t>(t) * n_obs + i;
      if (dist[at] > demo.sensing_range) continue;
      if (label[at] == kUnsafe) {
        out.data.unsafe.push_back(sample_at(t, i));
        continue;
      }
      if (label[at] == kExcluded) continue;
      // safe; the final frame has no successor context, so it is dropped
      if (t + 1 >= T) continue;
      out.data.safe.push_back(sample_at(t, i));
      SeedRecord seed;
      seed.ego_state = frames[t].ego;
      seed.goal = cfg.ego_goal;
      seed.window.assign(
          &windows[(static_cast<std::size_t>(t) * n_obs + i) * k],
          &windows[(static_cast<std::size_t>(t) * n_obs + i) * k] + k);
      seed.obs_next_pos = frames[t + 1].obstacles[i].pos;
      seed.obs_next_vel = frames[t + 1].obstacles[i].vel;
      out.seeds.push_back(std::move(seed));
      out.data.pairs.emplace_back(out.data.safe.back(), sample_at(t + 1, i));
    }

  // scene-level rows for the pooled model
  std::vector<char> scene_hit(static_cast<std::size_t>(T), 0);
  for (int t = 0; t < T; ++t) {
    bool any = false;
    for (int i = 0; i < n_obs; ++i)
      any = any || hit[static_cast<std::size_t>(t) * n_obs + i];
    scene_hit[t] = any ? 1 : 0;
  }
  std::vector<Label> scene_label(static_cast<std::size_t>(T), kExcluded);
  for (int t = 0; t < T; ++t) {
    if (scene_hit[t]) {
      scene_label[t] = kUnsafe;
      continue;
    }
    bool doomed = false;
    const int last = std::min(T - 1, t + demo.label_horizon);
    for (int s = t + 1; s <= last && !doomed; ++s)
      doomed = scene_hit[s] != 0;
    scene_label[t] = doomed ? kExcluded : kSafe;
  }

  auto scene_at = [&](int t) {
    SceneSample s;
    for (int i = 0; i < n_obs; ++i) {
      const std::size_t at = static_cast<std::size_t>(t) * n_obs + i;
      if (dist[at] > demo.sensing_range) continue;
      const feat::RelativeState& cur =
          windows[(static_cast<std::size_t>(t) * n_obs + i) * k + (k - 1)];
      double f[feat::kQ];
      feat::step_features(cur, demo.scales, f);
      s.rel.insert(s.rel.end(), f, f + feat::kQ);
      ++s.count;
    }
    s.ego.assign(&ego_feats[t * ego_dim], &ego_feats[t * ego_dim] + ego_dim);
    return s;
  };

  for (int t = 0; t < T; ++t) {
    SceneSample cur = scene_at(t);
    if (cur.count == 0) continue;  // max pooling needs at least one member
    if (scene_label[t] == kUnsafe) {
      out.scene.unsafe.push_back(std::move(cur));
      continue;
    }
    if (scene_label[t] == kExcluded) continue;
    if (t + 1 >= T) continue;
    SceneSample next = scene_at(t + 1);
    out.scene.safe.push_back(cur);
    if (next.count > 0)
      out.scene.pairs.emplace_back(std::move(cur), std::move(next));
  }
}

DemoResult collect_demonstrations(const sim::Scenario& cfg,
                                  sim::Controller& nominal,
                                  int n_trajectories, const DemoConfig& demo) {
  if (n_trajectories < 1)
    throw StageError("collect_demonstrations: no trajectories requested");

  DemoResult out;
  for (int traj = 0; traj < n_trajectories; ++traj) {
    sim::Scenario ep = cfg;
    ep.seed = mix_seed(cfg.seed, 0xDE30, static_cast<uint64_t>(traj));
    const sim::EpisodeResult res = sim::run_episode(ep, nominal);
    ++out.episodes;
    if (res.outcome == sim::Outcome::kCollision) ++out.collision_episodes;
    out.frames += static_cast<long>(res.trajectory.size());
    label_trajectory(ep, res.trajectory, demo, out);
  }

  if (demo.holdout_fraction > 0.0 && !out.data.pairs.empty()) {
    const int every = std::max(
        2, static_cast<int>(std::lround(1.0 / demo.holdout_fraction)));
    std::vector<std::pair<Sample, Sample>> kept;
    kept.reserve(out.data.pairs.size());
    for (std::size_t i = 0; i < out.data.pairs.size(); ++i) {
      if (static_cast<int>(i % every) == every - 1)
        out.holdout_pairs.push_back(std::move(out.data.pairs[i]));
      else
        kept.push_back(std::move(out.data.pairs[i]));
    }
    out.data.pairs = std::move(kept);
  }

  if (out.data.safe.empty() || out.data.unsafe.empty() ||
      out.data.pairs.empty() || out.scene.unsafe.empty())
    throw StageError(
        "collect_demonstrations: a label set came back empty; raise obstacle "
        "density or trajectory count");
  return out;
}

}  // namespace sncbf::train
