#include "sncbf/decomp.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "sncbf/csv.hpp"
#include "sncbf/errors.hpp"
#include "sncbf/graph.hpp"
#include "sncbf/optim.hpp"
#include "sncbf/orca.hpp"
#include "sncbf/rng.hpp"

namespace sncbf::decomp {

namespace {

constexpr uint64_t kRolloutStream = 0xDEC0;
constexpr uint64_t kTrainStream = 0x7EA4;
constexpr uint64_t kEvalStream = 0xD9C3;

constexpr int kHidden = 64;

int feat_width(PredictorKind kind) {
  return kind == PredictorKind::kICSM ? 2 * feat::kQ : feat::kQ;
}

dc::MlpSpec head_spec_seq() { return {kHidden, {kHidden}, 2, dc::Act::kRelu}; }

dc::MlpSpec emb_spec(int k) {
  return {k * feat::kQ, {kHidden}, kHidden, dc::Act::kRelu};
}

dc::MlpSpec head_spec_set(int k) {
  return {k * feat::kQ + kHidden, {kHidden}, 2, dc::Act::kRelu};
}

// column tensors for the listed samples
void fill_steps(const DecompData& data, const std::vector<int>& cols,
                std::vector<dc::Tensor>& steps) {
  const int k = data.k;
  const int f = data.feat_dim;
  const int n = static_cast<int>(cols.size());
  steps.assign(static_cast<std::size_t>(k), dc::Tensor::zeros({f, n}));
  for (int j = 0; j < n; ++j) {
    const double* w = data.window(cols[j]);
    for (int t = 0; t < k; ++t)
      for (int r = 0; r < f; ++r) steps[t].at(r, j) = w[t * f + r];
  }
}

dc::Tensor flat_windows(const DecompData& data, const std::vector<int>& cols) {
  const int kf = data.k * data.feat_dim;
  const int n = static_cast<int>(cols.size());
  dc::Tensor win = dc::Tensor::zeros({kf, n});
  for (int j = 0; j < n; ++j) {
    const double* w = data.window(cols[j]);
    for (int r = 0; r < kf; ++r) win.at(r, j) = w[r];
  }
  return win;
}

dc::Tensor target_tensor(const DecompData& data, const std::vector<int>& cols) {
  const int n = static_cast<int>(cols.size());
  dc::Tensor y = dc::Tensor::zeros({2, n});
  for (int j = 0; j < n; ++j) {
    const double* t = data.target(cols[j]);
    y.at(0, j) = t[0];
    y.at(1, j) = t[1];
  }
  return y;
}

dc::Graph::Id seq_forward(dc::Graph& g, const PredictorModel& m,
                          const DecompData& data,
                          const std::vector<int>& cols) {
  std::vector<dc::Tensor> step_vals;
  fill_steps(data, cols, step_vals);
  std::vector<dc::Graph::Id> steps;
  steps.reserve(step_vals.size());
  for (dc::Tensor& t : step_vals) steps.push_back(g.input(std::move(t)));
  const dc::Graph::Id h = dc::lstm_graph(g, m.lstm, steps);
  return dc::mlp_graph(g, m.head, h);
}

// scene_cols: sample columns of each scene, concatenated in scene order
dc::Graph::Id set_forward(dc::Graph& g, const PredictorModel& m,
                          const DecompData& data,
                          const std::vector<int>& scenes,
                          std::vector<int>& cols) {
  cols.clear();
  std::vector<int> widths;
  widths.reserve(scenes.size());
  for (const int sc : scenes) {
    const int lo = data.scene_offsets[sc];
    const int hi = data.scene_offsets[sc + 1];
    widths.push_back(hi - lo);
    for (int i = lo; i < hi; ++i) cols.push_back(i);
  }
  const int n = static_cast<int>(cols.size());
  const int s = static_cast<int>(scenes.size());
  const dc::Graph::Id win = g.input(flat_windows(data, cols));
  const dc::Graph::Id embedded = dc::mlp_graph(g, m.emb, win);

  // mean pooling per scene, then broadcast back to the scene's columns
  dc::Tensor pool = dc::Tensor::zeros({n, s});
  dc::Tensor spread = dc::Tensor::zeros({s, n});
  int at = 0;
  for (int sc = 0; sc < s; ++sc) {
    for (int i = 0; i < widths[sc]; ++i, ++at) {
      pool.at(at, sc) = 1.0 / widths[sc];
      spread.at(sc, at) = 1.0;
    }
  }
  const dc::Graph::Id ctx = g.affine(embedded, g.input(std::move(pool)), -1);
  const dc::Graph::Id ctx_cols =
      g.affine(ctx, g.input(std::move(spread)), -1);
  const dc::Graph::Id head_in = g.concat_rows({win, ctx_cols});
  return dc::mlp_graph(g, m.head, head_in);
}

// scene indices whose samples feed a forward pass for this kind
std::vector<int> scene_range(int scenes) {
  std::vector<int> all(static_cast<std::size_t>(scenes));
  for (int i = 0; i < scenes; ++i) all[i] = i;
  return all;
}

void check_data(const PredictorModel& m, const DecompData& data) {
  if (data.feat_dim != m.feat_dim)
    throw StageError("predictor/data feature width mismatch");
  if (data.k != m.k) throw StageError("predictor/data window length mismatch");
}

}  // namespace

const char* to_string(PredictorKind kind) {
  switch (kind) {
    case PredictorKind::kCoSM: return "cosm";
    case PredictorKind::kCSM: return "csm";
    case PredictorKind::kICSM: return "icsm";
  }
  return "?";
}

std::vector<std::vector<sim::ObstacleState>> crowd_rollout(
    const sim::Scenario& cfg, int horizon) {
  const std::vector<std::string> problems = cfg.validate();
  if (!problems.empty()) throw ConfigError(problems.front());
  std::vector<std::vector<sim::ObstacleState>> frames;
  if (horizon <= 0) return frames;
  frames.reserve(static_cast<std::size_t>(horizon));
  frames.push_back(sim::spawn_scenario(cfg).obstacles);
  Rng goal_rng(mix_seed(cfg.seed, 0xB0A7));
  for (int t = 1; t < horizon; ++t) {
    std::vector<sim::ObstacleState> next = frames.back();
    for (sim::ObstacleState& o : next)
      if ((o.pos - o.goal).norm() <= cfg.env.goal_reach_dist)
        o.goal = sim::sample_obstacle_goal(cfg, goal_rng);
    frames.push_back(sim::orca_step(next, cfg.dt, cfg.env.orca));
  }
  return frames;
}

DecompData extract_pairs(
    const std::vector<std::vector<sim::ObstacleState>>& frames, int k,
    bool interaction, double dt, const feat::FeatureScales& scales) {
  DecompData out;
  out.k = k;
  out.feat_dim = interaction ? 2 * feat::kQ : feat::kQ;
  out.dt = dt;
  out.scene_offsets.push_back(0);
  const int T = static_cast<int>(frames.size());
  if (T < k + 1 || frames[0].empty()) return out;
  const int m = static_cast<int>(frames[0].size());

  for (int t = k - 1; t + 1 < T; ++t) {
    for (int i = 0; i < m; ++i) {
      const Vec2 cur = frames[t][i].pos;
      for (int s = 0; s < k; ++s) {
        const sim::ObstacleState& me = frames[t - k + 1 + s][i];
        out.windows.push_back((me.pos.x - cur.x) / scales.pos);
        out.windows.push_back((me.pos.y - cur.y) / scales.pos);
        out.windows.push_back(me.vel.x / scales.vel);
        out.windows.push_back(me.vel.y / scales.vel);
        if (!interaction) continue;
        int best = -1;
        double best_d = 1e300;
        for (int j = 0; j < m; ++j) {
          if (j == i) continue;
          const double d = (frames[t - k + 1 + s][j].pos - me.pos).norm();
          if (d < best_d) {
            best_d = d;
            best = j;
          }
        }
        if (best < 0) {
          out.windows.insert(out.windows.end(), feat::kQ, 0.0);
        } else {
          const sim::ObstacleState& nb = frames[t - k + 1 + s][best];
          out.windows.push_back((nb.pos.x - me.pos.x) / scales.pos);
          out.windows.push_back((nb.pos.y - me.pos.y) / scales.pos);
          out.windows.push_back((nb.vel.x - me.vel.x) / scales.vel);
          out.windows.push_back((nb.vel.y - me.vel.y) / scales.vel);
        }
      }
      out.targets.push_back((frames[t + 1][i].pos.x - cur.x) / dt);
      out.targets.push_back((frames[t + 1][i].pos.y - cur.y) / dt);
    }
    out.scene_offsets.push_back(out.size());
  }
  return out;
}

void append_data(DecompData& dst, const DecompData& src) {
  dst.k = src.k;
  dst.feat_dim = src.feat_dim;
  dst.dt = src.dt;
  if (dst.scene_offsets.empty()) dst.scene_offsets.push_back(0);
  const int base = dst.size();
  dst.windows.insert(dst.windows.end(), src.windows.begin(),
                     src.windows.end());
  dst.targets.insert(dst.targets.end(), src.targets.begin(),
                     src.targets.end());
  for (std::size_t j = 1; j < src.scene_offsets.size(); ++j)
    dst.scene_offsets.push_back(base + src.scene_offsets[j]);
}

namespace {

sim::Scenario rollout_scenario(const RolloutConfig& cfg, int density,
                               uint64_t seed) {
  sim::Scenario sc;
  sc.arena_half_extent = cfg.arena_half_extent;
  sc.obstacle_count = density;
  sc.dt = cfg.dt;
  sc.seed = seed;
  return sc;
}

}  // namespace

DecompData build_training_set(const RolloutConfig& cfg) {
  if (cfg.n_rollouts < 1)
    throw StageError("build_training_set: need at least one rollout");
  DecompData all;
  for (int r = 0; r < cfg.n_rollouts; ++r) {
    const sim::Scenario sc = rollout_scenario(
        cfg, cfg.density, mix_seed(cfg.seed, kRolloutStream, r));
    const std::vector<std::vector<sim::ObstacleState>> frames =
        crowd_rollout(sc, cfg.horizon);
    append_data(all, extract_pairs(frames, cfg.k, cfg.interaction, cfg.dt,
                                   cfg.scales));
  }
  return all;
}

PredictorModel predictor_init(PredictorKind kind, int k, uint64_t seed) {
  PredictorModel m;
  m.kind = kind;
  m.k = k;
  m.feat_dim = feat_width(kind);
  Rng rng(mix_seed(seed, 0x9D0D));
  if (kind == PredictorKind::kCoSM) {
    dc::mlp_init(emb_spec(k), "emb", rng, m.params);
    dc::mlp_init(head_spec_set(k), "head", rng, m.params);
  } else {
    dc::lstm_init({m.feat_dim, kHidden}, "lstm", rng, m.params);
    dc::mlp_init(head_spec_seq(), "head", rng, m.params);
  }
  return predictor_from_params(kind, k, std::move(m.params));
}

PredictorModel predictor_from_params(PredictorKind kind, int k,
                                     dc::ParamBundle params) {
  PredictorModel m;
  m.kind = kind;
  m.k = k;
  m.feat_dim = feat_width(kind);
  m.params = std::move(params);
  if (kind == PredictorKind::kCoSM) {
    m.emb = dc::mlp_bind(emb_spec(k), "emb", m.params);
    m.head = dc::mlp_bind(head_spec_set(k), "head", m.params);
  } else {
    m.lstm = dc::lstm_bind({m.feat_dim, kHidden}, "lstm", m.params);
    m.head = dc::mlp_bind(head_spec_seq(), "head", m.params);
  }
  return m;
}

namespace {

double forward_mse(const PredictorModel& m, const DecompData& data,
                   const std::vector<int>& scenes) {
  double sq_sum = 0.0;
  long elems = 0;
  constexpr int kChunk = 64;  // scenes per forward
  for (std::size_t base = 0; base < scenes.size(); base += kChunk) {
    const std::vector<int> part(
        scenes.begin() + base,
        scenes.begin() + std::min(scenes.size(), base + kChunk));
    dc::Graph g;
    std::vector<int> cols;
    dc::Graph::Id pred;
    if (m.kind == PredictorKind::kCoSM) {
      pred = set_forward(g, m, data, part, cols);
    } else {
      for (const int sc : part)
        for (int i = data.scene_offsets[sc]; i < data.scene_offsets[sc + 1];
             ++i)
          cols.push_back(i);
      if (cols.empty()) continue;
      pred = seq_forward(g, m, data, cols);
    }
    const dc::Tensor& v = g.value(pred);
    for (std::size_t j = 0; j < cols.size(); ++j) {
      const double* t = data.target(cols[j]);
      const double ex = v.at(0, static_cast<int>(j)) - t[0];
      const double ey = v.at(1, static_cast<int>(j)) - t[1];
      sq_sum += ex * ex + ey * ey;
      elems += 2;
    }
  }
  return elems > 0 ? sq_sum / static_cast<double>(elems) : 0.0;
}

}  // namespace

TrainedPredictor train_predictor(PredictorKind kind, const DecompData& data,
                                 const PredictorTrainConfig& cfg) {
  if (data.size() < 1 || data.scenes() < 1)
    throw StageError("train_predictor: empty dataset");
  TrainedPredictor out;
  out.model = predictor_init(kind, data.k, cfg.seed);
  check_data(out.model, data);

  // scene-stride holdout keeps whole timesteps out of training
  const int stride =
      cfg.holdout_fraction > 0.0
          ? std::max<int>(2, std::lround(1.0 / cfg.holdout_fraction))
          : 0;
  std::vector<int> train_scenes, hold_scenes;
  for (int sc = 0; sc < data.scenes(); ++sc) {
    if (stride > 0 && sc % stride == stride - 1)
      hold_scenes.push_back(sc);
    else
      train_scenes.push_back(sc);
  }
  if (train_scenes.empty())
    throw StageError("train_predictor: no scenes left to train on");
  std::vector<int> train_samples;
  for (const int sc : train_scenes)
    for (int i = data.scene_offsets[sc]; i < data.scene_offsets[sc + 1]; ++i)
      train_samples.push_back(i);
  if (train_samples.empty())
    throw StageError("train_predictor: no samples left to train on");

  Rng rng(mix_seed(cfg.seed, kTrainStream));
  dc::Adam opt(cfg.lr);
  out.curve.reserve(static_cast<std::size_t>(std::max(0, cfg.iterations)));
  for (int it = 0; it < cfg.iterations; ++it) {
    dc::Graph g;
    std::vector<int> cols;
    dc::Graph::Id pred;
    if (kind == PredictorKind::kCoSM) {
      std::vector<int> scenes;
      int samples = 0;
      while (samples < cfg.batch) {
        const int sc =
            train_scenes[rng.uniform_int(static_cast<int>(train_scenes.size()))];
        scenes.push_back(sc);
        samples += data.scene_offsets[sc + 1] - data.scene_offsets[sc];
      }
      pred = set_forward(g, out.model, data, scenes, cols);
    } else {
      cols.resize(static_cast<std::size_t>(cfg.batch));
      for (int& c : cols)
        c = train_samples[rng.uniform_int(
            static_cast<int>(train_samples.size()))];
      pred = seq_forward(g, out.model, data, cols);
    }
    const dc::Graph::Id y = g.input(target_tensor(data, cols));
    const dc::Graph::Id loss = g.mean_sq(g.sub(pred, y));
    const double v = g.scalar(loss);
    if (!std::isfinite(v))
      throw StageError("train_predictor: non-finite loss at iteration " +
                       std::to_string(it));
    out.curve.push_back(v);
    out.model.params.zero_grads();
    g.backward(loss);
    opt.step(out.model.params);
  }

  out.holdout_mse = forward_mse(out.model, data, hold_scenes);
  return out;
}

std::vector<double> predict_all(const PredictorModel& model,
                                const DecompData& data) {
  const PredictorModel& m = model;
  check_data(m, data);
  std::vector<double> out(static_cast<std::size_t>(data.size()) * 2, 0.0);
  constexpr int kChunk = 64;  // scenes per forward
  const std::vector<int> all = scene_range(data.scenes());
  for (std::size_t base = 0; base < all.size(); base += kChunk) {
    const std::vector<int> part(
        all.begin() + base, all.begin() + std::min(all.size(), base + kChunk));
    dc::Graph g;
    std::vector<int> cols;
    dc::Graph::Id pred;
    if (m.kind == PredictorKind::kCoSM) {
      pred = set_forward(g, m, data, part, cols);
    } else {
      for (const int sc : part)
        for (int i = data.scene_offsets[sc]; i < data.scene_offsets[sc + 1];
             ++i)
          cols.push_back(i);
      if (cols.empty()) continue;
      pred = seq_forward(g, m, data, cols);
    }
    const dc::Tensor& v = g.value(pred);
    for (std::size_t j = 0; j < cols.size(); ++j) {
      out[static_cast<std::size_t>(cols[j]) * 2] =
          v.at(0, static_cast<int>(j));
      out[static_cast<std::size_t>(cols[j]) * 2 + 1] =
          v.at(1, static_cast<int>(j));
    }
  }
  return out;
}

double eps_quantile(std::vector<double> maxnorm_errors, double q) {
  if (maxnorm_errors.empty()) return 0.0;
  std::sort(maxnorm_errors.begin(), maxnorm_errors.end());
  const int n = static_cast<int>(maxnorm_errors.size());
  int rank = static_cast<int>(std::ceil(q * n));
  rank = std::max(1, std::min(n, rank));
  return maxnorm_errors[static_cast<std::size_t>(rank - 1)];
}

DecompEvalRow score_predictions(PredictorKind kind, int density,
                                const std::vector<double>& pred,
                                const DecompData& data) {
  if (pred.size() != static_cast<std::size_t>(data.size()) * 2)
    throw StageError("score_predictions: prediction/sample count mismatch");
  DecompEvalRow row;
  row.kind = kind;
  row.density = density;
  std::vector<double> maxnorms;
  maxnorms.reserve(static_cast<std::size_t>(data.size()));
  double l2_sum = 0.0;
  for (int i = 0; i < data.size(); ++i) {
    // predicted next-position error in meters
    const double ex =
        (pred[static_cast<std::size_t>(i) * 2] - data.target(i)[0]) * data.dt;
    const double ey =
        (pred[static_cast<std::size_t>(i) * 2 + 1] - data.target(i)[1]) *
        data.dt;
    l2_sum += std::hypot(ex, ey);
    maxnorms.push_back(std::max(std::abs(ex), std::abs(ey)));
  }
  const double n = std::max(1, data.size());
  row.mean_l2 = l2_sum / n;
  double mn_sum = 0.0;
  for (const double v : maxnorms) mn_sum += v;
  row.mean_maxnorm = mn_sum / n;
  row.eps95 = eps_quantile(maxnorms, 0.95);
  return row;
}

DecompEvalReport evaluate_generalization(
    const std::vector<PredictorModel>& models,
    const std::vector<int>& densities, int episodes,
    const RolloutConfig& base) {
  if (episodes < 1)
    throw StageError("evaluate_generalization: need at least one episode");
  // shared crowds: every kind is scored on identical rollouts per density
  std::vector<DecompData> plain(densities.size());
  std::vector<DecompData> inter(densities.size());
  for (std::size_t di = 0; di < densities.size(); ++di) {
    for (int e = 0; e < episodes; ++e) {
      const sim::Scenario sc = rollout_scenario(
          base, densities[di],
          mix_seed(base.seed, kEvalStream,
                   static_cast<uint64_t>(densities[di]), e));
      const std::vector<std::vector<sim::ObstacleState>> frames =
          crowd_rollout(sc, base.horizon);
      append_data(plain[di],
                  extract_pairs(frames, base.k, false, base.dt, base.scales));
      append_data(inter[di],
                  extract_pairs(frames, base.k, true, base.dt, base.scales));
    }
  }

  DecompEvalReport report;
  for (const PredictorModel& m : models) {
    for (std::size_t di = 0; di < densities.size(); ++di) {
      const DecompData& data =
          m.kind == PredictorKind::kICSM ? inter[di] : plain[di];
      const std::vector<double> pred = predict_all(m, data);
      report.rows.push_back(
          score_predictions(m.kind, densities[di], pred, data));
    }
  }
  return report;
}

void write_decomp_csv(const DecompEvalReport& report,
                      const std::string& path) {
  std::string text = "kind,density,mean_l2,mean_maxnorm,eps95\n";
  for (const DecompEvalRow& r : report.rows) {
    text += join_csv({to_string(r.kind), std::to_string(r.density),
                           fmt_g9(r.mean_l2), fmt_g9(r.mean_maxnorm),
                           fmt_g9(r.eps95)});
    text += "\n";
  }
  write_file(path, text);
}

}  // namespace sncbf::decomp
