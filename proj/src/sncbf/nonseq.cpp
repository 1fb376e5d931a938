#include "sncbf/nonseq.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sncbf/errors.hpp"
#include "sncbf/optim.hpp"

namespace sncbf::nonseq {

namespace {

constexpr uint64_t kBatchStream = 0x7EA3;

void bind_refs(NonseqNet& net) {
  net.enc = dc::mlp_bind(net.spec.enc_spec(), "enc", net.params);
  net.ego_enc = dc::mlp_bind(net.spec.ego_spec(), "ego", net.params);
  net.head = dc::mlp_bind(net.spec.head_spec(), "head", net.params);
}

void require_scenes(const train::SceneDataset& data) {
  if (data.safe.empty() || data.unsafe.empty() || data.pairs.empty())
    throw StageError("scene training needs safe, unsafe and pair scenes");
}

// Appends one scene's obstacle columns and ego column at scene index `g`.
void push_scene(const train::SceneSample& s, int g, int q,
                std::vector<double>& obs_cols, std::vector<int>& groups,
                std::vector<const double*>& ego_cols) {
  if (s.count <= 0)
    throw std::invalid_argument("scene batch: scene without obstacles");
  for (int i = 0; i < s.count; ++i) {
    for (int r = 0; r < q; ++r)
      obs_cols.push_back(s.rel[static_cast<std::size_t>(i) * q + r]);
    groups.push_back(g);
  }
  ego_cols.push_back(s.ego.data());
}

SceneBatch assemble(const std::vector<const train::SceneSample*>& scenes,
                    int n_safe, int n_unsafe, int n_pairs, int q,
                    int ego_dim) {
  SceneBatch batch;
  batch.n_safe = n_safe;
  batch.n_unsafe = n_unsafe;
  batch.n_pairs = n_pairs;
  std::vector<double> obs_cols;  // column-major staging
  std::vector<const double*> ego_cols;
  for (std::size_t j = 0; j < scenes.size(); ++j)
    push_scene(*scenes[j], static_cast<int>(j), q, obs_cols,
               batch.group_of_col, ego_cols);
  const int total = static_cast<int>(batch.group_of_col.size());
  batch.obs = dc::Tensor::zeros({q, total});
  for (int j = 0; j < total; ++j)
    for (int r = 0; r < q; ++r)
      batch.obs.at(r, j) = obs_cols[static_cast<std::size_t>(j) * q + r];
  const int n = static_cast<int>(scenes.size());
  batch.ego = dc::Tensor::zeros({ego_dim, n});
  for (int j = 0; j < n; ++j)
    for (int r = 0; r < ego_dim; ++r) batch.ego.at(r, j) = ego_cols[j][r];
  return batch;
}

dc::Graph::Id forward_scenes(dc::Graph& g, NonseqNet& net,
                             const SceneBatch& batch) {
  dc::Graph::Id codes = dc::mlp_graph(g, net.enc, g.input(batch.obs));
  dc::Graph::Id pooled =
      g.segment_max_cols(codes, batch.group_of_col, batch.n_scenes());
  dc::Graph::Id e = dc::mlp_graph(g, net.ego_enc, g.input(batch.ego));
  return dc::mlp_graph(g, net.head, g.concat_rows({pooled, e}));
}

std::vector<double> scene_values(
    const NonseqNet& net,
    const std::vector<const train::SceneSample*>& scenes) {
  std::vector<double> out(scenes.size());
  std::vector<double> scratch;
  for (std::size_t i = 0; i < scenes.size(); ++i)
    out[i] = scene_value(net, scenes[i]->rel.data(), scenes[i]->count,
                         scenes[i]->ego.data(), scratch);
  return out;
}

std::vector<const train::SceneSample*> pointers(
    const std::vector<train::SceneSample>& v) {
  std::vector<const train::SceneSample*> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = &v[i];
  return out;
}

}  // namespace

NonseqNet nonseq_init(const NonseqSpec& spec, uint64_t seed) {
  NonseqNet net;
  net.spec = spec;
  Rng rng(seed);
  dc::mlp_init(spec.enc_spec(), "enc", rng, net.params);
  dc::mlp_init(spec.ego_spec(), "ego", rng, net.params);
  dc::mlp_init(spec.head_spec(), "head", rng, net.params);
  bind_refs(net);
  return net;
}

NonseqNet nonseq_from_params(const NonseqSpec& spec, dc::ParamBundle params) {
  NonseqNet net;
  net.spec = spec;
  net.params = std::move(params);
  bind_refs(net);
  return net;
}

SceneLossNodes build_scene_loss(dc::Graph& g, NonseqNet& net,
                                const SceneBatch& batch) {
  if (batch.n_scenes() <= 0)
    throw std::invalid_argument("build_scene_loss: empty batch");
  const double gamma = net.spec.gamma;
  const double kappa = net.spec.kappa;
  const double dt = net.spec.dt;

  dc::Graph::Id b = forward_scenes(g, net, batch);

  SceneLossNodes out;
  int c0 = 0;
  if (batch.n_safe > 0) {
    out.term_safe =
        g.mean_hinge(g.slice_cols(b, c0, batch.n_safe), gamma, -1.0);
  }
  c0 += batch.n_safe;
  if (batch.n_unsafe > 0) {
    out.term_unsafe =
        g.mean_hinge(g.slice_cols(b, c0, batch.n_unsafe), gamma, +1.0);
  }
  c0 += batch.n_unsafe;
  if (batch.n_pairs > 0) {
    dc::Graph::Id bnow = g.slice_cols(b, c0, batch.n_pairs);
    dc::Graph::Id bnext = g.slice_cols(b, c0 + batch.n_pairs, batch.n_pairs);
    dc::Graph::Id arg = g.lincomb(-1.0 / dt, bnext, 1.0 / dt - kappa, bnow);
    out.term_invariance = g.mean_hinge(arg, gamma, +1.0);
  }

  dc::Graph::Id acc = -1;
  for (dc::Graph::Id t :
       {out.term_safe, out.term_unsafe, out.term_invariance}) {
    if (t < 0) continue;
    acc = acc < 0 ? t : g.add(acc, t);
  }
  out.loss = acc;
  return out;
}

double scene_value(const NonseqNet& net, const double* rel, int count,
                   const double* ego, std::vector<double>& scratch) {
  if (count <= 0)
    throw std::invalid_argument("scene_value: no obstacles to pool");
  const int w = net.spec.enc_out;
  std::vector<double> pooled(static_cast<std::size_t>(w), -1e300);
  std::vector<double> code(static_cast<std::size_t>(w));
  for (int i = 0; i < count; ++i) {
    dc::mlp_forward(net.enc, rel + static_cast<std::size_t>(i) * net.spec.q,
                    code.data(), scratch);
    for (int r = 0; r < w; ++r) pooled[r] = std::max(pooled[r], code[r]);
  }
  std::vector<double> head_in(static_cast<std::size_t>(w + net.spec.ego_out));
  std::copy(pooled.begin(), pooled.end(), head_in.begin());
  dc::mlp_forward(net.ego_enc, ego, head_in.data() + w, scratch);
  double out = 0.0;
  dc::mlp_forward(net.head, head_in.data(), &out, scratch);
  return out;
}

double scene_value(const NonseqNet& net, const train::SceneSample& s) {
  std::vector<double> scratch;
  return scene_value(net, s.rel.data(), s.count, s.ego.data(), scratch);
}

std::vector<double> train_nonseq(NonseqNet& net,
                                 const train::SceneDataset& data,
                                 const train::TrainConfig& cfg) {
  require_scenes(data);
  std::vector<double> curve;
  if (cfg.initial_iterations <= 0) return curve;
  curve.reserve(static_cast<std::size_t>(cfg.initial_iterations));
  Rng rng(mix_seed(cfg.seed, kBatchStream));
  dc::Adam opt(cfg.lr);
  for (int it = 0; it < cfg.initial_iterations; ++it) {
    std::vector<const train::SceneSample*> scenes;
    scenes.reserve(static_cast<std::size_t>(cfg.batch_safe + cfg.batch_unsafe +
                                            2 * cfg.batch_pairs));
    for (int i = 0; i < cfg.batch_safe; ++i)
      scenes.push_back(&data.safe[rng.uniform_int(
          static_cast<int>(data.safe.size()))]);
    for (int i = 0; i < cfg.batch_unsafe; ++i)
      scenes.push_back(&data.unsafe[rng.uniform_int(
          static_cast<int>(data.unsafe.size()))]);
    std::vector<int> idx(static_cast<std::size_t>(cfg.batch_pairs));
    for (int i = 0; i < cfg.batch_pairs; ++i)
      idx[i] = rng.uniform_int(static_cast<int>(data.pairs.size()));
    for (int i : idx) scenes.push_back(&data.pairs[i].first);
    for (int i : idx) scenes.push_back(&data.pairs[i].second);

    const SceneBatch batch =
        assemble(scenes, cfg.batch_safe, cfg.batch_unsafe, cfg.batch_pairs,
                 net.spec.q, net.spec.ego_dim);
    dc::Graph g;
    const SceneLossNodes nodes = build_scene_loss(g, net, batch);
    const double loss = g.scalar(nodes.loss);
    if (!std::isfinite(loss))
      throw StageError("scene training diverged at iteration " +
                       std::to_string(it));
    curve.push_back(loss);
    net.params.zero_grads();
    g.backward(nodes.loss);
    opt.step(net.params);
  }
  return curve;
}

double scene_full_loss(const NonseqNet& net, const train::SceneDataset& data) {
  const double gamma = net.spec.gamma;
  const double kappa = net.spec.kappa;
  const double dt = net.spec.dt;
  double loss = 0.0;
  if (!data.safe.empty()) {
    const std::vector<double> b = scene_values(net, pointers(data.safe));
    double acc = 0.0;
    for (double v : b) acc += std::max(gamma - v, 0.0);
    loss += acc / static_cast<double>(b.size());
  }
  if (!data.unsafe.empty()) {
    const std::vector<double> b = scene_values(net, pointers(data.unsafe));
    double acc = 0.0;
    for (double v : b) acc += std::max(gamma + v, 0.0);
    loss += acc / static_cast<double>(b.size());
  }
  if (!data.pairs.empty()) {
    double acc = 0.0;
    std::vector<double> scratch;
    for (const auto& pr : data.pairs) {
      const double b0 = scene_value(net, pr.first.rel.data(), pr.first.count,
                                    pr.first.ego.data(), scratch);
      const double b1 = scene_value(net, pr.second.rel.data(),
                                    pr.second.count, pr.second.ego.data(),
                                    scratch);
      acc += std::max(gamma - (b1 - b0) / dt - kappa * b0, 0.0);
    }
    loss += acc / static_cast<double>(data.pairs.size());
  }
  return loss;
}

}  // namespace sncbf::nonseq
