#pragma once

#include <cstdint>
#include <vector>

#include "sncbf/dataset.hpp"
#include "sncbf/graph.hpp"
#include "sncbf/nn.hpp"
#include "sncbf/train.hpp"

namespace sncbf::nonseq {

// Pooled single-step barrier: each obstacle's current relative state is
// encoded by a shared MLP, the codes are max-pooled elementwise, and a head
// maps [pooled, ego code] to one scene-level scalar. No history, no
// per-obstacle outputs; the pooled width is fixed regardless of obstacle
// count.
struct NonseqSpec {
  int q = 4;
  int ego_dim = 1;
  std::vector<int> enc_hidden = {64};
  int enc_out = 64;
  std::vector<int> ego_hidden = {64};
  int ego_out = 64;
  std::vector<int> head_hidden = {128, 128};
  double kappa = 0.1;
  double gamma = 0.01;
  double dt = 0.1;

  dc::MlpSpec enc_spec() const {
    return {q, enc_hidden, enc_out, dc::Act::kRelu};
  }
  dc::MlpSpec ego_spec() const {
    return {ego_dim, ego_hidden, ego_out, dc::Act::kRelu};
  }
  dc::MlpSpec head_spec() const {
    return {enc_out + ego_out, head_hidden, 1, dc::Act::kRelu};
  }
};

struct NonseqNet {
  NonseqSpec spec;
  dc::ParamBundle params;
  dc::MlpRef enc;
  dc::MlpRef ego_enc;
  dc::MlpRef head;
};

NonseqNet nonseq_init(const NonseqSpec& spec, uint64_t seed);
NonseqNet nonseq_from_params(const NonseqSpec& spec, dc::ParamBundle params);

// Scene batch, column groups [safe | unsafe | pair | pair']. Obstacle columns
// of all scenes are stacked into one matrix; group_of_col maps each to its
// scene index. Every scene needs at least one obstacle (max of nothing).
struct SceneBatch {
  int n_safe = 0;
  int n_unsafe = 0;
  int n_pairs = 0;
  dc::Tensor obs;                 // q x total obstacle columns
  std::vector<int> group_of_col;  // scene index per obstacle column
  dc::Tensor ego;                 // ego_dim x n_scenes

  int n_scenes() const { return n_safe + n_unsafe + 2 * n_pairs; }
};

struct SceneLossNodes {
  dc::Graph::Id loss = -1;
  dc::Graph::Id term_safe = -1;
  dc::Graph::Id term_unsafe = -1;
  dc::Graph::Id term_invariance = -1;
};

// Same three-term hinge loss as the sequential model, over scene values.
SceneLossNodes build_scene_loss(dc::Graph& g, NonseqNet& net,
                                const SceneBatch& batch);

// Scalar forward pass. rel holds count * q features; scratch is reused.
double scene_value(const NonseqNet& net, const double* rel, int count,
                   const double* ego, std::vector<double>& scratch);
double scene_value(const NonseqNet& net, const train::SceneSample& s);

// Minibatch training over a scene dataset; analogous to the sequential
// trainer, returns per-iteration losses.
std::vector<double> train_nonseq(NonseqNet& net,
                                 const train::SceneDataset& data,
                                 const train::TrainConfig& cfg);

// Exact loss over the whole scene dataset, forward only.
double scene_full_loss(const NonseqNet& net, const train::SceneDataset& data);

}  // namespace sncbf::nonseq
