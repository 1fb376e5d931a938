#pragma once

#include <string>
#include <vector>

#include "sncbf/graph.hpp"
#include "sncbf/rng.hpp"
#include "sncbf/tensor.hpp"

namespace sncbf::dc {

// Named, ordered parameter collection. Order of insertion defines the
// serialization layout and the optimizer slot order.
class ParamBundle {
 public:
  Tensor& add(const std::string& name, Tensor init);
  bool has(const std::string& name) const;
  Tensor& value(const std::string& name);
  const Tensor& value(const std::string& name) const;
  Tensor& grad(const std::string& name);

  size_t size() const { return names_.size(); }
  const std::string& name(size_t i) const { return names_[i]; }
  Tensor& value_at(size_t i) { return values_[i]; }
  const Tensor& value_at(size_t i) const { return values_[i]; }
  Tensor& grad_at(size_t i) { return grads_[i]; }

  void zero_grads();
  size_t total_params() const;

 private:
  int index(const std::string& name) const;

  std::vector<std::string> names_;
  std::vector<Tensor> values_;
  std::vector<Tensor> grads_;
};

enum class Act { kRelu, kTanh };

// Fully connected net: affine layers with the activation between them and a
// linear final layer.
struct MlpSpec {
  int in = 0;
  std::vector<int> hidden;
  int out = 0;
  Act act = Act::kRelu;

  std::vector<int> layer_dims() const;  // [in, hidden..., out]
};

void mlp_init(const MlpSpec& spec, const std::string& prefix, Rng& rng,
              ParamBundle& params);

// Resolved views into a bundle; valid while the bundle is alive and its
// tensor list is not resized.
struct MlpRef {
  MlpSpec spec;
  std::vector<Tensor*> w;
  std::vector<Tensor*> b;
  std::vector<Tensor*> gw;
  std::vector<Tensor*> gb;
};

MlpRef mlp_bind(const MlpSpec& spec, const std::string& prefix,
                ParamBundle& params);

// Numeric forward pass; scratch is reused across calls.
void mlp_forward(const MlpRef& m, const double* in, double* out,
                 std::vector<double>& scratch);

Graph::Id mlp_graph(Graph& g, const MlpRef& m, Graph::Id x);

// Single-layer LSTM with fused gate weights. Gate row order is
// [input; forget; cell; output], each block `hidden` rows. The forget gate
// bias is initialized to +1, all other biases to 0.
struct LstmSpec {
  int in = 0;
  int hidden = 0;
};

void lstm_init(const LstmSpec& spec, const std::string& prefix, Rng& rng,
               ParamBundle& params);

struct LstmRef {
  LstmSpec spec;
  Tensor* w = nullptr;  // (4H x (in + H))
  Tensor* b = nullptr;  // (4H)
  Tensor* gw = nullptr;
  Tensor* gb = nullptr;
};

LstmRef lstm_bind(const LstmSpec& spec, const std::string& prefix,
                  ParamBundle& params);

struct LstmState {
  std::vector<double> h;
  std::vector<double> c;
  void reset(int hidden) {
    h.assign(hidden, 0.0);
    c.assign(hidden, 0.0);
  }
};

void lstm_step(const LstmRef& m, const double* x, LstmState& state,
               std::vector<double>& scratch);

// Unrolls the LSTM over the given per-step input nodes (each in x n) starting
// from zero state; returns the final hidden state node (hidden x n).
Graph::Id lstm_graph(Graph& g, const LstmRef& m,
                     const std::vector<Graph::Id>& steps);

// Fan-in uniform initializer: U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
Tensor init_weight(int out, int in, Rng& rng);

}  // namespace sncbf::dc
