#pragma once

#include <cstdint>
#include <vector>

#include "sncbf/graph.hpp"
#include "sncbf/nn.hpp"

namespace sncbf::barrier {

// Sequential barrier network: an LSTM encodes one obstacle's recent relative
// motion, an MLP encodes the ego state, and a joint head maps both codes to a
// scalar barrier value. Positive means the pair (ego, obstacle history) is
// classified safe.
struct BarrierSpec {
  int q = 4;            // features per history step
  int k = 5;            // history window length
  int lstm_hidden = 64;
  int ego_dim = 1;
  std::vector<int> enc_hidden = {64};
  int enc_out = 64;
  std::vector<int> head_hidden = {128, 128};
  double kappa = 0.1;   // class-K slope in the invariance term
  double gamma = 0.01;  // hinge margin
  double dt = 0.1;      // step used by the finite-difference derivative

  dc::MlpSpec enc_spec() const {
    return {ego_dim, enc_hidden, enc_out, dc::Act::kRelu};
  }
  dc::MlpSpec head_spec() const {
    return {lstm_hidden + enc_out, head_hidden, 1, dc::Act::kRelu};
  }
  dc::LstmSpec lstm_spec() const { return {q, lstm_hidden}; }
};

struct BarrierNet {
  BarrierSpec spec;
  dc::ParamBundle params;
  dc::LstmRef lstm;
  dc::MlpRef enc;
  dc::MlpRef head;
};

BarrierNet barrier_init(const BarrierSpec& spec, uint64_t seed);
// Rebinds refs after params have been replaced (e.g. deserialized).
BarrierNet barrier_from_params(const BarrierSpec& spec,
                               dc::ParamBundle params);

// Training batch, laid out as column groups [safe | unsafe | pair | pair'].
// steps[t] is (q x n_total); ego is (ego_dim x n_total). The pair groups have
// equal width and are aligned: pair column j and pair' column j form one
// transition.
struct LossBatch {
  int n_safe = 0;
  int n_unsafe = 0;
  int n_pairs = 0;
  std::vector<dc::Tensor> steps;
  dc::Tensor ego;

  int total() const { return n_safe + n_unsafe + 2 * n_pairs; }
};

struct LossNodes {
  dc::Graph::Id loss = -1;
  dc::Graph::Id term_safe = -1;
  dc::Graph::Id term_unsafe = -1;
  dc::Graph::Id term_invariance = -1;
};

// Builds the three-term hinge loss:
//   mean over safe of max(gamma - B, 0)
// + mean over unsafe of max(gamma + B, 0)
// + mean over pairs of max(gamma - Bdot - kappa * B, 0),
// with Bdot = (B' - B) / dt. Groups of width zero contribute nothing.
LossNodes build_loss(dc::Graph& g, BarrierNet& net, const LossBatch& batch);

// Forward-only barrier values for a feature batch (columns are samples).
// Matches the graph forward pass.
std::vector<double> barrier_values(const BarrierNet& net,
                                   const std::vector<dc::Tensor>& steps,
                                   const dc::Tensor& ego);

// Scalar evaluator with reusable scratch and a cacheable LSTM prefix, for the
// online decision loop.
class BarrierEvaluator {
 public:
  explicit BarrierEvaluator(const BarrierNet& net);

  // steps.size() must equal spec.k; each pointer holds q features.
  double value(const std::vector<const double*>& steps, const double* ego);

  // Runs the first k-1 history steps; the result can be reused across
  // candidate controls that share the history prefix.
  dc::LstmState run_prefix(const std::vector<const double*>& steps);

  void encode_ego(const double* ego, std::vector<double>& out);

  // Completes an evaluation: one LSTM step on `last`, then the joint head.
  double value_from(const dc::LstmState& prefix, const double* last,
                    const std::vector<double>& ego_code);

 private:
  double value_from_state(const dc::LstmState& s);

  const BarrierNet* net_;
  dc::LstmState state_;
  std::vector<double> scratch_;
  std::vector<double> ego_code_;
  std::vector<double> head_in_;
};

}  // namespace sncbf::barrier
