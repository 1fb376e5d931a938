#include "sncbf/barrier.hpp"

#include <stdexcept>

namespace sncbf::barrier {

namespace {

void bind_refs(BarrierNet& net) {
  net.lstm = dc::lstm_bind(net.spec.lstm_spec(), "lstm", net.params);
  net.enc = dc::mlp_bind(net.spec.enc_spec(), "enc", net.params);
  net.head = dc::mlp_bind(net.spec.head_spec(), "head", net.params);
}

}  // namespace

BarrierNet barrier_init(const BarrierSpec& spec, uint64_t seed) {
  BarrierNet net;
  net.spec = spec;
  Rng rng(seed);
  dc::lstm_init(spec.lstm_spec(), "lstm", rng, net.params);
  dc::mlp_init(spec.enc_spec(), "enc", rng, net.params);
  dc::mlp_init(spec.head_spec(), "head", rng, net.params);
  bind_refs(net);
  return net;
}

BarrierNet barrier_from_params(const BarrierSpec& spec,
                               dc::ParamBundle params) {
  BarrierNet net;
  net.spec = spec;
  net.params = std::move(params);
  bind_refs(net);
  return net;
}

namespace {

// Shared forward: fused batch through LSTM, ego encoder and head.
dc::Graph::Id forward_batch(dc::Graph& g, BarrierNet& net,
                            const std::vector<dc::Tensor>& steps,
                            const dc::Tensor& ego) {
  if (static_cast<int>(steps.size()) != net.spec.k)
    throw std::invalid_argument("barrier forward: wrong window length");
  std::vector<dc::Graph::Id> xs;
  xs.reserve(steps.size());
  for (const dc::Tensor& s : steps) xs.push_back(g.input(s));
  dc::Graph::Id h = dc::lstm_graph(g, net.lstm, xs);
  dc::Graph::Id e = dc::mlp_graph(g, net.enc, g.input(ego));
  return dc::mlp_graph(g, net.head, g.concat_rows({h, e}));
}

}  // namespace

LossNodes build_loss(dc::Graph& g, BarrierNet& net, const LossBatch& batch) {
  if (batch.total() <= 0)
    throw std::invalid_argument("build_loss: empty batch");
  const double gamma = net.spec.gamma;
  const double kappa = net.spec.kappa;
  const double dt = net.spec.dt;

  dc::Graph::Id b = forward_batch(g, net, batch.steps, batch.ego);

  LossNodes out;
  int c0 = 0;
  if (batch.n_safe > 0) {
    dc::Graph::Id bs = g.slice_cols(b, c0, batch.n_safe);
    out.term_safe = g.mean_hinge(bs, gamma, -1.0);
  }
  c0 += batch.n_safe;
  if (batch.n_unsafe > 0) {
    dc::Graph::Id bu = g.slice_cols(b, c0, batch.n_unsafe);
    out.term_unsafe = g.mean_hinge(bu, gamma, +1.0);
  }
  c0 += batch.n_unsafe;
  if (batch.n_pairs > 0) {
    dc::Graph::Id bnow = g.slice_cols(b, c0, batch.n_pairs);
    dc::Graph::Id bnext = g.slice_cols(b, c0 + batch.n_pairs, batch.n_pairs);
    // -Bdot - kappa*B = (-1/dt) B' + (1/dt - kappa) B
    dc::Graph::Id arg = g.lincomb(-1.0 / dt, bnext, 1.0 / dt - kappa, bnow);
    out.term_invariance = g.mean_hinge(arg, gamma, +1.0);
  }

  dc::Graph::Id acc = -1;
  for (dc::Graph::Id t : {out.term_safe, out.term_unsafe,
                          out.term_invariance}) {
    if (t < 0) continue;
    acc = acc < 0 ? t : g.add(acc, t);
  }
  out.loss = acc;
  return out;
}

std::vector<double> barrier_values(const BarrierNet& net,
                                   const std::vector<dc::Tensor>& steps,
                                   const dc::Tensor& ego) {
  BarrierNet& mut = const_cast<BarrierNet&>(net);
  const int n = ego.cols();
  std::vector<double> out(static_cast<size_t>(n));
  // Chunked so transient graph buffers stay small on large scans.
  const int chunk = 1024;
  for (int c0 = 0; c0 < n; c0 += chunk) {
    const int nc = std::min(chunk, n - c0);
    std::vector<dc::Tensor> sub(steps.size());
    for (size_t t = 0; t < steps.size(); ++t) {
      sub[t] = dc::Tensor::zeros({steps[t].rows(), nc});
      for (int r = 0; r < steps[t].rows(); ++r)
        for (int j = 0; j < nc; ++j)
          sub[t].at(r, j) = steps[t].at(r, c0 + j);
    }
    dc::Tensor se = dc::Tensor::zeros({ego.rows(), nc});
    for (int r = 0; r < ego.rows(); ++r)
      for (int j = 0; j < nc; ++j) se.at(r, j) = ego.at(r, c0 + j);
    dc::Graph g;
    dc::Graph::Id b = forward_batch(g, mut, sub, se);
    const dc::Tensor& bv = g.value(b);
    for (int j = 0; j < nc; ++j) out[static_cast<size_t>(c0 + j)] = bv.at(0, j);
  }
  return out;
}

BarrierEvaluator::BarrierEvaluator(const BarrierNet& net) : net_(&net) {
  state_.reset(net.spec.lstm_hidden);
  ego_code_.resize(static_cast<size_t>(net.spec.enc_out));
  head_in_.resize(static_cast<size_t>(net.spec.lstm_hidden + net.spec.enc_out));
}

double BarrierEvaluator::value(const std::vector<const double*>& steps,
                               const double* ego) {
  if (static_cast<int>(steps.size()) != net_->spec.k)
    throw std::invalid_argument("barrier value: wrong window length");
  state_.reset(net_->spec.lstm_hidden);
  for (const double* x : steps) dc::lstm_step(net_->lstm, x, state_, scratch_);
  encode_ego(ego, ego_code_);
  return value_from_state(state_);
}

dc::LstmState BarrierEvaluator::run_prefix(
    const std::vector<const double*>& steps) {
  if (static_cast<int>(steps.size()) != net_->spec.k - 1)
    throw std::invalid_argument("barrier prefix: wrong length");
  dc::LstmState s;
  s.reset(net_->spec.lstm_hidden);
  for (const double* x : steps) dc::lstm_step(net_->lstm, x, s, scratch_);
  return s;
}

void BarrierEvaluator::encode_ego(const double* ego,
                                  std::vector<double>& out) {
  out.resize(static_cast<size_t>(net_->spec.enc_out));
  dc::mlp_forward(net_->enc, ego, out.data(), scratch_);
}

double BarrierEvaluator::value_from(const dc::LstmState& prefix,
                                    const double* last,
                                    const std::vector<double>& ego_code) {
  dc::LstmState s = prefix;
  dc::lstm_step(net_->lstm, last, s, scratch_);
  const int h = net_->spec.lstm_hidden;
  std::copy(s.h.begin(), s.h.end(), head_in_.begin());
  std::copy(ego_code.begin(), ego_code.end(), head_in_.begin() + h);
  double out = 0.0;
  dc::mlp_forward(net_->head, head_in_.data(), &out, scratch_);
  return out;
}

double BarrierEvaluator::value_from_state(const dc::LstmState& s) {
  const int h = net_->spec.lstm_hidden;
  std::copy(s.h.begin(), s.h.end(), head_in_.begin());
  std::copy(ego_code_.begin(), ego_code_.end(), head_in_.begin() + h);
  double out = 0.0;
  dc::mlp_forward(net_->head, head_in_.data(), &out, scratch_);
  return out;
}

}  // namespace sncbf::barrier
