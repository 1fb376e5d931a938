#include "sncbf/nn.hpp"

#include <cmath>
#include <stdexcept>

#include "sncbf/kernels.hpp"

namespace sncbf::dc {

Tensor& ParamBundle::add(const std::string& name, Tensor init) {
  if (has(name)) throw std::invalid_argument("duplicate param: " + name);
  names_.push_back(name);
  grads_.push_back(Tensor::zeros(init.dims));
  values_.push_back(std::move(init));
  return values_.back();
}

int ParamBundle::index(const std::string& name) const {
  for (size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return static_cast<int>(i);
  return -1;
}

bool ParamBundle::has(const std::string& name) const {
  return index(name) >= 0;
}

Tensor& ParamBundle::value(const std::string& name) {
  const int i = index(name);
  if (i < 0) throw std::invalid_argument("unknown param: " + name);
  return values_[static_cast<size_t>(i)];
}

const Tensor& ParamBundle::value(const std::string& name) const {
  const int i = index(name);
  if (i < 0) throw std::invalid_argument("unknown param: " + name);
  return values_[static_cast<size_t>(i)];
}

Tensor& ParamBundle::grad(const std::string& name) {
  const int i = index(name);
  if (i < 0) throw std::invalid_argument("unknown param: " + name);
  return grads_[static_cast<size_t>(i)];
}

void ParamBundle::zero_grads() {
  for (Tensor& g : grads_) std::fill(g.data.begin(), g.data.end(), 0.0);
}

size_t ParamBundle::total_params() const {
  size_t n = 0;
  for (const Tensor& v : values_) n += v.count();
  return n;
}

Tensor init_weight(int out, int in, Rng& rng) {
  Tensor w = Tensor::zeros({out, in});
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  for (double& v : w.data) v = rng.uniform(-bound, bound);
  return w;
}

std::vector<int> MlpSpec::layer_dims() const {
  std::vector<int> d;
  d.push_back(in);
  for (int h : hidden) d.push_back(h);
  d.push_back(out);
  return d;
}

void mlp_init(const MlpSpec& spec, const std::string& prefix, Rng& rng,
              ParamBundle& params) {
  const auto dims = spec.layer_dims();
  for (size_t l = 0; l + 1 < dims.size(); ++l) {
    const std::string idx = std::to_string(l);
    params.add(prefix + ".w" + idx, init_weight(dims[l + 1], dims[l], rng));
    params.add(prefix + ".b" + idx, Tensor::zeros({dims[l + 1]}));
  }
}

MlpRef mlp_bind(const MlpSpec& spec, const std::string& prefix,
                ParamBundle& params) {
  MlpRef m;
  m.spec = spec;
  const auto dims = spec.layer_dims();
  for (size_t l = 0; l + 1 < dims.size(); ++l) {
    const std::string idx = std::to_string(l);
    m.w.push_back(&params.value(prefix + ".w" + idx));
    m.b.push_back(&params.value(prefix + ".b" + idx));
    m.gw.push_back(&params.grad(prefix + ".w" + idx));
    m.gb.push_back(&params.grad(prefix + ".b" + idx));
  }
  return m;
}

void mlp_forward(const MlpRef& m, const double* in, double* out,
                 std::vector<double>& scratch) {
  const auto dims = m.spec.layer_dims();
  size_t maxw = 0;
  for (int d : dims) maxw = std::max(maxw, static_cast<size_t>(d));
  scratch.resize(2 * maxw);
  double* cur = scratch.data();
  double* nxt = scratch.data() + maxw;
  std::copy(in, in + dims[0], cur);
  const size_t layers = m.w.size();
  for (size_t l = 0; l < layers; ++l) {
    const int mrows = dims[l + 1];
    const int kcols = dims[l];
    double* dst = (l + 1 == layers) ? out : nxt;
    kern::ops().matvec(m.w[l]->ptr(), cur, dst, mrows, kcols, false);
    const double* bias = m.b[l]->ptr();
    for (int i = 0; i < mrows; ++i) dst[i] += bias[i];
    if (l + 1 < layers) {
      if (m.spec.act == Act::kRelu) {
        for (int i = 0; i < mrows; ++i) dst[i] = dst[i] > 0.0 ? dst[i] : 0.0;
      } else {
        for (int i = 0; i < mrows; ++i) dst[i] = std::tanh(dst[i]);
      }
      std::swap(cur, nxt);
      if (cur != dst) std::copy(dst, dst + mrows, cur);
    }
  }
}

Graph::Id mlp_graph(Graph& g, const MlpRef& m, Graph::Id x) {
  Graph::Id cur = x;
  const size_t layers = m.w.size();
  for (size_t l = 0; l < layers; ++l) {
    Graph::Id w = g.param(m.w[l], m.gw[l]);
    Graph::Id b = g.param(m.b[l], m.gb[l]);
    cur = g.affine(w, cur, b);
    if (l + 1 < layers)
      cur = (m.spec.act == Act::kRelu) ? g.relu(cur) : g.tanh_(cur);
  }
  return cur;
}

void lstm_init(const LstmSpec& spec, const std::string& prefix, Rng& rng,
               ParamBundle& params) {
  const int h = spec.hidden;
  params.add(prefix + ".w", init_weight(4 * h, spec.in + h, rng));
  Tensor b = Tensor::zeros({4 * h});
  for (int i = h; i < 2 * h; ++i) b.data[i] = 1.0;
  params.add(prefix + ".b", std::move(b));
}

LstmRef lstm_bind(const LstmSpec& spec, const std::string& prefix,
                  ParamBundle& params) {
  LstmRef m;
  m.spec = spec;
  m.w = &params.value(prefix + ".w");
  m.b = &params.value(prefix + ".b");
  m.gw = &params.grad(prefix + ".w");
  m.gb = &params.grad(prefix + ".b");
  return m;
}

void lstm_step(const LstmRef& m, const double* x, LstmState& state,
               std::vector<double>& scratch) {
  const int in = m.spec.in;
  const int h = m.spec.hidden;
  scratch.resize(static_cast<size_t>(in + h) + 4 * h);
  double* xh = scratch.data();
  double* gates = scratch.data() + in + h;
  std::copy(x, x + in, xh);
  std::copy(state.h.begin(), state.h.end(), xh + in);
  kern::ops().matvec(m.w->ptr(), xh, gates, 4 * h, in + h, false);
  const double* bias = m.b->ptr();
  for (int i = 0; i < 4 * h; ++i) gates[i] += bias[i];
  for (int i = 0; i < h; ++i) {
    const double ig = 1.0 / (1.0 + std::exp(-gates[i]));
    const double fg = 1.0 / (1.0 + std::exp(-gates[h + i]));
    const double gg = std::tanh(gates[2 * h + i]);
    const double og = 1.0 / (1.0 + std::exp(-gates[3 * h + i]));
    state.c[i] = fg * state.c[i] + ig * gg;
    state.h[i] = og * std::tanh(state.c[i]);
  }
}

Graph::Id lstm_graph(Graph& g, const LstmRef& m,
                     const std::vector<Graph::Id>& steps) {
  if (steps.empty()) throw std::invalid_argument("lstm_graph: no steps");
  const int h = m.spec.hidden;
  const int n = g.value(steps[0]).cols();
  Graph::Id w = g.param(m.w, m.gw);
  // Bias enters via affine's broadcast; shape check uses count so a rank-1
  // tensor is fine.
  Graph::Id b = g.param(m.b, m.gb);
  Graph::Id hprev = g.input(Tensor::zeros({h, n}));
  Graph::Id cprev = g.input(Tensor::zeros({h, n}));
  for (Graph::Id x : steps) {
    Graph::Id xh = g.concat_rows({x, hprev});
    Graph::Id gates = g.affine(w, xh, b);
    Graph::Id ig = g.sigmoid(g.slice_rows(gates, 0, h));
    Graph::Id fg = g.sigmoid(g.slice_rows(gates, h, h));
    Graph::Id gg = g.tanh_(g.slice_rows(gates, 2 * h, h));
    Graph::Id og = g.sigmoid(g.slice_rows(gates, 3 * h, h));
    Graph::Id c = g.add(g.mul(fg, cprev), g.mul(ig, gg));
    Graph::Id hh = g.mul(og, g.tanh_(c));
    hprev = hh;
    cprev = c;
  }
  return hprev;
}

}  // namespace sncbf::dc
