#include "sncbf/graph.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

#include "sncbf/kernels.hpp"

namespace sncbf::dc {

namespace {
void check(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}
}  // namespace

Graph::Id Graph::push(Node n) {
  nodes_.push_back(std::move(n));
  return static_cast<Id>(nodes_.size() - 1);
}

Graph::Id Graph::param(Tensor* value, Tensor* grad) {
  auto it = param_ids_.find(value);
  if (it != param_ids_.end()) return it->second;
  check(value != nullptr && grad != nullptr && value->same_shape(*grad),
        "param: value/grad shape mismatch");
  Node n;
  n.op = Op::kParam;
  n.ext_val = value;
  n.ext_grad = grad;
  Id id = push(std::move(n));
  param_ids_[value] = id;
  return id;
}

Graph::Id Graph::input(Tensor value) {
  Node n;
  n.op = Op::kInput;
  n.val = std::move(value);
  return push(std::move(n));
}

Graph::Id Graph::affine(Id w, Id x, Id b) {
  const Tensor& wv = val_of(nodes_[w]);
  const Tensor& xv = val_of(nodes_[x]);
  const int m = wv.rows();
  const int k = wv.cols();
  const int n = xv.cols();
  check(xv.rows() == k, "affine: inner dim mismatch");
  Node node;
  node.op = Op::kAffine;
  node.a = w;
  node.b = x;
  node.c = b;
  node.val = Tensor::zeros({m, n});
  kern::ops().gemm_nn(wv.ptr(), xv.ptr(), node.val.ptr(), m, k, n, false);
  if (b >= 0) {
    const Tensor& bv = val_of(nodes_[b]);
    check(static_cast<int>(bv.count()) == m, "affine: bias size mismatch");
    for (int i = 0; i < m; ++i) {
      double* row = node.val.ptr() + static_cast<size_t>(i) * n;
      const double bi = bv.data[i];
      for (int j = 0; j < n; ++j) row[j] += bi;
    }
  }
  return push(std::move(node));
}

Graph::Id Graph::relu(Id x) {
  Node n;
  n.op = Op::kRelu;
  n.a = x;
  n.val = val_of(nodes_[x]);
  for (double& v : n.val.data) v = v > 0.0 ? v : 0.0;
  return push(std::move(n));
}

Graph::Id Graph::tanh_(Id x) {
  Node n;
  n.op = Op::kTanh;
  n.a = x;
  n.val = val_of(nodes_[x]);
  for (double& v : n.val.data) v = std::tanh(v);
  return push(std::move(n));
}

Graph::Id Graph::sigmoid(Id x) {
  Node n;
  n.op = Op::kSigmoid;
  n.a = x;
  n.val = val_of(nodes_[x]);
  for (double& v : n.val.data) v = 1.0 / (1.0 + std::exp(-v));
  return push(std::move(n));
}

Graph::Id Graph::add(Id a, Id b) {
  const Tensor& av = val_of(nodes_[a]);
  const Tensor& bv = val_of(nodes_[b]);
  check(av.same_shape(bv), "add: shape mismatch");
  Node n;
  n.op = Op::kAdd;
  n.a = a;
  n.b = b;
  n.val = Tensor::zeros(av.dims);
  kern::ops().vadd(av.ptr(), bv.ptr(), n.val.ptr(),
                   static_cast<int>(av.count()));
  return push(std::move(n));
}

Graph::Id Graph::sub(Id a, Id b) {
  const Tensor& av = val_of(nodes_[a]);
  const Tensor& bv = val_of(nodes_[b]);
  check(av.same_shape(bv), "sub: shape mismatch");
  Node n;
  n.op = Op::kSub;
  n.a = a;
  n.b = b;
  n.val = Tensor::zeros(av.dims);
  kern::ops().vsub(av.ptr(), bv.ptr(), n.val.ptr(),
                   static_cast<int>(av.count()));
  return push(std::move(n));
}

Graph::Id Graph::mul(Id a, Id b) {
  const Tensor& av = val_of(nodes_[a]);
  const Tensor& bv = val_of(nodes_[b]);
  check(av.same_shape(bv), "mul: shape mismatch");
  Node n;
  n.op = Op::kMul;
  n.a = a;
  n.b = b;
  n.val = Tensor::zeros(av.dims);
  kern::ops().vmul(av.ptr(), bv.ptr(), n.val.ptr(),
                   static_cast<int>(av.count()));
  return push(std::move(n));
}

Graph::Id Graph::lincomb(double alpha, Id a, double beta, Id b) {
  const Tensor& av = val_of(nodes_[a]);
  const Tensor& bv = val_of(nodes_[b]);
  check(av.same_shape(bv), "lincomb: shape mismatch");
  Node n;
  n.op = Op::kLincomb;
  n.a = a;
  n.b = b;
  n.alpha = alpha;
  n.beta = beta;
  n.val = Tensor::zeros(av.dims);
  for (size_t i = 0; i < av.count(); ++i)
    n.val.data[i] = alpha * av.data[i] + beta * bv.data[i];
  return push(std::move(n));
}

Graph::Id Graph::concat_rows(const std::vector<Id>& parts) {
  check(!parts.empty(), "concat_rows: empty");
  const int n = val_of(nodes_[parts[0]]).cols();
  int m = 0;
  for (Id p : parts) {
    check(val_of(nodes_[p]).cols() == n, "concat_rows: column mismatch");
    m += val_of(nodes_[p]).rows();
  }
  Node node;
  node.op = Op::kConcatRows;
  node.srcs = parts;
  node.val = Tensor::zeros({m, n});
  double* dst = node.val.ptr();
  for (Id p : parts) {
    const Tensor& pv = val_of(nodes_[p]);
    std::copy(pv.data.begin(), pv.data.end(), dst);
    dst += pv.count();
  }
  return push(std::move(node));
}

Graph::Id Graph::slice_rows(Id x, int r0, int rows) {
  const Tensor& xv = val_of(nodes_[x]);
  check(r0 >= 0 && r0 + rows <= xv.rows(), "slice_rows: out of range");
  Node n;
  n.op = Op::kSliceRows;
  n.a = x;
  n.r0 = r0;
  const int c = xv.cols();
  n.val = Tensor::zeros({rows, c});
  std::copy(xv.ptr() + static_cast<size_t>(r0) * c,
            xv.ptr() + static_cast<size_t>(r0 + rows) * c, n.val.ptr());
  return push(std::move(n));
}

Graph::Id Graph::slice_cols(Id x, int c0, int cols) {
  const Tensor& xv = val_of(nodes_[x]);
  check(c0 >= 0 && c0 + cols <= xv.cols(), "slice_cols: out of range");
  Node n;
  n.op = Op::kSliceCols;
  n.a = x;
  n.r0 = c0;
  const int m = xv.rows();
  n.val = Tensor::zeros({m, cols});
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < cols; ++j) n.val.at(i, j) = xv.at(i, c0 + j);
  return push(std::move(n));
}

Graph::Id Graph::mean_hinge(Id x, double gamma, double sign) {
  const Tensor& xv = val_of(nodes_[x]);
  check(xv.count() > 0, "mean_hinge: empty");
  Node n;
  n.op = Op::kMeanHinge;
  n.a = x;
  n.alpha = gamma;
  n.beta = sign;
  double s = 0.0;
  for (double v : xv.data) {
    const double arg = gamma + sign * v;
    if (arg > 0.0) s += arg;
    const double margin = std::abs(arg);
    if (margin < min_hinge_margin_) min_hinge_margin_ = margin;
  }
  n.val = Tensor::zeros({1, 1});
  n.val.data[0] = s / static_cast<double>(xv.count());
  return push(std::move(n));
}

Graph::Id Graph::mean_sq(Id x) {
  const Tensor& xv = val_of(nodes_[x]);
  check(xv.count() > 0, "mean_sq: empty");
  Node n;
  n.op = Op::kMeanSq;
  n.a = x;
  double s = 0.0;
  for (double v : xv.data) s += v * v;
  n.val = Tensor::zeros({1, 1});
  n.val.data[0] = s / static_cast<double>(xv.count());
  return push(std::move(n));
}

Graph::Id Graph::segment_max_cols(Id x, std::vector<int> group_of_col,
                                  int n_groups) {
  const Tensor& xv = val_of(nodes_[x]);
  const int m = xv.rows();
  const int n = xv.cols();
  check(static_cast<int>(group_of_col.size()) == n,
        "segment_max_cols: group list size");
  std::vector<bool> seen(n_groups, false);
  for (int g : group_of_col) {
    check(g >= 0 && g < n_groups, "segment_max_cols: group out of range");
    seen[g] = true;
  }
  for (bool s : seen) check(s, "segment_max_cols: empty group");
  Node node;
  node.op = Op::kSegmentMax;
  node.a = x;
  node.groups = std::move(group_of_col);
  node.val = Tensor::zeros({m, n_groups});
  node.argmax.assign(static_cast<size_t>(m) * n_groups, -1);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      const int g = node.groups[j];
      const double v = xv.at(i, j);
      const size_t slot = static_cast<size_t>(i) * n_groups + g;
      if (node.argmax[slot] < 0 || v > node.val.at(i, g)) {
        node.val.at(i, g) = v;
        node.argmax[slot] = j;
      }
    }
  }
  return push(std::move(node));
}

const Tensor& Graph::value(Id id) const { return val_of(nodes_[id]); }

double Graph::scalar(Id id) const {
  const Tensor& v = val_of(nodes_[id]);
  check(v.count() == 1, "scalar: not a scalar node");
  return v.data[0];
}

void Graph::backward(Id root) {
  check(val_of(nodes_[root]).count() == 1, "backward: root must be scalar");
  for (Node& n : nodes_) {
    if (n.op == Op::kParam) continue;
    n.grad = Tensor::zeros(n.val.dims);
  }
  // Param grads live externally and are not zeroed here; callers control
  // accumulation across graphs.
  nodes_[root].grad.data[0] = 1.0;

  const auto& K = kern::ops();
  for (Id id = root; id >= 0; --id) {
    Node& n = nodes_[id];
    if (n.op == Op::kParam || n.op == Op::kInput) continue;
    const Tensor& g = n.grad;
    auto grad_of = [&](Id src) -> Tensor* {
      Node& s = nodes_[src];
      return s.ext_grad != nullptr ? s.ext_grad : &s.grad;
    };
    auto is_const = [&](Id src) { return nodes_[src].op == Op::kInput; };

    switch (n.op) {
      case Op::kAffine: {
        const Tensor& wv = val_of(nodes_[n.a]);
        const Tensor& xv = val_of(nodes_[n.b]);
        const int m = wv.rows();
        const int k = wv.cols();
        const int nc = xv.cols();
        if (!is_const(n.a))
          K.gemm_nt(g.ptr(), xv.ptr(), grad_of(n.a)->ptr(), m, nc, k, true);
        if (!is_const(n.b))
          K.gemm_tn(wv.ptr(), g.ptr(), grad_of(n.b)->ptr(), k, m, nc, true);
        if (n.c >= 0 && !is_const(n.c)) {
          double* db = grad_of(n.c)->ptr();
          for (int i = 0; i < m; ++i) {
            const double* row = g.ptr() + static_cast<size_t>(i) * nc;
            double s = 0.0;
            for (int j = 0; j < nc; ++j) s += row[j];
            db[i] += s;
          }
        }
        break;
      }
      case Op::kRelu: {
        if (is_const(n.a)) break;
        const Tensor& xv = val_of(nodes_[n.a]);
        double* dx = grad_of(n.a)->ptr();
        for (size_t i = 0; i < xv.count(); ++i)
          if (xv.data[i] > 0.0) dx[i] += g.data[i];
        break;
      }
      case Op::kTanh: {
        if (is_const(n.a)) break;
        double* dx = grad_of(n.a)->ptr();
        for (size_t i = 0; i < n.val.count(); ++i)
          dx[i] += g.data[i] * (1.0 - n.val.data[i] * n.val.data[i]);
        break;
      }
      case Op::kSigmoid: {
        if (is_const(n.a)) break;
        double* dx = grad_of(n.a)->ptr();
        for (size_t i = 0; i < n.val.count(); ++i)
          dx[i] += g.data[i] * n.val.data[i] * (1.0 - n.val.data[i]);
        break;
      }
      case Op::kAdd: {
        if (!is_const(n.a))
          K.axpy(1.0, g.ptr(), grad_of(n.a)->ptr(),
                 static_cast<int>(g.count()));
        if (!is_const(n.b))
          K.axpy(1.0, g.ptr(), grad_of(n.b)->ptr(),
                 static_cast<int>(g.count()));
        break;
      }
      case Op::kSub: {
        if (!is_const(n.a))
          K.axpy(1.0, g.ptr(), grad_of(n.a)->ptr(),
                 static_cast<int>(g.count()));
        if (!is_const(n.b))
          K.axpy(-1.0, g.ptr(), grad_of(n.b)->ptr(),
                 static_cast<int>(g.count()));
        break;
      }
      case Op::kMul: {
        const Tensor& av = val_of(nodes_[n.a]);
        const Tensor& bv = val_of(nodes_[n.b]);
        if (!is_const(n.a)) {
          double* da = grad_of(n.a)->ptr();
          for (size_t i = 0; i < g.count(); ++i)
            da[i] += g.data[i] * bv.data[i];
        }
        if (!is_const(n.b)) {
          double* db = grad_of(n.b)->ptr();
          for (size_t i = 0; i < g.count(); ++i)
            db[i] += g.data[i] * av.data[i];
        }
        break;
      }
      case Op::kLincomb: {
        if (!is_const(n.a))
          K.axpy(n.alpha, g.ptr(), grad_of(n.a)->ptr(),
                 static_cast<int>(g.count()));
        if (!is_const(n.b))
          K.axpy(n.beta, g.ptr(), grad_of(n.b)->ptr(),
                 static_cast<int>(g.count()));
        break;
      }
      case Op::kConcatRows: {
        size_t off = 0;
        for (Id p : n.srcs) {
          const size_t cnt = val_of(nodes_[p]).count();
          if (!is_const(p)) {
            double* dp = grad_of(p)->ptr();
            for (size_t i = 0; i < cnt; ++i) dp[i] += g.data[off + i];
          }
          off += cnt;
        }
        break;
      }
      case Op::kSliceRows: {
        if (is_const(n.a)) break;
        Tensor* dx = grad_of(n.a);
        const int c = dx->cols();
        double* base = dx->ptr() + static_cast<size_t>(n.r0) * c;
        for (size_t i = 0; i < g.count(); ++i) base[i] += g.data[i];
        break;
      }
      case Op::kSliceCols: {
        if (is_const(n.a)) break;
        Tensor* dx = grad_of(n.a);
        const int m = g.rows();
        const int cols = g.cols();
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < cols; ++j) dx->at(i, n.r0 + j) += g.at(i, j);
        break;
      }
      case Op::kMeanHinge: {
        if (is_const(n.a)) break;
        const Tensor& xv = val_of(nodes_[n.a]);
        const double go = g.data[0] * n.beta / static_cast<double>(xv.count());
        double* dx = grad_of(n.a)->ptr();
        for (size_t i = 0; i < xv.count(); ++i)
          if (n.alpha + n.beta * xv.data[i] > 0.0) dx[i] += go;
        break;
      }
      case Op::kMeanSq: {
        if (is_const(n.a)) break;
        const Tensor& xv = val_of(nodes_[n.a]);
        const double go = g.data[0] * 2.0 / static_cast<double>(xv.count());
        double* dx = grad_of(n.a)->ptr();
        for (size_t i = 0; i < xv.count(); ++i) dx[i] += go * xv.data[i];
        break;
      }
      case Op::kSegmentMax: {
        if (is_const(n.a)) break;
        Tensor* dx = grad_of(n.a);
        const int m = g.rows();
        const int ng = g.cols();
        for (int i = 0; i < m; ++i)
          for (int gcol = 0; gcol < ng; ++gcol) {
            const int j = n.argmax[static_cast<size_t>(i) * ng + gcol];
            dx->at(i, j) += g.at(i, gcol);
          }
        break;
      }
      case Op::kParam:
      case Op::kInput:
        break;
    }
  }
}

}  // namespace sncbf::dc
