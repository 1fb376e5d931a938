#pragma once

#include <limits>
#include <unordered_map>
#include <vector>

#include "sncbf/tensor.hpp"

namespace sncbf::dc {

// Reverse-mode autodiff tape. Forward values are computed eagerly as nodes
// are created; backward(root) accumulates gradients of a scalar root into
// the external grad tensors registered with param().
class Graph {
 public:
  using Id = int;

  // Leaf backed by external storage; gradients accumulate into *grad.
  Id param(Tensor* value, Tensor* grad);
  // Constant leaf owned by the graph.
  Id input(Tensor value);

  // W (m x k) * X (k x n) + b (m), bias broadcast over columns. b = -1 omits.
  Id affine(Id w, Id x, Id b);
  Id relu(Id x);
  Id tanh_(Id x);
  Id sigmoid(Id x);
  Id add(Id a, Id b);
  Id sub(Id a, Id b);
  Id mul(Id a, Id b);
  // alpha * A + beta * B, elementwise on equal shapes.
  Id lincomb(double alpha, Id a, double beta, Id b);
  Id concat_rows(const std::vector<Id>& parts);
  Id slice_rows(Id x, int r0, int rows);
  Id slice_cols(Id x, int c0, int cols);
  // Scalar: mean over all elements of max(gamma + sign * x, 0).
  Id mean_hinge(Id x, double gamma, double sign);
  // Scalar: mean over all elements of x^2.
  Id mean_sq(Id x);
  // Column-group max. group_of_col[j] in [0, n_groups); every group must be
  // non-empty. Output is (rows x n_groups).
  Id segment_max_cols(Id x, std::vector<int> group_of_col, int n_groups);

  const Tensor& value(Id id) const;
  double scalar(Id id) const;

  // Smallest |gamma + sign * x| seen across every mean_hinge element so far;
  // infinity when no hinge was built. Used to exclude kink-straddling samples
  // from finite-difference audits.
  double min_hinge_margin() const { return min_hinge_margin_; }

  void backward(Id root);

 private:
  enum class Op {
    kParam, kInput, kAffine, kRelu, kTanh, kSigmoid, kAdd, kSub, kMul,
    kLincomb, kConcatRows, kSliceRows, kSliceCols, kMeanHinge, kMeanSq,
    kSegmentMax,
  };

  struct Node {
    Op op;
    Id a = -1;
    Id b = -1;
    Id c = -1;  // bias input for affine
    std::vector<Id> srcs;
    Tensor val;
    Tensor grad;
    Tensor* ext_val = nullptr;
    Tensor* ext_grad = nullptr;
    double alpha = 0.0;
    double beta = 0.0;
    int r0 = 0;
    std::vector<int> groups;
    std::vector<int> argmax;
  };

  const Tensor& val_of(const Node& n) const {
    return n.ext_val != nullptr ? *n.ext_val : n.val;
  }
  Id push(Node n);

  std::vector<Node> nodes_;
  std::unordered_map<const Tensor*, Id> param_ids_;
  double min_hinge_margin_ = std::numeric_limits<double>::infinity();
};

}  // namespace sncbf::dc
