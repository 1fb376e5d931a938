#pragma once

#include "sncbf/nn.hpp"

namespace sncbf::dc {

// Adam with bias correction. Slot order follows bundle insertion order, so a
// given (bundle, seed, data) triple always produces the same trajectory.
class Adam {
 public:
  explicit Adam(double lr = 1e-3, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  // Applies one update from the bundle's current grads. Grads are left
  // untouched; callers zero them before the next accumulation.
  void step(ParamBundle& params);

  int iterations() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  int t_ = 0;
  std::vector<Tensor> m_, v_;
};

}  // namespace sncbf::dc
