#include "sncbf/optim.hpp"

#include <cmath>

namespace sncbf::dc {

void Adam::step(ParamBundle& params) {
  if (m_.empty()) {
    for (size_t i = 0; i < params.size(); ++i) {
      m_.push_back(Tensor::zeros(params.value_at(i).dims));
      v_.push_back(Tensor::zeros(params.value_at(i).dims));
    }
  }
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, t_);
  const double c2 = 1.0 - std::pow(beta2_, t_);
  for (size_t i = 0; i < params.size(); ++i) {
    Tensor& p = params.value_at(i);
    const Tensor& g = params.grad_at(i);
    Tensor& m = m_[i];
    Tensor& v = v_[i];
    for (size_t j = 0; j < p.count(); ++j) {
      m.data[j] = beta1_ * m.data[j] + (1.0 - beta1_) * g.data[j];
      v.data[j] = beta2_ * v.data[j] + (1.0 - beta2_) * g.data[j] * g.data[j];
      const double mhat = m.data[j] / c1;
      const double vhat = v.data[j] / c2;
      p.data[j] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

}  // namespace sncbf::dc
