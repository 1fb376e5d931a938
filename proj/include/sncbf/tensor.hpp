#pragma once

#include <cassert>
#include <cstdint>
#include <numeric>
#include <vector>

namespace sncbf::dc {

// Dense row-major tensor of doubles. Rank is 1 or 2 everywhere in this
// codebase; higher ranks round-trip through serialization but have no ops.
struct Tensor {
  std::vector<int> dims;
  std::vector<double> data;

  Tensor() = default;

  static Tensor zeros(std::vector<int> d) {
    Tensor t;
    t.dims = std::move(d);
    t.data.assign(t.count(), 0.0);
    return t;
  }

  size_t count() const {
    size_t n = 1;
    for (int d : dims) n *= static_cast<size_t>(d);
    return n;
  }

  int rows() const { return dims.empty() ? 0 : dims[0]; }
  int cols() const { return dims.size() < 2 ? 1 : dims[1]; }

  double* ptr() { return data.data(); }
  const double* ptr() const { return data.data(); }

  double& at(int r, int c) { return data[static_cast<size_t>(r) * cols() + c]; }
  double at(int r, int c) const {
    return data[static_cast<size_t>(r) * cols() + c];
  }

  bool same_shape(const Tensor& o) const { return dims == o.dims; }
};

}  // namespace sncbf::dc
