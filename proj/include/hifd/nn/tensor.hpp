#pragma once

#include <cstddef>
#include <vector>

namespace hifd::nn {

// Dense (batch, length, channels) array, row-major. A single window is batch = 1.
struct Tensor {
  int batch = 0;
  int length = 0;
  int channels = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(int b, int l, int c, double fill = 0.0);

  std::size_t size() const { return data.size(); }
  double& at(int b, int t, int c) { return data[(std::size_t(b) * length + t) * channels + c]; }
  double at(int b, int t, int c) const { return data[(std::size_t(b) * length + t) * channels + c]; }
  double* sample(int b) { return data.data() + std::size_t(b) * length * channels; }
  const double* sample(int b) const { return data.data() + std::size_t(b) * length * channels; }
  bool same_shape(const Tensor& o) const {
    return batch == o.batch && length == o.length && channels == o.channels;
  }
  bool all_finite() const;
};

double mse(const Tensor& a, const Tensor& b);
// d mse / d a
Tensor mse_grad(const Tensor& a, const Tensor& b);

}  // namespace hifd::nn
