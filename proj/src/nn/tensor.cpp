#include "hifd/nn/tensor.hpp"

#include <cmath>
#include <stdexcept>

namespace hifd::nn {

Tensor::Tensor(int b, int l, int c, double fill) : batch(b), length(l), channels(c) {
  if (b < 0 || l < 0 || c < 0) throw std::invalid_argument("tensor: negative dimension");
  data.assign(std::size_t(b) * l * c, fill);
}

bool Tensor::all_finite() const {
  for (double v : data)
    if (!std::isfinite(v)) return false;
  return true;
}

double mse(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("mse: shape mismatch");
  if (a.size() == 0) throw std::invalid_argument("mse: empty tensor");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a.data[i] - b.data[i];
    s += d * d;
  }
  return s / double(a.size());
}

Tensor mse_grad(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("mse: shape mismatch");
  Tensor g(a.batch, a.length, a.channels);
  const double scale = 2.0 / double(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) g.data[i] = scale * (a.data[i] - b.data[i]);
  return g;
}

}  // namespace hifd::nn
