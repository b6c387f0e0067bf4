#include "hifd/nn/layers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hifd::nn {

int pooled_length(int n, int p) { return (n + p - 1) / p; }

// ---- Conv1d

Conv1d::Conv1d(int in, int out, int kk, Padding pad)
    : in_channels(in), out_channels(out), k(kk), padding(pad) {
  if (in < 1 || out < 1 || kk < 1) throw std::invalid_argument("conv1d: bad dimensions");
  weight.assign(std::size_t(k) * in * out, 0.0);
  bias.assign(out, 0.0);
  grad_weight.assign(weight.size(), 0.0);
  grad_bias.assign(out, 0.0);
}

ConvShape Conv1d::shape_for(const Tensor& x) const {
  if (x.channels != in_channels)
    throw std::invalid_argument("conv1d: input has " + std::to_string(x.channels) + " channels, expected " +
                                std::to_string(in_channels));
  ConvShape s;
  s.batch = x.batch;
  s.len_in = x.length;
  s.ch_in = in_channels;
  s.ch_out = out_channels;
  s.k = k;
  if (padding == Padding::same) {
    s.pad_left = (k - 1) / 2;
    s.len_out = x.length;
  } else {
    s.pad_left = 0;
    s.len_out = x.length - k + 1;
    if (s.len_out < 1) throw std::invalid_argument("conv1d: input shorter than kernel");
  }
  return s;
}

void Conv1d::init_uniform(std::mt19937_64& rng, double gain) {
  const double bound = std::sqrt(gain / double(k * in_channels));
  std::uniform_real_distribution<double> u(-bound, bound);
  for (double& w : weight) w = u(rng);
  std::fill(bias.begin(), bias.end(), 0.0);
}

Tensor Conv1d::infer(const Tensor& x) const {
  const ConvShape s = shape_for(x);
  Tensor y(s.batch, s.len_out, s.ch_out);
  if (backend == Backend::serial)
    serial::conv1d_forward(s, x.data.data(), weight.data(), bias.data(), y.data.data());
  else
    parallel::conv1d_forward(s, x.data.data(), weight.data(), bias.data(), y.data.data());
  return y;
}

Tensor Conv1d::forward(const Tensor& x) {
  input_ = x;
  return infer(x);
}

Tensor Conv1d::backward(const Tensor& dy) {
  const ConvShape s = shape_for(input_);
  if (dy.batch != s.batch || dy.length != s.len_out || dy.channels != s.ch_out)
    throw std::invalid_argument("conv1d: upstream gradient shape mismatch");
  Tensor dx(s.batch, s.len_in, s.ch_in);
  if (backend == Backend::serial) {
    serial::conv1d_backward_input(s, dy.data.data(), weight.data(), dx.data.data());
    serial::conv1d_backward_weights(s, input_.data.data(), dy.data.data(), grad_weight.data(), grad_bias.data());
  } else {
    parallel::conv1d_backward_input(s, dy.data.data(), weight.data(), dx.data.data());
    parallel::conv1d_backward_weights(s, input_.data.data(), dy.data.data(), grad_weight.data(),
                                      grad_bias.data());
  }
  return dx;
}

std::vector<ParamView> Conv1d::params() {
  return {{"weight", &weight, &grad_weight}, {"bias", &bias, &grad_bias}};
}

// ---- LeakyRelu

LeakyRelu::LeakyRelu(double a) : alpha(a) {
  if (!(a > 0.0 && a < 1.0)) throw std::invalid_argument("leaky_relu: alpha must lie in (0,1)");
}

Tensor LeakyRelu::infer(const Tensor& x) const { return leaky_relu(x, alpha); }

Tensor LeakyRelu::forward(const Tensor& x) {
  input_ = x;
  return leaky_relu(x, alpha);
}

Tensor LeakyRelu::backward(const Tensor& dy) {
  if (!dy.same_shape(input_)) throw std::invalid_argument("leaky_relu: gradient shape mismatch");
  Tensor dx = dy;
  for (std::size_t i = 0; i < dx.size(); ++i)
    if (input_.data[i] < 0.0) dx.data[i] *= alpha;
  return dx;
}

Tensor leaky_relu(const Tensor& x, double alpha) {
  Tensor y = x;
  for (double& v : y.data)
    if (v < 0.0) v *= alpha;
  return y;
}

// ---- BatchNorm

BatchNorm::BatchNorm(int c, double m, double e) : channels(c), momentum(m), eps(e) {
  if (c < 1) throw std::invalid_argument("batch_norm: no channels");
  gamma.assign(c, 1.0);
  beta.assign(c, 0.0);
  running_mean.assign(c, 0.0);
  running_var.assign(c, 1.0);
  grad_gamma.assign(c, 0.0);
  grad_beta.assign(c, 0.0);
}

Tensor BatchNorm::forward(const Tensor& x) {
  if (x.channels != channels) throw std::invalid_argument("batch_norm: channel mismatch");
  if (x.batch < 2) throw std::invalid_argument("batch_norm: training needs a batch of at least 2");
  const std::size_t rows = std::size_t(x.batch) * x.length;
  std::vector<double> mean(channels, 0.0), var(channels, 0.0);
  for (std::size_t r = 0; r < rows; ++r)
    for (int c = 0; c < channels; ++c) mean[c] += x.data[r * channels + c];
  for (int c = 0; c < channels; ++c) mean[c] /= double(rows);
  for (std::size_t r = 0; r < rows; ++r)
    for (int c = 0; c < channels; ++c) {
      double d = x.data[r * channels + c] - mean[c];
      var[c] += d * d;
    }
  for (int c = 0; c < channels; ++c) var[c] /= double(rows);

  inv_std_.assign(channels, 0.0);
  for (int c = 0; c < channels; ++c) inv_std_[c] = 1.0 / std::sqrt(var[c] + eps);
  xhat_ = Tensor(x.batch, x.length, channels);
  Tensor y(x.batch, x.length, channels);
  for (std::size_t r = 0; r < rows; ++r)
    for (int c = 0; c < channels; ++c) {
      const std::size_t i = r * channels + c;
      xhat_.data[i] = (x.data[i] - mean[c]) * inv_std_[c];
      y.data[i] = gamma[c] * xhat_.data[i] + beta[c];
    }
  if (update_running)
    for (int c = 0; c < channels; ++c) {
      running_mean[c] = momentum * running_mean[c] + (1.0 - momentum) * mean[c];
      running_var[c] = momentum * running_var[c] + (1.0 - momentum) * var[c];
    }
  return y;
}

Tensor BatchNorm::infer(const Tensor& x) const {
  if (x.channels != channels) throw std::invalid_argument("batch_norm: channel mismatch");
  Tensor y(x.batch, x.length, channels);
  const std::size_t rows = std::size_t(x.batch) * x.length;
  for (int c = 0; c < channels; ++c) {
    const double s = gamma[c] / std::sqrt(running_var[c] + eps);
    const double o = beta[c] - running_mean[c] * s;
    for (std::size_t r = 0; r < rows; ++r) y.data[r * channels + c] = x.data[r * channels + c] * s + o;
  }
  return y;
}

Tensor BatchNorm::backward(const Tensor& dy) {
  if (!dy.same_shape(xhat_)) throw std::invalid_argument("batch_norm: gradient shape mismatch");
  const std::size_t rows = std::size_t(dy.batch) * dy.length;
  std::vector<double> sum_dy(channels, 0.0), sum_dy_xhat(channels, 0.0);
  for (std::size_t r = 0; r < rows; ++r)
    for (int c = 0; c < channels; ++c) {
      const std::size_t i = r * channels + c;
      sum_dy[c] += dy.data[i];
      sum_dy_xhat[c] += dy.data[i] * xhat_.data[i];
    }
  for (int c = 0; c < channels; ++c) {
    grad_beta[c] = sum_dy[c];
    grad_gamma[c] = sum_dy_xhat[c];
  }
  Tensor dx(dy.batch, dy.length, channels);
  const double n = double(rows);
  for (std::size_t r = 0; r < rows; ++r)
    for (int c = 0; c < channels; ++c) {
      const std::size_t i = r * channels + c;
      dx.data[i] = gamma[c] * inv_std_[c] / n *
                   (n * dy.data[i] - sum_dy[c] - xhat_.data[i] * sum_dy_xhat[c]);
    }
  return dx;
}

std::vector<ParamView> BatchNorm::params() {
  return {{"gamma", &gamma, &grad_gamma}, {"beta", &beta, &grad_beta}};
}

// ---- MaxPool

MaxPool::MaxPool(int pp) : p(pp) {
  if (pp < 2) throw std::invalid_argument("max_pool: p must be at least 2");
}

Tensor MaxPool::pool(const Tensor& x, std::vector<int>* idx) const {
  const int lo = pooled_length(x.length, p);
  Tensor y(x.batch, lo, x.channels);
  if (idx) idx->assign(y.size(), 0);
  for (int b = 0; b < x.batch; ++b)
    for (int t = 0; t < lo; ++t) {
      const int start = t * p;
      const int stop = std::min(start + p, x.length);
      for (int c = 0; c < x.channels; ++c) {
        int best = start;
        double v = x.at(b, start, c);
        for (int s = start + 1; s < stop; ++s)
          if (x.at(b, s, c) > v) {
            v = x.at(b, s, c);
            best = s;
          }
        y.at(b, t, c) = v;
        if (idx) (*idx)[(std::size_t(b) * lo + t) * x.channels + c] = best;
      }
    }
  return y;
}

Tensor MaxPool::infer(const Tensor& x) const { return pool(x, nullptr); }

Tensor MaxPool::forward(const Tensor& x) {
  in_length_ = x.length;
  return pool(x, &argmax_);
}

Tensor MaxPool::backward(const Tensor& dy) {
  if (dy.size() != argmax_.size()) throw std::invalid_argument("max_pool: gradient shape mismatch");
  Tensor dx(dy.batch, in_length_, dy.channels);
  for (int b = 0; b < dy.batch; ++b)
    for (int t = 0; t < dy.length; ++t)
      for (int c = 0; c < dy.channels; ++c) {
        const std::size_t i = (std::size_t(b) * dy.length + t) * dy.channels + c;
        dx.at(b, argmax_[i], c) += dy.data[i];
      }
  return dx;
}

std::pair<Tensor, std::vector<int>> max_pool(const Tensor& x, int p) {
  MaxPool m(p);
  std::vector<int> idx;
  Tensor y = m.pool(x, &idx);
  return {std::move(y), std::move(idx)};
}

// ---- Upsample

Upsample::Upsample(int pp) : p(pp) {
  if (pp < 2) throw std::invalid_argument("upsample: p must be at least 2");
}

Tensor upsample(const Tensor& x, int p) {
  Tensor y(x.batch, x.length * p, x.channels);
  for (int b = 0; b < x.batch; ++b)
    for (int t = 0; t < x.length; ++t)
      for (int r = 0; r < p; ++r)
        std::copy_n(x.sample(b) + std::size_t(t) * x.channels, x.channels,
                    y.sample(b) + std::size_t(t * p + r) * x.channels);
  return y;
}

Tensor Upsample::infer(const Tensor& x) const { return upsample(x, p); }
Tensor Upsample::forward(const Tensor& x) { return upsample(x, p); }

Tensor Upsample::backward(const Tensor& dy) {
  if (dy.length % p != 0) throw std::invalid_argument("upsample: gradient length mismatch");
  Tensor dx(dy.batch, dy.length / p, dy.channels);
  for (int b = 0; b < dy.batch; ++b)
    for (int t = 0; t < dy.length; ++t)
      for (int c = 0; c < dy.channels; ++c) dx.at(b, t / p, c) += dy.at(b, t, c);
  return dx;
}

// ---- Crop

Crop::Crop(int l, int r) : left(l), right(r) {
  if (l < 0 || r < 0) throw std::invalid_argument("crop: negative margin");
}

Tensor Crop::infer(const Tensor& x) const {
  const int n = x.length - left - right;
  if (n < 1) throw std::invalid_argument("crop: input too short");
  Tensor y(x.batch, n, x.channels);
  for (int b = 0; b < x.batch; ++b)
    std::copy_n(x.sample(b) + std::size_t(left) * x.channels, std::size_t(n) * x.channels, y.sample(b));
  return y;
}

Tensor Crop::forward(const Tensor& x) {
  in_length_ = x.length;
  return infer(x);
}

Tensor Crop::backward(const Tensor& dy) {
  Tensor dx(dy.batch, in_length_, dy.channels);
  for (int b = 0; b < dy.batch; ++b)
    std::copy_n(dy.sample(b), std::size_t(dy.length) * dy.channels,
                dx.sample(b) + std::size_t(left) * dy.channels);
  return dx;
}

}  // namespace hifd::nn
