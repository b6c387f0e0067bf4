#pragma once

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "hifd/nn/kernels.hpp"
#include "hifd/nn/tensor.hpp"

namespace hifd::nn {

enum class Backend { serial, parallel };
enum class Padding { valid, same };

struct ParamView {
  std::string name;
  std::vector<double>* value;
  std::vector<double>* grad;
};

// forward() is the training pass and caches what backward() needs.
// infer() is const and leaves the layer untouched.
class Layer {
 public:
  virtual ~Layer() = default;
  virtual std::string kind() const = 0;
  virtual Tensor forward(const Tensor& x) = 0;
  virtual Tensor infer(const Tensor& x) const = 0;
  virtual Tensor backward(const Tensor& dy) = 0;
  virtual std::vector<ParamView> params() { return {}; }
  virtual std::unique_ptr<Layer> clone() const = 0;
};

class Conv1d : public Layer {
 public:
  Conv1d(int in_channels, int out_channels, int k, Padding padding);

  std::string kind() const override { return "conv1d"; }
  Tensor forward(const Tensor& x) override;
  Tensor infer(const Tensor& x) const override;
  Tensor backward(const Tensor& dy) override;
  std::vector<ParamView> params() override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Conv1d>(*this); }

  // Uniform in [-bound, bound] with bound = sqrt(gain / fan_in); bias zero.
  void init_uniform(std::mt19937_64& rng, double gain);
  ConvShape shape_for(const Tensor& x) const;

  int in_channels, out_channels, k;
  Padding padding;
  Backend backend = Backend::parallel;
  std::vector<double> weight;  // [k][in][out]
  std::vector<double> bias;
  std::vector<double> grad_weight, grad_bias;

 private:
  Tensor input_;
};

class LeakyRelu : public Layer {
 public:
  explicit LeakyRelu(double alpha = 0.01);
  std::string kind() const override { return "leaky_relu"; }
  Tensor forward(const Tensor& x) override;
  Tensor infer(const Tensor& x) const override;
  Tensor backward(const Tensor& dy) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<LeakyRelu>(*this); }

  double alpha;

 private:
  Tensor input_;
};

// Per-channel normalization over batch and time.
class BatchNorm : public Layer {
 public:
  explicit BatchNorm(int channels, double momentum = 0.9, double eps = 1e-8);
  std::string kind() const override { return "batch_norm"; }
  Tensor forward(const Tensor& x) override;
  Tensor infer(const Tensor& x) const override;
  Tensor backward(const Tensor& dy) override;
  std::vector<ParamView> params() override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<BatchNorm>(*this); }

  int channels;
  double momentum, eps;
  bool update_running = true;
  std::vector<double> gamma, beta, running_mean, running_var;
  std::vector<double> grad_gamma, grad_beta;

 private:
  Tensor xhat_;
  std::vector<double> inv_std_;
};

// Ceil mode: a trailing partial window pools whatever it covers.
class MaxPool : public Layer {
 public:
  explicit MaxPool(int p);
  std::string kind() const override { return "max_pool"; }
  Tensor forward(const Tensor& x) override;
  Tensor infer(const Tensor& x) const override;
  Tensor backward(const Tensor& dy) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<MaxPool>(*this); }

  // Pools x; argmax input positions written to idx when non-null.
  Tensor pool(const Tensor& x, std::vector<int>* idx) const;

  int p;

 private:
  std::vector<int> argmax_;
  int in_length_ = 0;
};

class Upsample : public Layer {
 public:
  explicit Upsample(int p);
  std::string kind() const override { return "upsample"; }
  Tensor forward(const Tensor& x) override;
  Tensor infer(const Tensor& x) const override;
  Tensor backward(const Tensor& dy) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Upsample>(*this); }

  int p;
};

// Drops `left` leading and `right` trailing steps.
class Crop : public Layer {
 public:
  Crop(int left, int right);
  std::string kind() const override { return "crop"; }
  Tensor forward(const Tensor& x) override;
  Tensor infer(const Tensor& x) const override;
  Tensor backward(const Tensor& dy) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Crop>(*this); }

  int left, right;

 private:
  int in_length_ = 0;
};

int pooled_length(int n, int p);

}  // namespace hifd::nn

namespace hifd::nn {

Tensor leaky_relu(const Tensor& x, double alpha);
std::pair<Tensor, std::vector<int>> max_pool(const Tensor& x, int p);
Tensor upsample(const Tensor& x, int p);

}  // namespace hifd::nn
