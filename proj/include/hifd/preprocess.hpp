#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hifd/nn/tensor.hpp"
#include "hifd/wavegen.hpp"

namespace hifd {

constexpr int kChannels = 6;

struct WindowingPolicy {
  int raw_window = 168;
  int stride = 166;
  int order = 2;  // 0 keeps raw samples

  void validate() const;
  int steps() const { return raw_window - order; }
};

WindowingPolicy training_policy();
WindowingPolicy online_policy();

// n_steps x 6 values, row-major (step, channel).
struct WindowMatrix {
  int n_steps = 0;
  std::vector<double> values;
  std::string record_id;
  std::size_t start = 0;
  std::optional<Label> label;

  double at(int t, int c) const { return values[std::size_t(t) * kChannels + c]; }
  double& at(int t, int c) { return values[std::size_t(t) * kChannels + c]; }
  std::vector<double> channel(int c) const;
};

std::vector<double> difference(const std::vector<double>& series, int order);

std::size_t window_count(std::size_t n, const WindowingPolicy& policy);

// Cuts windows at 0, s, 2s, ... then differences each channel inside its window.
// Fault records label a window fault when at least half its raw samples are at or after inception.
std::vector<WindowMatrix> window(const WaveformRecord& rec, const WindowingPolicy& policy,
                                 const std::string& record_id = "");

// Single window starting at `start`.
WindowMatrix window_at(const WaveformRecord& rec, const WindowingPolicy& policy, std::size_t start);

nn::Tensor to_tensor(const std::vector<WindowMatrix>& windows);
nn::Tensor to_tensor(const std::vector<const WindowMatrix*>& windows);
WindowMatrix from_tensor(const nn::Tensor& t, int b);

}  // namespace hifd
