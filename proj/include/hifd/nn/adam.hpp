#pragma once

#include <cstdint>
#include <vector>

#include "hifd/nn/layers.hpp"

namespace hifd::nn {

struct AdamConfig {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamConfig cfg;
  std::int64_t step = 0;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
};

// Bias-corrected Adam over every parameter view, moments matched by position.
void adam_step(const std::vector<ParamView>& params, AdamState& state);

// Same update on a single flat array, moments supplied by the caller. `step` is already incremented.
void adam_update(std::vector<double>& w, const std::vector<double>& g, std::vector<double>& m,
                 std::vector<double>& v, std::int64_t step, const AdamConfig& cfg);

}  // namespace hifd::nn
