#pragma once

#include <string>

#include "hifd/nn/network.hpp"

namespace hifd::nn {

struct GradCheckOptions {
  double h = 1e-5;
  // Denominator floor for the relative error, so near-zero gradients compare absolutely.
  double floor = 1e-8;
  bool check_input = true;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::string worst;
};

// Central differences of mse(net.forward(x), target) against backprop, over every
// parameter and (optionally) every input element. Training-mode forward throughout;
// batch-norm running statistics are left untouched.
GradCheckResult grad_check(Network& net, const Tensor& x, const Tensor& target,
                           const GradCheckOptions& opt = {});

double relative_error(double analytic, double numeric, double floor);

}  // namespace hifd::nn
