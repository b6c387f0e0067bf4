#pragma once

#include <array>
#include <stdexcept>
#include <vector>

#include "hifd/preprocess.hpp"

namespace hifd {

struct DegenerateInput : std::domain_error {
  using std::domain_error::domain_error;
};

// Zero-lag inner product summed over steps and channels.
double cross_correlation(const WindowMatrix& a, const WindowMatrix& b);
double cross_correlation(const double* a, const double* b, std::size_t n);

// Non-excess kurtosis with population moments. Throws DegenerateInput on zero variance.
double kurtosis(const std::vector<double>& y);
double kurtosis(const double* y, std::size_t n, std::size_t stride = 1);

struct WindowKurtosis {
  std::array<double, kChannels> per_channel{};  // NaN for a flat channel
  double aggregate = 0.0;                        // max over defined channels
};

WindowKurtosis window_kurtosis(const WindowMatrix& w);

struct WindowStats {
  double cc = 0.0;
  WindowKurtosis k;
};

}  // namespace hifd
