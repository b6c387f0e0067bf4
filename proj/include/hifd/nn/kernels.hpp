#pragma once

#include <cstddef>

namespace hifd::nn {

// Geometry of a batched 1D convolution over (batch, length, channels) row-major data.
// Weights are laid out [k][ch_in][ch_out].
struct ConvShape {
  int batch = 1;
  int len_in = 0;
  int ch_in = 0;
  int ch_out = 0;
  int k = 1;
  int pad_left = 0;
  int len_out = 0;

  std::size_t in_size() const { return std::size_t(batch) * len_in * ch_in; }
  std::size_t out_size() const { return std::size_t(batch) * len_out * ch_out; }
  std::size_t weight_size() const { return std::size_t(k) * ch_in * ch_out; }
};

// Plain loops straight from the definition. Used as the test oracle.
namespace serial {
void conv1d_forward(const ConvShape& s, const double* x, const double* w, const double* b, double* y);
void conv1d_backward_input(const ConvShape& s, const double* dy, const double* w, double* dx);
void conv1d_backward_weights(const ConvShape& s, const double* x, const double* dy, double* dw,
                             double* db);
}  // namespace serial

// Register-blocked, OpenMP-parallel versions. Reductions run in a fixed order
// so results do not depend on the thread count.
namespace parallel {
void conv1d_forward(const ConvShape& s, const double* x, const double* w, const double* b, double* y);
void conv1d_backward_input(const ConvShape& s, const double* dy, const double* w, double* dx);
void conv1d_backward_weights(const ConvShape& s, const double* x, const double* dy, double* dw,
                             double* db);
}  // namespace parallel

}  // namespace hifd::nn
