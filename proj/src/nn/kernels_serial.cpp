#include "hifd/nn/kernels.hpp"

namespace hifd::nn::serial {

void conv1d_forward(const ConvShape& s, const double* x, const double* w, const double* b, double* y) {
  for (int n = 0; n < s.batch; ++n) {
    const double* xn = x + std::size_t(n) * s.len_in * s.ch_in;
    double* yn = y + std::size_t(n) * s.len_out * s.ch_out;
    for (int t = 0; t < s.len_out; ++t) {
      for (int co = 0; co < s.ch_out; ++co) {
        double acc = b ? b[co] : 0.0;
        for (int j = 0; j < s.k; ++j) {
          int src = t + j - s.pad_left;
          if (src < 0 || src >= s.len_in) continue;
          for (int ci = 0; ci < s.ch_in; ++ci)
            acc += xn[std::size_t(src) * s.ch_in + ci] * w[(std::size_t(j) * s.ch_in + ci) * s.ch_out + co];
        }
        yn[std::size_t(t) * s.ch_out + co] = acc;
      }
    }
  }
}

void conv1d_backward_input(const ConvShape& s, const double* dy, const double* w, double* dx) {
  for (std::size_t i = 0; i < s.in_size(); ++i) dx[i] = 0.0;
  for (int n = 0; n < s.batch; ++n) {
    const double* dyn = dy + std::size_t(n) * s.len_out * s.ch_out;
    double* dxn = dx + std::size_t(n) * s.len_in * s.ch_in;
    for (int t = 0; t < s.len_out; ++t)
      for (int j = 0; j < s.k; ++j) {
        int src = t + j - s.pad_left;
        if (src < 0 || src >= s.len_in) continue;
        for (int ci = 0; ci < s.ch_in; ++ci) {
          double acc = 0.0;
          for (int co = 0; co < s.ch_out; ++co)
            acc += dyn[std::size_t(t) * s.ch_out + co] * w[(std::size_t(j) * s.ch_in + ci) * s.ch_out + co];
          dxn[std::size_t(src) * s.ch_in + ci] += acc;
        }
      }
  }
}

void conv1d_backward_weights(const ConvShape& s, const double* x, const double* dy, double* dw,
                             double* db) {
  for (std::size_t i = 0; i < s.weight_size(); ++i) dw[i] = 0.0;
  if (db)
    for (int co = 0; co < s.ch_out; ++co) db[co] = 0.0;
  for (int n = 0; n < s.batch; ++n) {
    const double* xn = x + std::size_t(n) * s.len_in * s.ch_in;
    const double* dyn = dy + std::size_t(n) * s.len_out * s.ch_out;
    for (int t = 0; t < s.len_out; ++t) {
      if (db)
        for (int co = 0; co < s.ch_out; ++co) db[co] += dyn[std::size_t(t) * s.ch_out + co];
      for (int j = 0; j < s.k; ++j) {
        int src = t + j - s.pad_left;
        if (src < 0 || src >= s.len_in) continue;
        for (int ci = 0; ci < s.ch_in; ++ci) {
          double xv = xn[std::size_t(src) * s.ch_in + ci];
          double* row = dw + (std::size_t(j) * s.ch_in + ci) * s.ch_out;
          for (int co = 0; co < s.ch_out; ++co) row[co] += xv * dyn[std::size_t(t) * s.ch_out + co];
        }
      }
    }
  }
}

}  // namespace hifd::nn::serial
