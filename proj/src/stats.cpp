#include "hifd/stats.hpp"

#include <cmath>
#include <limits>

namespace hifd {

double cross_correlation(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double cross_correlation(const WindowMatrix& a, const WindowMatrix& b) {
  if (a.n_steps != b.n_steps || a.values.size() != b.values.size())
    throw std::invalid_argument("cross_correlation: shape mismatch");
  return cross_correlation(a.values.data(), b.values.data(), a.values.size());
}

double kurtosis(const double* y, std::size_t n, std::size_t stride) {
  if (n < 4) throw std::invalid_argument("kurtosis: need at least 4 samples");
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += y[i * stride];
  mean /= double(n);
  double m2 = 0.0, m4 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = y[i * stride] - mean;
    const double d2 = d * d;
    m2 += d2;
    m4 += d2 * d2;
  }
  m2 /= double(n);
  m4 /= double(n);
  // relative floor so rounding noise on a constant series still counts as flat
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(y[i * stride]));
  if (!(m2 > 0.0) || std::sqrt(m2) <= 1e-12 * scale) throw DegenerateInput("kurtosis: zero variance");
  return m4 / (m2 * m2);
}

double kurtosis(const std::vector<double>& y) { return kurtosis(y.data(), y.size(), 1); }

WindowKurtosis window_kurtosis(const WindowMatrix& w) {
  WindowKurtosis k;
  bool any = false;
  k.aggregate = -std::numeric_limits<double>::infinity();
  for (int c = 0; c < kChannels; ++c) {
    try {
      k.per_channel[c] = kurtosis(w.values.data() + c, std::size_t(w.n_steps), kChannels);
      k.aggregate = std::max(k.aggregate, k.per_channel[c]);
      any = true;
    } catch (const DegenerateInput&) {
      k.per_channel[c] = std::numeric_limits<double>::quiet_NaN();
    }
  }
  if (!any) throw DegenerateInput("window_kurtosis: every channel is flat");
  return k;
}

}  // namespace hifd
