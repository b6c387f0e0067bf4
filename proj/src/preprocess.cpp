#include "hifd/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hifd {

void WindowingPolicy::validate() const {
  if (order < 0 || order > 2) throw std::invalid_argument("windowing: differencing order must be 0, 1 or 2");
  if (raw_window <= order + 1) throw std::invalid_argument("windowing: raw window too short");
  if (stride < 1 || stride > raw_window) throw std::invalid_argument("windowing: stride must lie in [1, raw_window]");
}

WindowingPolicy training_policy() { return {}; }

WindowingPolicy online_policy() {
  WindowingPolicy p;
  p.stride = 1;
  return p;
}

std::vector<double> WindowMatrix::channel(int c) const {
  std::vector<double> out(n_steps);
  for (int t = 0; t < n_steps; ++t) out[t] = at(t, c);
  return out;
}

std::vector<double> difference(const std::vector<double>& series, int order) {
  if (order < 0) throw std::invalid_argument("difference: negative order");
  if (series.size() <= std::size_t(order)) throw std::invalid_argument("difference: series too short");
  std::vector<double> out = series;
  for (int o = 0; o < order; ++o) {
    for (std::size_t i = 0; i + 1 < out.size(); ++i) out[i] = out[i + 1] - out[i];
    out.pop_back();
  }
  return out;
}

std::size_t window_count(std::size_t n, const WindowingPolicy& policy) {
  if (n < std::size_t(policy.raw_window)) return 0;
  return (n - policy.raw_window) / policy.stride + 1;
}

WindowMatrix window_at(const WaveformRecord& rec, const WindowingPolicy& policy, std::size_t start) {
  if (start + policy.raw_window > rec.size()) throw std::invalid_argument("window: start past end of record");
  WindowMatrix w;
  w.n_steps = policy.steps();
  w.start = start;
  w.values.assign(std::size_t(w.n_steps) * kChannels, 0.0);
  std::vector<double> buf(policy.raw_window);
  for (int c = 0; c < kChannels; ++c) {
    std::copy_n(rec.channels[c].begin() + std::ptrdiff_t(start), policy.raw_window, buf.begin());
    for (int o = 0; o < policy.order; ++o)
      for (int i = 0; i + 1 + o < policy.raw_window; ++i) buf[i] = buf[i + 1] - buf[i];
    for (int t = 0; t < w.n_steps; ++t) w.at(t, c) = buf[t];
  }
  return w;
}

std::vector<WindowMatrix> window(const WaveformRecord& rec, const WindowingPolicy& policy,
                                 const std::string& record_id) {
  policy.validate();
  for (const auto& ch : rec.channels)
    if (ch.size() != rec.size()) throw std::invalid_argument("window: channel lengths differ");
  if (rec.size() < std::size_t(policy.raw_window)) throw std::invalid_argument("window: record shorter than raw window");
  const std::size_t count = window_count(rec.size(), policy);
  const std::size_t incep =
      std::size_t(std::max(0.0, std::ceil(rec.scenario.inception_time * rec.sample_rate - 1e-9)));
  std::vector<WindowMatrix> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t s = i * policy.stride;
    WindowMatrix w = window_at(rec, policy, s);
    w.record_id = record_id;
    if (rec.label == Label::fault) {
      const std::size_t end = s + policy.raw_window;
      const std::size_t post = incep <= s ? policy.raw_window : (incep >= end ? 0 : end - incep);
      w.label = 2 * post >= std::size_t(policy.raw_window) ? Label::fault : Label::non_fault;
    } else {
      w.label = Label::non_fault;
    }
    out.push_back(std::move(w));
  }
  return out;
}

nn::Tensor to_tensor(const std::vector<const WindowMatrix*>& windows) {
  if (windows.empty()) return nn::Tensor(0, 0, kChannels);
  const int n = windows.front()->n_steps;
  nn::Tensor t(int(windows.size()), n, kChannels);
  for (std::size_t b = 0; b < windows.size(); ++b) {
    if (windows[b]->n_steps != n) throw std::invalid_argument("to_tensor: windows differ in length");
    std::copy(windows[b]->values.begin(), windows[b]->values.end(), t.sample(int(b)));
  }
  return t;
}

nn::Tensor to_tensor(const std::vector<WindowMatrix>& windows) {
  std::vector<const WindowMatrix*> p;
  for (const auto& w : windows) p.push_back(&w);
  return to_tensor(p);
}

WindowMatrix from_tensor(const nn::Tensor& t, int b) {
  if (t.channels != kChannels) throw std::invalid_argument("from_tensor: expected 6 channels");
  WindowMatrix w;
  w.n_steps = t.length;
  w.values.assign(t.sample(b), t.sample(b) + std::size_t(t.length) * kChannels);
  return w;
}

}  // namespace hifd
