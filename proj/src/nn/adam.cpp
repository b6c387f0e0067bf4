#include "hifd/nn/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace hifd::nn {

void adam_update(std::vector<double>& w, const std::vector<double>& g, std::vector<double>& m,
                 std::vector<double>& v, std::int64_t step, const AdamConfig& cfg) {
  if (w.size() != g.size() || w.size() != m.size() || w.size() != v.size())
    throw std::invalid_argument("adam: shape mismatch");
  if (step < 1) throw std::invalid_argument("adam: step must be positive");
  const double c1 = 1.0 - std::pow(cfg.beta1, double(step));
  const double c2 = 1.0 - std::pow(cfg.beta2, double(step));
  for (std::size_t i = 0; i < w.size(); ++i) {
    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
    v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
    const double mh = m[i] / c1;
    const double vh = v[i] / c2;
    w[i] -= cfg.lr * mh / (std::sqrt(vh) + cfg.eps);
  }
}

void adam_step(const std::vector<ParamView>& params, AdamState& state) {
  if (state.m.empty()) {
    for (const auto& p : params) {
      state.m.emplace_back(p.value->size(), 0.0);
      state.v.emplace_back(p.value->size(), 0.0);
    }
  }
  if (state.m.size() != params.size()) throw std::invalid_argument("adam: parameter list changed");
  ++state.step;
  for (std::size_t i = 0; i < params.size(); ++i)
    adam_update(*params[i].value, *params[i].grad, state.m[i], state.v[i], state.step, state.cfg);
}

}  // namespace hifd::nn
