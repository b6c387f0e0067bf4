#include "hifd/nn/grad_check.hpp"

#include <algorithm>
#include <cmath>

namespace hifd::nn {

double relative_error(double analytic, double numeric, double floor) {
  const double den = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / den;
}

GradCheckResult grad_check(Network& net, const Tensor& x, const Tensor& target, const GradCheckOptions& opt) {
  net.set_running_updates(false);
  GradCheckResult res;

  Tensor y = net.forward(x);
  const Tensor dx = net.backward(mse_grad(y, target));

  // mse(yp) - mse(ym) summed elementwise as (yp - ym)(yp + ym - 2t), avoiding cancellation.
  auto loss_delta = [&](const Tensor& yp, const Tensor& ym) {
    double s = 0.0;
    for (std::size_t i = 0; i < yp.size(); ++i)
      s += (yp.data[i] - ym.data[i]) * (yp.data[i] + ym.data[i] - 2.0 * target.data[i]);
    return s / double(yp.size());
  };
  auto record = [&](double a, double n, const std::string& name) {
    const double e = relative_error(a, n, opt.floor);
    ++res.checked;
    if (e > res.max_rel_error) {
      res.max_rel_error = e;
      res.worst = name;
    }
  };

  auto params = net.params();
  for (const auto& p : params) {
    const std::vector<double> analytic = *p.grad;
    std::vector<double>& w = *p.value;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double orig = w[i];
      w[i] = orig + opt.h;
      const Tensor yp = net.forward(x);
      w[i] = orig - opt.h;
      const Tensor ym = net.forward(x);
      w[i] = orig;
      record(analytic[i], loss_delta(yp, ym) / (2.0 * opt.h), p.name + "[" + std::to_string(i) + "]");
    }
  }
  if (opt.check_input) {
    Tensor xi = x;
    for (std::size_t i = 0; i < xi.size(); ++i) {
      const double orig = xi.data[i];
      xi.data[i] = orig + opt.h;
      const Tensor yp = net.forward(xi);
      xi.data[i] = orig - opt.h;
      const Tensor ym = net.forward(xi);
      xi.data[i] = orig;
      record(dx.data[i], loss_delta(yp, ym) / (2.0 * opt.h), "input[" + std::to_string(i) + "]");
    }
  }
  net.set_running_updates(true);
  return res;
}

}  // namespace hifd::nn
