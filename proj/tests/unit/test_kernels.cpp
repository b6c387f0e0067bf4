#include <doctest.h>

#include <random>
#include <vector>

#include "hifd/nn/kernels.hpp"

using hifd::nn::ConvShape;
namespace serial = hifd::nn::serial;
namespace parallel = hifd::nn::parallel;

namespace {

std::vector<double> randn(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> d;
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

ConvShape same_shape(int batch, int len, int ci, int co, int k) {
  ConvShape s;
  s.batch = batch;
  s.len_in = len;
  s.ch_in = ci;
  s.ch_out = co;
  s.k = k;
  s.pad_left = (k - 1) / 2;
  s.len_out = len;
  return s;
}

}  // namespace

TEST_SUITE("kernels") {
  TEST_CASE("serial forward matches a hand-worked convolution") {
    // one channel in, one out, k = 3, same padding
    ConvShape s = same_shape(1, 4, 1, 1, 3);
    std::vector<double> x{1, 2, 3, 4}, w{1, 0, -1}, b{0.5}, y(4);
    serial::conv1d_forward(s, x.data(), w.data(), b.data(), y.data());
    // y[t] = x[t-1] - x[t+1] + 0.5
    CHECK(y[0] == doctest::Approx(0 - 2 + 0.5));
    CHECK(y[1] == doctest::Approx(1 - 3 + 0.5));
    CHECK(y[2] == doctest::Approx(2 - 4 + 0.5));
    CHECK(y[3] == doctest::Approx(3 - 0 + 0.5));
  }

  TEST_CASE("serial backward kernels are adjoint to the forward map") {
    std::mt19937_64 rng(3);
    ConvShape s = same_shape(2, 9, 3, 4, 3);
    auto x = randn(s.in_size(), rng), w = randn(s.weight_size(), rng), dy = randn(s.out_size(), rng);
    std::vector<double> zero_b(s.ch_out, 0.0), y(s.out_size()), dx(s.in_size()), dw(s.weight_size()),
        db(s.ch_out);
    serial::conv1d_forward(s, x.data(), w.data(), zero_b.data(), y.data());
    serial::conv1d_backward_input(s, dy.data(), w.data(), dx.data());
    serial::conv1d_backward_weights(s, x.data(), dy.data(), dw.data(), db.data());
    double lhs = 0, rhs_x = 0, rhs_w = 0;
    for (std::size_t i = 0; i < y.size(); ++i) lhs += y[i] * dy[i];
    for (std::size_t i = 0; i < x.size(); ++i) rhs_x += x[i] * dx[i];
    for (std::size_t i = 0; i < w.size(); ++i) rhs_w += w[i] * dw[i];
    // <conv(x), dy> = <x, conv^T dy> = <w, dW>
    CHECK(lhs == doctest::Approx(rhs_x).epsilon(1e-12));
    CHECK(lhs == doctest::Approx(rhs_w).epsilon(1e-12));
    double sum_dy0 = 0;
    for (int b = 0; b < s.batch; ++b)
      for (int t = 0; t < s.len_out; ++t) sum_dy0 += dy[(std::size_t(b) * s.len_out + t) * s.ch_out];
    CHECK(db[0] == doctest::Approx(sum_dy0));
  }

  TEST_CASE("parallel kernels agree with the serial reference") {
    std::mt19937_64 rng(11);
    struct Dims {
      int batch, len, ci, co, k, pad;
    };
    const std::vector<Dims> cases = {
        {1, 5, 1, 1, 3, 1},     {3, 17, 6, 7, 3, 1},   {2, 33, 5, 40, 3, 1},  {4, 83, 16, 6, 3, 1},
        {2, 166, 6, 256, 3, 1}, {2, 42, 128, 128, 3, 1}, {3, 20, 9, 33, 5, 2}, {2, 20, 4, 5, 1, 0},
        {2, 31, 7, 35, 3, 0},   {1, 64, 256, 6, 3, 1},
    };
    for (const auto& d : cases) {
      CAPTURE(d.len);
      CAPTURE(d.ci);
      CAPTURE(d.co);
      ConvShape s;
      s.batch = d.batch;
      s.len_in = d.len;
      s.ch_in = d.ci;
      s.ch_out = d.co;
      s.k = d.k;
      s.pad_left = d.pad;
      s.len_out = d.pad == (d.k - 1) / 2 ? d.len : d.len - d.k + 1;
      auto x = randn(s.in_size(), rng), w = randn(s.weight_size(), rng), b = randn(s.ch_out, rng),
           dy = randn(s.out_size(), rng);
      std::vector<double> y1(s.out_size()), y2(s.out_size()), dx1(s.in_size()), dx2(s.in_size()),
          dw1(s.weight_size()), dw2(s.weight_size()), db1(s.ch_out), db2(s.ch_out);
      serial::conv1d_forward(s, x.data(), w.data(), b.data(), y1.data());
      parallel::conv1d_forward(s, x.data(), w.data(), b.data(), y2.data());
      serial::conv1d_backward_input(s, dy.data(), w.data(), dx1.data());
      parallel::conv1d_backward_input(s, dy.data(), w.data(), dx2.data());
      serial::conv1d_backward_weights(s, x.data(), dy.data(), dw1.data(), db1.data());
      parallel::conv1d_backward_weights(s, x.data(), dy.data(), dw2.data(), db2.data());
      CHECK(max_abs_diff(y1, y2) < 1e-10);
      CHECK(max_abs_diff(dx1, dx2) < 1e-10);
      CHECK(max_abs_diff(dw1, dw2) < 1e-9);
      CHECK(max_abs_diff(db1, db2) < 1e-10);
    }
  }

  TEST_CASE("parallel backward weights is deterministic") {
    std::mt19937_64 rng(5);
    ConvShape s = same_shape(16, 83, 64, 32, 3);
    auto x = randn(s.in_size(), rng), dy = randn(s.out_size(), rng);
    std::vector<double> a(s.weight_size()), b(s.weight_size()), da(s.ch_out), dbb(s.ch_out);
    parallel::conv1d_backward_weights(s, x.data(), dy.data(), a.data(), da.data());
    parallel::conv1d_backward_weights(s, x.data(), dy.data(), b.data(), dbb.data());
    CHECK(a == b);
    CHECK(da == dbb);
  }
}
