#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "hifd/stats.hpp"

using namespace hifd;

namespace {

WindowMatrix random_window(int n, std::mt19937_64& rng) {
  WindowMatrix w;
  w.n_steps = n;
  w.values.resize(std::size_t(n) * kChannels);
  std::normal_distribution<double> d;
  for (auto& v : w.values) v = d(rng);
  return w;
}

}  // namespace

TEST_SUITE("stats") {
  TEST_CASE("kurtosis of a large gaussian sample is three") {
    std::mt19937_64 rng(123);
    std::normal_distribution<double> d(2.0, 5.0);
    std::vector<double> y(1000000);
    for (auto& v : y) v = d(rng);
    CHECK(std::abs(kurtosis(y) - 3.0) < 0.05);
  }

  TEST_CASE("kurtosis of a full-cycle sinusoid is one and a half") {
    for (int n : {100, 166, 1000}) {
      std::vector<double> y(n);
      for (int i = 0; i < n; ++i) y[i] = 7.0 * std::sin(2 * std::numbers::pi * i / n + 0.3);
      CHECK(std::abs(kurtosis(y) - 1.5) < 0.01);
    }
  }

  TEST_CASE("kurtosis of a two-level sequence is one") {
    // population moments: m2 = 1, m4 = 1
    CHECK(kurtosis(std::vector<double>{1, -1, 1, -1}) == doctest::Approx(1.0));
  }

  TEST_CASE("kurtosis is invariant to scale and shift") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> a(-100, 100), u(-1, 1);
    std::exponential_distribution<double> e(1.0);
    for (int trial = 0; trial < 1000; ++trial) {
      std::vector<double> y(50);
      for (auto& v : y) v = trial % 2 ? e(rng) : u(rng);
      double scale = a(rng);
      if (std::abs(scale) < 0.01) scale = 0.5;
      const double shift = a(rng);
      std::vector<double> z(y.size());
      for (std::size_t i = 0; i < y.size(); ++i) z[i] = scale * y[i] + shift;
      CHECK(std::abs(kurtosis(z) - kurtosis(y)) < 1e-9 * std::max(1.0, kurtosis(y)));
    }
  }

  TEST_CASE("kurtosis rejects degenerate input") {
    CHECK_THROWS_AS(kurtosis(std::vector<double>{2, 2, 2, 2}), DegenerateInput);
    CHECK_THROWS_AS(kurtosis(std::vector<double>{1, 2}), std::invalid_argument);
    CHECK_THROWS_AS(kurtosis(std::vector<double>{1e9, 1e9, 1e9, 1e9 + 1e-6}), DegenerateInput);
  }

  TEST_CASE("window kurtosis aggregates with max and skips flat channels") {
    std::mt19937_64 rng(8);
    WindowMatrix w = random_window(100, rng);
    for (int t = 0; t < 100; ++t) w.at(t, 2) = 1.0;
    w.at(50, 4) = 80.0;
    const auto k = window_kurtosis(w);
    CHECK(std::isnan(k.per_channel[2]));
    CHECK(k.aggregate == doctest::Approx(k.per_channel[4]));
    for (int c : {0, 1, 3, 5}) CHECK(k.per_channel[c] < k.aggregate);
    WindowMatrix flat;
    flat.n_steps = 10;
    flat.values.assign(60, 0.5);
    CHECK_THROWS_AS(window_kurtosis(flat), DegenerateInput);
  }

  TEST_CASE("cross-correlation is symmetric and bilinear") {
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> s(-3, 3);
    for (int trial = 0; trial < 200; ++trial) {
      const auto a = random_window(20, rng), b = random_window(20, rng), c = random_window(20, rng);
      const double alpha = s(rng), beta = s(rng);
      WindowMatrix lin = a;
      for (std::size_t i = 0; i < lin.values.size(); ++i) lin.values[i] = alpha * a.values[i] + beta * b.values[i];
      const double ab = cross_correlation(a, b);
      CHECK(ab == doctest::Approx(cross_correlation(b, a)).epsilon(1e-12));
      const double lhs = cross_correlation(lin, c);
      const double rhs = alpha * cross_correlation(a, c) + beta * cross_correlation(b, c);
      CHECK(std::abs(lhs - rhs) < 1e-9 * (1 + std::abs(rhs)));
      CHECK(cross_correlation(a, a) > 0);
    }
  }

  TEST_CASE("cross-correlation sums over every step and channel") {
    WindowMatrix a, b;
    a.n_steps = b.n_steps = 1;
    a.values = {1, 2, 3, 4, 5, 6};
    b.values = {1, 1, 1, 1, 1, -1};
    CHECK(cross_correlation(a, b) == doctest::Approx(1 + 2 + 3 + 4 + 5 - 6));
    b.n_steps = 2;
    b.values.resize(12);
    CHECK_THROWS_AS(cross_correlation(a, b), std::invalid_argument);
  }
}
