#include <doctest.h>

#include <random>

#include "hifd/preprocess.hpp"

using namespace hifd;

namespace {

WaveformRecord ramp_record(std::size_t n, double inception = 0.0, bool fault = false) {
  WaveformRecord r;
  r.sample_rate = 10000.0;
  r.t.resize(n);
  for (std::size_t i = 0; i < n; ++i) r.t[i] = double(i) / r.sample_rate;
  for (int c = 0; c < 6; ++c) {
    r.channels[c].resize(n);
    for (std::size_t i = 0; i < n; ++i) r.channels[c][i] = double(i * i) * (c + 1) + 3.0 * i;
  }
  r.scenario.kind = fault ? ScenarioKind::hif : ScenarioKind::steady;
  r.scenario.inception_time = inception;
  r.label = fault ? Label::fault : Label::non_fault;
  return r;
}

}  // namespace

TEST_SUITE("preprocess") {
  TEST_CASE("second difference of a quadratic is constant") {
    std::vector<double> q(10);
    for (int i = 0; i < 10; ++i) q[i] = 3.0 * i * i - 2.0 * i + 1.0;
    const auto d2 = difference(q, 2);
    REQUIRE(d2.size() == 8);
    for (double v : d2) CHECK(v == doctest::Approx(6.0));
    const auto d1 = difference(std::vector<double>{1, 4, 9, 16}, 1);
    CHECK(d1 == std::vector<double>{3, 5, 7});
    CHECK(difference(q, 0) == q);
    CHECK_THROWS(difference(std::vector<double>{1, 2}, 2));
  }

  TEST_CASE("window counts") {
    CHECK(window_count(1700, training_policy()) == 10);
    CHECK(window_count(168, training_policy()) == 1);
    CHECK(window_count(167, training_policy()) == 0);
    CHECK(window_count(2500, online_policy()) == 2500 - 168 + 1);
    CHECK(training_policy().steps() == 166);
  }

  TEST_CASE("windows difference each channel inside the window") {
    const auto rec = ramp_record(400);
    const auto ws = window(rec, training_policy(), "r");
    REQUIRE(ws.size() == 2);
    CHECK(ws[1].start == 166);
    CHECK(ws[1].n_steps == 166);
    for (int c = 0; c < 6; ++c)
      for (int t = 0; t < 166; t += 33) CHECK(ws[1].at(t, c) == doctest::Approx(2.0 * (c + 1)));
    const auto one = window_at(rec, training_policy(), 166);
    CHECK(one.values == ws[1].values);
  }

  TEST_CASE("fault label needs half the raw window at or after inception") {
    // window 1 spans samples 166..333; inception at sample 250 covers 84 of 168
    auto rec = ramp_record(600, 250 / 10000.0, true);
    auto ws = window(rec, training_policy());
    CHECK(ws[0].label == Label::non_fault);
    CHECK(ws[1].label == Label::fault);
    rec.scenario.inception_time = 251 / 10000.0;
    ws = window(rec, training_policy());
    CHECK(ws[1].label == Label::non_fault);
    CHECK(ws[2].label == Label::fault);
    const auto steady = window(ramp_record(600), training_policy());
    for (const auto& w : steady) CHECK(w.label == Label::non_fault);
  }

  TEST_CASE("tensor round trip") {
    const auto ws = window(ramp_record(500), training_policy());
    const auto t = to_tensor(ws);
    CHECK(t.batch == int(ws.size()));
    CHECK(t.length == 166);
    CHECK(t.channels == 6);
    for (int b = 0; b < t.batch; ++b) CHECK(from_tensor(t, b).values == ws[b].values);
  }

  TEST_CASE("policy validation") {
    WindowingPolicy p;
    p.stride = 0;
    CHECK_THROWS(p.validate());
    p = training_policy();
    p.order = 3;
    CHECK_THROWS(p.validate());
    p.order = 0;
    CHECK_NOTHROW(p.validate());
    CHECK(p.steps() == 168);
  }
}
