#include <doctest.h>

#include <cmath>
#include <random>

#include "hifd/cae.hpp"
#include "hifd/nn/grad_check.hpp"

using namespace hifd;

namespace {

CaeTopology small_topology(int steps = 166) {
  CaeTopology t;
  t.input_steps = steps;
  t.filters = {8, 6, 6, 8};
  return t;
}

// Sinusoid mixtures standing in for differenced fault windows.
std::vector<WindowMatrix> toy_windows(int count, int steps, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ph(0, 6.283), amp(0.5, 2.0);
  std::vector<WindowMatrix> out;
  for (int i = 0; i < count; ++i) {
    WindowMatrix w;
    w.n_steps = steps;
    w.values.resize(std::size_t(steps) * kChannels);
    w.label = Label::fault;
    w.record_id = "toy";
    for (int c = 0; c < kChannels; ++c) {
      const double p = ph(rng), a = amp(rng);
      for (int t = 0; t < steps; ++t) w.at(t, c) = a * std::sin(0.2 * t + p);
    }
    out.push_back(std::move(w));
  }
  return out;
}

std::size_t conv_params(int ci, int co, int k) { return std::size_t(k) * ci * co + co; }

}  // namespace

TEST_SUITE("cae") {
  TEST_CASE("default topology keeps the window shape") {
    CaeModel m = init_cae(CaeTopology{}, 1);
    nn::Tensor x(2, 166, 6, 0.5);
    const auto y = m.net.infer(x);
    CHECK(y.length == 166);
    CHECK(y.channels == 6);
    const std::size_t expect = conv_params(6, 256, 3) + 2 * 256 + conv_params(256, 128, 3) + 2 * 128 +
                               conv_params(128, 128, 3) + conv_params(128, 256, 3) + conv_params(256, 6, 3);
    CHECK(m.net.param_count() == expect);
    CaeTopology raw;
    raw.input_steps = 168;
    CHECK(init_cae(raw, 1).net.infer(nn::Tensor(1, 168, 6, 0.1)).length == 168);
  }

  TEST_CASE("initial weights respect the uniform bounds") {
    CaeModel m = init_cae(small_topology(), 3);
    std::vector<nn::Conv1d*> convs;
    for (std::size_t i = 0; i < m.net.size(); ++i)
      if (auto* c = dynamic_cast<nn::Conv1d*>(&m.net.layer(i))) convs.push_back(c);
    REQUIRE(convs.size() == 5);
    for (std::size_t i = 0; i < convs.size(); ++i) {
      const double fan_in = double(convs[i]->k * convs[i]->in_channels);
      const double bound = std::sqrt((i + 1 == convs.size() ? 3.0 : 6.0) / fan_in);
      double mx = 0;
      for (double w : convs[i]->weight) mx = std::max(mx, std::abs(w));
      CHECK(mx <= bound);
      CHECK(mx > 0.5 * bound);
      for (double b : convs[i]->bias) CHECK(b == 0.0);
    }
  }

  TEST_CASE("reduced-width autoencoder passes the gradient check") {
    CaeTopology t;
    t.input_steps = 22;
    t.filters = {4, 3, 3, 4};
    for (auto backend : {nn::Backend::serial, nn::Backend::parallel}) {
      CaeModel m = init_cae(t, 5);
      m.net.set_backend(backend);
      std::mt19937_64 rng(6);
      std::normal_distribution<double> d;
      nn::Tensor x(3, 22, 6), target(3, 22, 6);
      for (auto& v : x.data) v = d(rng);
      for (auto& v : target.data) v = d(rng);
      const auto r = nn::grad_check(m.net, x, target);
      CAPTURE(r.worst);
      CHECK(r.checked == m.net.param_count() + x.size());
      CHECK(r.max_rel_error < 1e-4);
    }
  }

  TEST_CASE("serial and parallel backends agree") {
    CaeModel a = init_cae(small_topology(), 8);
    CaeModel b = a;
    a.net.set_backend(nn::Backend::serial);
    b.net.set_backend(nn::Backend::parallel);
    const auto ws = toy_windows(4, 166, 1);
    const auto x = to_tensor(ws);
    const auto ya = a.net.forward(x), yb = b.net.forward(x);
    double diff = 0;
    for (std::size_t i = 0; i < ya.size(); ++i) diff = std::max(diff, std::abs(ya.data[i] - yb.data[i]));
    CHECK(diff < 1e-10);
  }

  TEST_CASE("training lowers the loss, restores the best epoch and is reproducible") {
    const auto ws = toy_windows(64, 166, 2);
    TrainConfig cfg;
    cfg.epochs = 6;
    cfg.batch = 8;
    cfg.seed = 4;
    const CaeModel m1 = train(ws, cfg, small_topology());
    const CaeModel m2 = train(ws, cfg, small_topology());
    CHECK(model_to_json(m1).dump() == model_to_json(m2).dump());
    REQUIRE(m1.training.curve.size() == 6);
    CHECK(m1.training.curve.back().train_mse < m1.training.curve.front().train_mse);
    double best = 1e300;
    int best_epoch = 0;
    for (const auto& p : m1.training.curve)
      if (p.val_mse < best) best = p.val_mse, best_epoch = p.epoch;
    CHECK(m1.training.best_epoch == best_epoch);
    CHECK(m1.training.best_val_mse == best);
    CHECK(m1.training.train_windows + m1.training.val_windows == 64);
    CHECK(m1.training.val_windows == 6);
    CHECK(curve_csv(m1.training).rfind("epoch,train_mse,val_mse\n1,", 0) == 0);
  }

  TEST_CASE("early stopping halts after the patience runs out") {
    const auto ws = toy_windows(40, 166, 3);
    TrainConfig cfg;
    cfg.epochs = 50;
    cfg.batch = 8;
    cfg.patience = 1;
    cfg.lr = 0.5;  // unstable on purpose so validation stops improving
    CaeModel m = init_cae(small_topology(), 2);
    try {
      train_model(m, ws, cfg);
    } catch (const std::runtime_error&) {
      return;  // diverged: also a stop
    }
    CHECK(m.training.epochs_run < 50);
    CHECK(m.training.epochs_run == m.training.best_epoch + 1);
  }

  TEST_CASE("training rejects bad inputs") {
    auto ws = toy_windows(40, 166, 3);
    TrainConfig cfg;
    cfg.epochs = 1;
    ws[3].label = Label::non_fault;
    CHECK_THROWS_AS(train(ws, cfg, small_topology()), std::invalid_argument);
    CHECK_THROWS_AS(train(toy_windows(40, 100, 1), cfg, small_topology()), std::invalid_argument);
    CHECK_THROWS_AS(train(toy_windows(10, 166, 1), cfg, small_topology()), std::invalid_argument);
    cfg.batch = 1;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  }

  TEST_CASE("model json round trip and validation") {
    CaeModel m = init_cae(small_topology(), 9);
    m.training.train_records = {1, 5, 7};
    m.net.forward(to_tensor(toy_windows(4, 166, 5)));
    const auto j = model_to_json(m);
    const CaeModel back = model_from_json(j);
    CHECK(model_to_json(back).dump() == j.dump());
    CHECK(back.training.train_records == std::vector<std::size_t>{1, 5, 7});
    const auto w = toy_windows(1, 166, 6);
    CHECK(reconstruct(back, w[0]).values == reconstruct(m, w[0]).values);
    auto bad = j;
    bad["version"] = 2;
    CHECK_THROWS_WITH(model_from_json(bad), doctest::Contains("version"));
    bad = j;
    bad["format"] = "other";
    CHECK_THROWS(model_from_json(bad));
    bad = j;
    bad["topology"]["input_steps"] = 168;
    CHECK_THROWS(model_from_json(bad));
    bad = j;
    bad["layers"].erase(bad["layers"].size() - 1);
    CHECK_THROWS(model_from_json(bad));
  }

  TEST_CASE("score agrees with reconstruct") {
    CaeModel m = init_cae(small_topology(), 10);
    const auto ws = toy_windows(40, 166, 7);
    std::vector<const WindowMatrix*> ptrs;
    for (const auto& w : ws) ptrs.push_back(&w);
    const auto r = score_windows(m, ptrs);
    for (std::size_t i = 0; i < ws.size(); i += 13) {
      const auto rec = reconstruct(m, ws[i]);
      double cc = 0, s = 0;
      for (std::size_t e = 0; e < rec.values.size(); ++e) {
        cc += rec.values[e] * ws[i].values[e];
        s += (rec.values[e] - ws[i].values[e]) * (rec.values[e] - ws[i].values[e]);
      }
      CHECK(r.cc[i] == doctest::Approx(cc).epsilon(1e-12));
      CHECK(r.mse[i] == doctest::Approx(s / double(rec.values.size())).epsilon(1e-12));
    }
  }
}
