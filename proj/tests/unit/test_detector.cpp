#include <doctest.h>

#include <cmath>
#include <algorithm>
#include <json.hpp>
#include <random>

#include "hifd/detector.hpp"

using namespace hifd;

namespace {

// Trip status from the whole history: some run of >= pickup consecutive HIF steps ended at j <= n,
// and no run of >= release consecutive non-HIF steps followed it. Timer is the trailing HIF run, capped.
struct Reference {
  bool tripped;
  int timer;
};

Reference reference(const std::vector<Decision>& seq, std::size_t n, const Timing& t) {
  int trailing = 0;
  for (std::size_t i = n + 1; i-- > 0 && seq[i] == Decision::hif;) ++trailing;
  bool tripped = false;
  for (std::size_t j = 0; j <= n; ++j) {
    int run = 0;
    for (std::size_t i = j + 1; i-- > 0 && seq[i] == Decision::hif;) ++run;
    if (run < t.pickup_steps) continue;
    int quiet = 0, longest = 0;
    for (std::size_t i = j + 1; i <= n; ++i) {
      quiet = seq[i] == Decision::hif ? 0 : quiet + 1;
      longest = std::max(longest, quiet);
    }
    if (longest < t.release_steps) tripped = true;
  }
  return {tripped, std::min(trailing, t.pickup_steps)};
}

std::vector<std::vector<Decision>> all_sequences(int max_len) {
  std::vector<std::vector<Decision>> out{{}};
  std::vector<std::vector<Decision>> frontier{{}};
  for (int len = 1; len <= max_len; ++len) {
    std::vector<std::vector<Decision>> next;
    for (const auto& s : frontier)
      for (Decision d : {Decision::disturbance, Decision::hif, Decision::normal}) {
        auto t = s;
        t.push_back(d);
        next.push_back(t);
      }
    out.insert(out.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  return out;
}

WindowMatrix noise_window(std::uint64_t seed, double scale) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, scale);
  WindowMatrix w;
  w.n_steps = 166;
  w.values.resize(166 * kChannels);
  for (auto& v : w.values) v = d(rng);
  return w;
}

CaeModel small_model() {
  CaeTopology t;
  t.filters = {8, 6, 6, 8};
  return init_cae(t, 21);
}

}  // namespace

TEST_SUITE("detector") {
  TEST_CASE("threshold rules") {
    CHECK(cc_threshold_rule({5.0, 2.0, 9.0}) == 2.0);
    CHECK(k_threshold_rule({3.0, 9.9}) == 10.0);
    CHECK(k_threshold_rule({10.0}) == 10.5);
    CHECK(k_threshold_rule({10.2, 4.0}) == 10.5);
    CHECK(k_threshold_rule({12.5}) == 13.0);
    CHECK_THROWS(cc_threshold_rule({}));
    CHECK_THROWS(k_threshold_rule({}));
  }

  TEST_CASE("decision rule") {
    DetectorArtifacts a;
    a.cc_threshold = 100.0;
    a.k_threshold = 10.0;
    CHECK(decide(10.5, std::nullopt, a) == Decision::disturbance);
    CHECK(decide(10.5, 1e9, a) == Decision::disturbance);
    CHECK(decide(10.0, 100.5, a) == Decision::hif);
    CHECK(decide(3.0, 100.0, a) == Decision::normal);
    CHECK_THROWS(decide(3.0, std::nullopt, a));
  }

  TEST_CASE("timing in steps") {
    DetectorArtifacts a;
    const auto tr = timing_for(a, training_policy());
    CHECK(tr.pickup_steps == 3);
    CHECK(tr.release_steps == 1);
    const auto on = timing_for(a, online_policy());
    CHECK(on.pickup_steps == 3 * 166);
    CHECK(on.release_steps == 166);
  }

  TEST_CASE("transition matches the reference on every sequence up to length eight") {
    const auto seqs = all_sequences(8);
    CHECK(seqs.size() == 9841);
    std::size_t counterexamples = 0;
    for (Timing t : {Timing{3, 1}, Timing{1, 1}, Timing{2, 2}, Timing{3, 3}, Timing{4, 2}}) {
      for (const auto& seq : seqs) {
        DetectorState s;
        for (std::size_t n = 0; n < seq.size(); ++n) {
          s = transition(s, seq[n], t);
          const auto r = reference(seq, n, t);
          if (s.tripped != r.tripped || s.timer != r.timer) ++counterexamples;
        }
      }
    }
    CHECK(counterexamples == 0);
  }

  TEST_CASE("detector step realizes the same table from real windows") {
    const CaeModel model = small_model();
    // two K-passing windows with different CC, one impulsive window
    const WindowMatrix lo = noise_window(1, 0.5), hi = noise_window(2, 3.0);
    WindowMatrix spike = noise_window(3, 0.01);
    spike.at(80, 3) = 50.0;
    DetectorArtifacts a;
    const double cc_lo = cross_correlation(lo, reconstruct(model, lo));
    const double cc_hi = cross_correlation(hi, reconstruct(model, hi));
    REQUIRE(cc_lo != cc_hi);
    a.cc_threshold = 0.5 * (cc_lo + cc_hi);
    const WindowMatrix& hif = cc_hi > cc_lo ? hi : lo;
    const WindowMatrix& normal = cc_hi > cc_lo ? lo : hi;
    REQUIRE(window_kurtosis(hif).aggregate < a.k_threshold);
    REQUIRE(window_kurtosis(normal).aggregate < a.k_threshold);
    REQUIRE(window_kurtosis(spike).aggregate > a.k_threshold);

    const Timing t = timing_for(a, training_policy());
    std::size_t counterexamples = 0;
    for (const auto& seq : all_sequences(6)) {
      Detector det(a, model, t);
      std::uint64_t expected_calls = 0;
      for (std::size_t n = 0; n < seq.size(); ++n) {
        const WindowMatrix& w = seq[n] == Decision::hif ? hif : seq[n] == Decision::normal ? normal : spike;
        expected_calls += seq[n] != Decision::disturbance;
        if (det.step(w) != seq[n]) ++counterexamples;
        const auto r = reference(seq, n, t);
        if (det.state().tripped != r.tripped || det.state().timer != r.timer) ++counterexamples;
      }
      if (det.cae_invocations() != expected_calls) ++counterexamples;
    }
    CHECK(counterexamples == 0);
  }

  TEST_CASE("replay equals stepping window by window") {
    const CaeModel model = small_model();
    WaveformRecord rec;
    rec.sample_rate = 10000.0;
    const std::size_t n = 900;
    rec.t.resize(n);
    std::mt19937_64 rng(4);
    std::normal_distribution<double> d;
    for (std::size_t k = 0; k < n; ++k) rec.t[k] = double(k) / 10000.0;
    for (int c = 0; c < 6; ++c) {
      rec.channels[c].resize(n);
      for (std::size_t k = 0; k < n; ++k)
        rec.channels[c][k] = std::sin(0.04 * double(k) + c) + (k > 400 ? 0.3 * d(rng) : 0.0);
    }
    rec.channels[4][700] += 40.0;
    rec.scenario.inception_time = 0.04;
    DetectorArtifacts a;
    WindowingPolicy p = online_policy();
    p.stride = 7;
    // threshold in the middle of the observed CC range so the state machine moves
    std::vector<double> ccs;
    for (std::size_t s = 0; s + 168 <= n; s += 7) {
      const auto w = window_at(rec, p, s);
      ccs.push_back(cross_correlation(w, reconstruct(model, w)));
    }
    std::sort(ccs.begin(), ccs.end());
    a.cc_threshold = ccs[ccs.size() / 2];

    const auto tr = replay(rec, a, model, p);
    Detector det(a, model, timing_for(a, p));
    REQUIRE(tr.rows.size() == window_count(n, p));
    for (std::size_t i = 0; i < tr.rows.size(); ++i) {
      det.step(window_at(rec, p, i * 7));
      CHECK(tr.rows[i].trip == det.state().tripped);
      CHECK(tr.rows[i].timer == det.state().timer);
      CHECK(tr.rows[i].t_ms == doctest::Approx((i * 7 + 167) / 10.0));
    }
    CHECK(tr.cae_invocations == det.cae_invocations());
    if (tr.first_trip_ms) CHECK(*tr.latency_ms == doctest::Approx(*tr.first_trip_ms - 40.0));
    const auto csv = trace_csv(tr);
    CHECK(csv.rfind("window_index,t_ms,K,CC,timer,trip\n", 0) == 0);
  }

  TEST_CASE("artifacts json") {
    DetectorArtifacts a;
    a.cc_threshold = 123.25;
    a.k_threshold = 10.0;
    a.model_path = "model.json";
    const auto text = artifacts_to_json(a);
    const auto b = artifacts_from_json(text);
    CHECK(b.cc_threshold == a.cc_threshold);
    CHECK(b.model_path == a.model_path);
    CHECK(artifacts_to_json(b) == text);
    const auto j = nlohmann::json::parse(text);
    CHECK(j.size() == 4);
    CHECK_THROWS(artifacts_from_json("{"));
    CHECK_THROWS(artifacts_from_json(R"({"cc_threshold":1,"k_threshold":10,"timer_threshold":0,"model_path":""})"));
  }

  TEST_CASE("calibration takes the minimum CC and the K rule") {
    const CaeModel model = small_model();
    std::vector<WindowMatrix> ws;
    for (std::uint64_t s = 0; s < 5; ++s) ws.push_back(noise_window(s, 1.0 + double(s)));
    const auto a = calibrate(model, ws);
    double mn = 1e300;
    for (const auto& w : ws) mn = std::min(mn, cross_correlation(w, reconstruct(model, w)));
    CHECK(a.cc_threshold == doctest::Approx(mn).epsilon(1e-12));
    CHECK(a.k_threshold == 10.0);
    CHECK(a.timer_threshold == 3);
  }
}
