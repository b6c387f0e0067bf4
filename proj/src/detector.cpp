#include "hifd/detector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "hifd/io_util.hpp"

namespace hifd {

void DetectorArtifacts::validate() const {
  if (!std::isfinite(cc_threshold)) throw std::invalid_argument("artifacts: cc_threshold must be finite");
  if (!std::isfinite(k_threshold) || k_threshold <= 0.0) throw std::invalid_argument("artifacts: bad k_threshold");
  if (timer_threshold < 1) throw std::invalid_argument("artifacts: timer_threshold must be at least 1");
}

std::string artifacts_to_json(const DetectorArtifacts& a) {
  nlohmann::ordered_json j;
  j["cc_threshold"] = a.cc_threshold;
  j["k_threshold"] = a.k_threshold;
  j["timer_threshold"] = a.timer_threshold;
  j["model_path"] = a.model_path;
  return j.dump(2) + "\n";
}

DetectorArtifacts artifacts_from_json(const std::string& text) {
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(std::string("artifacts: invalid JSON: ") + e.what());
  }
  DetectorArtifacts a;
  a.cc_threshold = j.at("cc_threshold").get<double>();
  a.k_threshold = j.at("k_threshold").get<double>();
  a.timer_threshold = j.at("timer_threshold").get<int>();
  a.model_path = j.at("model_path").get<std::string>();
  a.validate();
  return a;
}

void save_artifacts(const std::filesystem::path& path, const DetectorArtifacts& a) {
  a.validate();
  atomic_write(path, artifacts_to_json(a));
}

DetectorArtifacts load_artifacts(const std::filesystem::path& path) { return artifacts_from_json(read_file(path)); }

double cc_threshold_rule(const std::vector<double>& cc) {
  if (cc.empty()) throw std::invalid_argument("calibrate: empty training set");
  return *std::min_element(cc.begin(), cc.end());
}

double k_threshold_rule(const std::vector<double>& k) {
  if (k.empty()) throw std::invalid_argument("calibrate: empty training set");
  const double kmax = *std::max_element(k.begin(), k.end());
  if (kmax < 10.0) return 10.0;
  // next multiple of 0.5 strictly above the largest training value
  double t = std::ceil(kmax * 2.0) / 2.0;
  if (t <= kmax) t += 0.5;
  return t;
}

DetectorArtifacts calibrate(const CaeModel& model, const std::vector<WindowMatrix>& windows) {
  if (windows.empty()) throw std::invalid_argument("calibrate: empty training set");
  std::vector<const WindowMatrix*> ptrs;
  std::vector<double> ks;
  for (const auto& w : windows) {
    ptrs.push_back(&w);
    ks.push_back(window_kurtosis(w).aggregate);
  }
  const Reconstruction r = score_windows(model, ptrs);
  DetectorArtifacts a;
  a.cc_threshold = cc_threshold_rule(r.cc);
  a.k_threshold = k_threshold_rule(ks);
  a.timer_threshold = 3;
  return a;
}

Timing timing_for(const DetectorArtifacts& a, const WindowingPolicy& policy) {
  const int spw = std::max(1, policy.steps() / policy.stride);
  return {a.timer_threshold * spw, spw};
}

Decision decide(double k, std::optional<double> cc, const DetectorArtifacts& a) {
  if (k > a.k_threshold) return Decision::disturbance;
  if (!cc) throw std::invalid_argument("decide: CC required when the K gate is open");
  return *cc > a.cc_threshold ? Decision::hif : Decision::normal;
}

DetectorState transition(DetectorState s, Decision d, const Timing& t) {
  if (d == Decision::hif) {
    s.timer = std::min(s.timer + 1, t.pickup_steps);
    s.quiet = 0;
    if (s.timer >= t.pickup_steps) s.tripped = true;
  } else {
    s.timer = 0;
    if (s.tripped && ++s.quiet >= t.release_steps) {
      s.tripped = false;
      s.quiet = 0;
    }
  }
  return s;
}

static double safe_kurtosis(const WindowMatrix& w) {
  try {
    return window_kurtosis(w).aggregate;
  } catch (const DegenerateInput&) {
    return 0.0;
  }
}

Detector::Detector(const DetectorArtifacts& a, const CaeModel& model, const Timing& timing)
    : artifacts_(a), model_(&model), timing_(timing) {
  artifacts_.validate();
}

Decision Detector::step(const WindowMatrix& w) {
  WindowStats st;
  st.k.aggregate = safe_kurtosis(w);
  std::optional<double> cc;
  if (!(st.k.aggregate > artifacts_.k_threshold)) {
    ++invocations_;
    cc = cross_correlation(w, reconstruct(*model_, w));
    st.cc = *cc;
  } else {
    st.cc = std::numeric_limits<double>::quiet_NaN();
  }
  const Decision d = decide(st.k.aggregate, cc, artifacts_);
  state_ = transition(state_, d, timing_);
  state_.last = st;
  return d;
}

DetectionTrace replay(const WaveformRecord& rec, const DetectorArtifacts& a, const CaeModel& model,
                      const WindowingPolicy& policy) {
  a.validate();
  policy.validate();
  if (rec.size() < std::size_t(policy.raw_window)) throw std::invalid_argument("replay: record shorter than one window");
  const std::size_t count = window_count(rec.size(), policy);
  DetectionTrace tr;
  tr.rows.resize(count);

  std::vector<WindowMatrix> gated_open;
  std::vector<std::size_t> open_index;
  for (std::size_t i = 0; i < count; ++i) {
    WindowMatrix w = window_at(rec, policy, i * policy.stride);
    TraceRow& row = tr.rows[i];
    row.index = i;
    row.t_ms = 1e3 * double(i * policy.stride + policy.raw_window - 1) / rec.sample_rate;
    row.k = safe_kurtosis(w);
    if (!(row.k > a.k_threshold)) {
      gated_open.push_back(std::move(w));
      open_index.push_back(i);
    }
  }
  std::vector<const WindowMatrix*> ptrs;
  for (const auto& w : gated_open) ptrs.push_back(&w);
  const Reconstruction r = score_windows(model, ptrs);
  for (std::size_t j = 0; j < open_index.size(); ++j) tr.rows[open_index[j]].cc = r.cc[j];
  tr.cae_invocations = open_index.size();

  const Timing timing = timing_for(a, policy);
  DetectorState s;
  bool prev = false;
  const double incep_ms = 1e3 * rec.scenario.inception_time;
  for (auto& row : tr.rows) {
    s = transition(s, decide(row.k, row.cc, a), timing);
    row.timer = s.timer;
    row.trip = s.tripped;
    if (row.trip != prev) ++tr.trip_changes;
    prev = row.trip;
    if (row.trip && !tr.first_trip_ms) {
      tr.first_trip_ms = row.t_ms;
      tr.latency_ms = row.t_ms - incep_ms;
    }
  }
  tr.tripped_at_end = s.tripped;
  return tr;
}

std::string trace_csv(const DetectionTrace& trace) {
  std::string out = "window_index,t_ms,K,CC,timer,trip\n";
  for (const auto& r : trace.rows) {
    out += std::to_string(r.index);
    out += ',' + format_double(r.t_ms);
    out += ',' + format_double(r.k);
    out += ',';
    if (r.cc) out += format_double(*r.cc);
    out += ',' + std::to_string(r.timer);
    out += ',' + std::string(r.trip ? "1" : "0");
    out += '\n';
  }
  return out;
}

}  // namespace hifd
