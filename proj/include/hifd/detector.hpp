#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hifd/cae.hpp"
#include "hifd/preprocess.hpp"
#include "hifd/stats.hpp"

namespace hifd {

struct DetectorArtifacts {
  double cc_threshold = 0.0;
  double k_threshold = 10.0;
  int timer_threshold = 3;  // windows
  std::string model_path;

  void validate() const;
};

std::string artifacts_to_json(const DetectorArtifacts& a);
DetectorArtifacts artifacts_from_json(const std::string& text);
void save_artifacts(const std::filesystem::path& path, const DetectorArtifacts& a);
DetectorArtifacts load_artifacts(const std::filesystem::path& path);

// Threshold rules on precomputed training statistics.
double cc_threshold_rule(const std::vector<double>& training_cc);
double k_threshold_rule(const std::vector<double>& training_k);

DetectorArtifacts calibrate(const CaeModel& model, const std::vector<WindowMatrix>& fault_windows);

// Per-window outcome of the K gate and CC test.
enum class Decision { disturbance, hif, normal };

// Timer and release measured in steps. A window spans steps_per_window steps, so the
// pick-up needs timer_threshold * steps_per_window consecutive HIF steps and a trip
// releases after one window span of non-HIF steps.
struct Timing {
  int pickup_steps = 3;
  int release_steps = 1;
};
Timing timing_for(const DetectorArtifacts& a, const WindowingPolicy& policy);

struct DetectorState {
  int timer = 0;
  bool tripped = false;
  int quiet = 0;  // consecutive non-HIF steps while tripped
  WindowStats last;
};

DetectorState transition(DetectorState s, Decision d, const Timing& t);

Decision decide(double k_aggregate, std::optional<double> cc, const DetectorArtifacts& a);

// Stateful stream wrapper around transition(); counts CAE invocations.
class Detector {
 public:
  Detector(const DetectorArtifacts& a, const CaeModel& model, const Timing& timing);
  Decision step(const WindowMatrix& w);
  const DetectorState& state() const { return state_; }
  std::uint64_t cae_invocations() const { return invocations_; }
  void reset() { state_ = {}; }

 private:
  DetectorArtifacts artifacts_;
  const CaeModel* model_;
  Timing timing_;
  DetectorState state_;
  std::uint64_t invocations_ = 0;
};

struct TraceRow {
  std::size_t index = 0;
  double t_ms = 0.0;  // end of window, from record start
  double k = 0.0;
  std::optional<double> cc;  // empty when the K gate skipped the CAE
  int timer = 0;
  bool trip = false;
};

struct DetectionTrace {
  std::vector<TraceRow> rows;
  std::optional<double> first_trip_ms;   // from record start
  std::optional<double> latency_ms;      // first trip minus inception
  std::uint64_t cae_invocations = 0;
  bool tripped_at_end = false;
  std::size_t trip_changes = 0;
};

// Streams every window of the record through the detector; CAE calls are batched
// but the result equals step() applied window by window.
DetectionTrace replay(const WaveformRecord& rec, const DetectorArtifacts& a, const CaeModel& model,
                      const WindowingPolicy& policy = online_policy());

std::string trace_csv(const DetectionTrace& trace);

}  // namespace hifd
