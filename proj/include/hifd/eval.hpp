#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hifd/cae.hpp"
#include "hifd/corpus.hpp"
#include "hifd/detector.hpp"

namespace hifd {

struct ConfusionCounts {
  std::uint64_t tp = 0, tn = 0, fp = 0, fn = 0;
  std::uint64_t total() const { return tp + tn + fp + fn; }
  bool operator==(const ConfusionCounts&) const = default;
};

// Percentages; a zero denominator leaves the field empty.
struct MetricReport {
  std::optional<double> acc, sec, dep, saf, sen;
};

MetricReport metrics(const ConfusionCounts& c);

// One row of the component study: which parts of the pipeline are switched on.
struct Variant {
  std::string name;
  std::string description;
  bool differencing = true;
  bool use_cc = true;  // false: reconstruction MSE replaces CC
  bool k_gate = true;
};

const std::vector<Variant>& ablation_variants();
const Variant& variant_by_name(const std::string& name);

struct ScoredWindow {
  Label truth = Label::non_fault;
  double k = 0.0;
  double cc = 0.0;
  double mse = 0.0;
};

// Thresholds for one trained model; mse_threshold is the largest training-window MSE.
struct ModelThresholds {
  DetectorArtifacts artifacts;
  double mse_threshold = 0.0;
};

ModelThresholds calibrate_with_mse(const CaeModel& model, const std::vector<WindowMatrix>& train_windows);

std::vector<ScoredWindow> score(const CaeModel& model, const std::vector<WindowMatrix>& windows);

bool classify_fault(const ScoredWindow& w, const Variant& v, const ModelThresholds& th);
ConfusionCounts count(const std::vector<ScoredWindow>& ws, const Variant& v, const ModelThresholds& th);

// Corpus on disk plus the train/test split recorded in the model.
struct EvalCorpus {
  std::filesystem::path dir;
  std::vector<Scenario> manifest;
  CorpusSplit split;

  static EvalCorpus open(const std::filesystem::path& dir, const CaeModel& model);
  std::vector<std::size_t> test_records() const;  // held-out faults, then every non-fault record
};

std::vector<WindowMatrix> load_windows(const EvalCorpus& c, const std::vector<std::size_t>& ids,
                                       const WindowingPolicy& policy, std::optional<double> snr_db = std::nullopt);

struct VariantResult {
  Variant variant;
  ConfusionCounts counts;
  MetricReport report;
};

VariantResult evaluate_corpus(const DetectorArtifacts& a, const CaeModel& model, const EvalCorpus& c);

// Trains the raw-window model when a no-differencing variant is requested.
struct AblationOptions {
  std::vector<std::string> variants;  // empty: all
  TrainConfig train;                  // for the raw-window model
};
std::vector<VariantResult> run_ablations(const DetectorArtifacts& a, const CaeModel& model, const EvalCorpus& c,
                                         const AblationOptions& opt);

struct NoiseRow {
  std::optional<double> snr_db;  // empty: noise-free
  ConfusionCounts counts;
  MetricReport report;
};

std::vector<NoiseRow> noise_sweep(const DetectorArtifacts& a, const CaeModel& model, const EvalCorpus& c,
                                  const std::vector<double>& snrs);

struct CaseResult {
  std::string id;
  std::string description;
  bool expect_trip = false;
  std::optional<double> target_ms;
  double tolerance_ms = 0.0;
  double frequency = 60.0;
  DetectionTrace trace;
  bool pass = false;
  std::string detail;
};

struct CaseStudyOptions {
  std::optional<double> snr_db;
  bool check_latency = true;
};

std::vector<Scenario> case_scenarios();
std::vector<CaseResult> run_case_studies(const DetectorArtifacts& a, const CaeModel& model,
                                         const CaseStudyOptions& opt = {});

std::string metrics_csv(const std::vector<VariantResult>& rows);
std::string noise_csv(const std::vector<NoiseRow>& rows);
std::string cases_csv(const std::vector<CaseResult>& rows);
std::string trace_svg(const CaseResult& r, const DetectorArtifacts& a);

}  // namespace hifd
