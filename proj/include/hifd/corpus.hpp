#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hifd/preprocess.hpp"
#include "hifd/wavegen.hpp"

namespace hifd {

struct CorpusOptions {
  std::uint64_t seed = 0;
  std::vector<std::string> surfaces;   // empty: all seven
  std::vector<std::string> locations;  // empty: default_locations()
  double record_duration = 0.17;
  double fault_inception = 0.05;
  int steady_records = 14;
  int capacitor_records = 5;
  int nonlinear_records = 4;
  int inrush_records = 5;
};

// Line and load nodes downstream of the source, without the transformer secondary and the switch node.
std::vector<std::string> default_locations();

// Fault scenarios (surface-major, then location, then phase) followed by the non-fault ones.
std::vector<Scenario> corpus_scenarios(const FeederConfig& cfg, const CorpusOptions& opt);

std::string scenario_file_name(std::size_t index);

struct CorpusStats {
  std::size_t fault_records = 0;
  std::size_t non_fault_records = 0;
  std::size_t fault_windows = 0;
  std::size_t non_fault_windows = 0;
};

// Writes scenario_NNNN.csv files and manifest.json. Refuses an existing manifest unless force.
CorpusStats write_corpus(const std::filesystem::path& dir, const FeederConfig& cfg,
                         const std::vector<Scenario>& scenarios, bool force);

std::string manifest_to_json(const std::vector<Scenario>& scenarios);
std::vector<Scenario> manifest_from_json(const std::string& text);
std::vector<Scenario> load_manifest(const std::filesystem::path& dir);
WaveformRecord load_record(const std::filesystem::path& dir, const std::vector<Scenario>& manifest, std::size_t index);

struct CorpusSplit {
  std::vector<std::size_t> train_fault;
  std::vector<std::size_t> test_fault;
  std::vector<std::size_t> non_fault;
};

// Per-surface seeded shuffle; 80% of each surface's fault records go to training.
CorpusSplit split_corpus(const std::vector<Scenario>& scenarios, std::uint64_t seed, double train_fraction = 0.8);
// Rebuilds the split from the training record list stored in a model.
CorpusSplit split_from_training(const std::vector<Scenario>& scenarios, const std::vector<std::size_t>& train);

// Windows used for learning and scoring: fault-labeled windows of fault records, every window of
// non-fault records. Pre-inception windows of fault records are left out.
std::vector<WindowMatrix> record_windows(const WaveformRecord& rec, const WindowingPolicy& policy,
                                         const std::string& id);

}  // namespace hifd
