#include "hifd/corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <random>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "hifd/io_util.hpp"
#include "hifd/waveform_io.hpp"

namespace hifd {
namespace {

enum Stream : std::uint64_t { kStreamScenario = 21, kStreamTiming = 22, kStreamSplit = 23 };

}  // namespace

std::vector<std::string> default_locations() {
  return {"632", "633", "645", "646", "671", "680", "684", "611", "652", "675"};
}

std::vector<Scenario> corpus_scenarios(const FeederConfig& cfg, const CorpusOptions& opt) {
  std::vector<std::string> surfaces = opt.surfaces;
  if (surfaces.empty())
    for (const auto& s : surface_table()) surfaces.push_back(s.name);
  std::vector<std::string> locations = opt.locations.empty() ? default_locations() : opt.locations;
  for (const auto& l : locations) attenuation(cfg, l);

  std::vector<Scenario> out;
  const std::uint64_t base = mix_seed(opt.seed, kStreamScenario);
  auto next_seed = [&] { return mix_seed(base, out.size()); };
  for (const auto& name : surfaces) {
    const HifSurfaceParams& surf = surface_by_name(name);
    for (const auto& node : locations)
      for (Phase ph : {Phase::A, Phase::B, Phase::C}) {
        Scenario sc;
        sc.kind = ScenarioKind::hif;
        sc.surface = surf;
        sc.fault_node = node;
        sc.fault_phase = ph;
        sc.inception_time = opt.fault_inception;
        sc.duration = opt.record_duration;
        sc.rng_seed = next_seed();
        out.push_back(sc);
      }
  }
  auto disturbance = [&](ScenarioKind kind, const std::string& node, int count) {
    for (int i = 0; i < count; ++i) {
      Scenario sc;
      sc.kind = kind;
      sc.fault_node = node;
      sc.fault_phase = Phase(i % 3);
      sc.duration = opt.record_duration;
      sc.rng_seed = next_seed();
      std::mt19937_64 rng(mix_seed(sc.rng_seed, kStreamTiming));
      sc.inception_time = kind == ScenarioKind::steady
                              ? 0.0
                              : std::uniform_real_distribution<double>(0.03, 0.08)(rng);
      out.push_back(sc);
    }
  };
  disturbance(ScenarioKind::steady, "632", opt.steady_records);
  disturbance(ScenarioKind::capacitor_switching, "675", opt.capacitor_records);
  disturbance(ScenarioKind::nonlinear_load, "634", opt.nonlinear_records);
  disturbance(ScenarioKind::inrush, "633", opt.inrush_records);
  return out;
}

std::string scenario_file_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "scenario_%04zu.csv", index);
  return buf;
}

std::string manifest_to_json(const std::vector<Scenario>& scenarios) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& s : scenarios) arr.push_back(scenario_to_json(s));
  return arr.dump(1) + "\n";
}

std::vector<Scenario> manifest_from_json(const std::string& text) {
  nlohmann::ordered_json arr;
  try {
    arr = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(std::string("manifest: invalid JSON: ") + e.what());
  }
  if (!arr.is_array()) throw std::runtime_error("manifest: expected a JSON array");
  std::vector<Scenario> out;
  for (const auto& j : arr) out.push_back(scenario_from_json(j));
  return out;
}

std::vector<Scenario> load_manifest(const std::filesystem::path& dir) {
  return manifest_from_json(read_file(dir / "manifest.json"));
}

WaveformRecord load_record(const std::filesystem::path& dir, const std::vector<Scenario>& manifest, std::size_t index) {
  if (index >= manifest.size()) throw std::out_of_range("corpus: scenario index out of range");
  WaveformRecord rec = read_record_csv(dir / scenario_file_name(index));
  rec.scenario = manifest[index];
  rec.label = label_for(manifest[index].kind);
  return rec;
}

CorpusStats write_corpus(const std::filesystem::path& dir, const FeederConfig& cfg,
                         const std::vector<Scenario>& scenarios, bool force) {
  std::filesystem::create_directories(dir);
  if (std::filesystem::exists(dir / "manifest.json") && !force)
    throw std::runtime_error("corpus already exists at " + dir.string() + " (use --force to overwrite)");
  std::vector<std::size_t> fault_w(scenarios.size(), 0), other_w(scenarios.size(), 0);
  std::vector<std::string> errors(scenarios.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    try {
      const WaveformRecord rec = generate(cfg, scenarios[i]);
      write_record_csv(dir / scenario_file_name(i), rec);
      for (const auto& w : record_windows(rec, training_policy(), scenario_file_name(i)))
        (*w.label == Label::fault ? fault_w[i] : other_w[i])++;
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (const auto& e : errors)
    if (!e.empty()) throw std::runtime_error("corpus generation failed: " + e);
  atomic_write(dir / "manifest.json", manifest_to_json(scenarios));
  CorpusStats st;
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    (is_fault_kind(scenarios[i].kind) ? st.fault_records : st.non_fault_records)++;
    st.fault_windows += fault_w[i];
    st.non_fault_windows += other_w[i];
  }
  return st;
}

CorpusSplit split_corpus(const std::vector<Scenario>& scenarios, std::uint64_t seed, double train_fraction) {
  std::map<std::string, std::vector<std::size_t>> by_surface;
  CorpusSplit sp;
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    if (is_fault_kind(scenarios[i].kind))
      by_surface[scenarios[i].surface->name].push_back(i);
    else
      sp.non_fault.push_back(i);
  }
  std::mt19937_64 rng(mix_seed(seed, kStreamSplit));
  for (auto& [name, idx] : by_surface) {
    std::shuffle(idx.begin(), idx.end(), rng);
    const std::size_t n_train = std::size_t(std::llround(train_fraction * double(idx.size())));
    sp.train_fault.insert(sp.train_fault.end(), idx.begin(), idx.begin() + std::ptrdiff_t(n_train));
    sp.test_fault.insert(sp.test_fault.end(), idx.begin() + std::ptrdiff_t(n_train), idx.end());
  }
  std::sort(sp.train_fault.begin(), sp.train_fault.end());
  std::sort(sp.test_fault.begin(), sp.test_fault.end());
  return sp;
}

CorpusSplit split_from_training(const std::vector<Scenario>& scenarios, const std::vector<std::size_t>& train) {
  CorpusSplit sp;
  std::set<std::size_t> tr(train.begin(), train.end());
  for (std::size_t i : tr) {
    if (i >= scenarios.size()) throw std::runtime_error("model refers to a record missing from the corpus");
    if (!is_fault_kind(scenarios[i].kind)) throw std::runtime_error("model was trained on a non-fault record");
  }
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    if (!is_fault_kind(scenarios[i].kind))
      sp.non_fault.push_back(i);
    else if (tr.count(i))
      sp.train_fault.push_back(i);
    else
      sp.test_fault.push_back(i);
  }
  return sp;
}

std::vector<WindowMatrix> record_windows(const WaveformRecord& rec, const WindowingPolicy& policy,
                                         const std::string& id) {
  std::vector<WindowMatrix> all = window(rec, policy, id);
  if (rec.label != Label::fault) return all;
  std::vector<WindowMatrix> out;
  for (auto& w : all)
    if (*w.label == Label::fault) out.push_back(std::move(w));
  return out;
}

}  // namespace hifd
