#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "hifd/nn/network.hpp"
#include "hifd/nn/serialize.hpp"
#include "hifd/preprocess.hpp"

namespace hifd {

struct CaeTopology {
  int input_steps = 166;
  int channels = kChannels;
  int k = 3;
  std::array<int, 4> filters{256, 128, 128, 256};
  double alpha = 0.01;
  double bn_momentum = 0.9;
  double bn_eps = 1e-8;
};

struct TrainConfig {
  double lr = 0.001;
  int batch = 16;
  int epochs = 100;
  std::uint64_t seed = 0;
  int patience = 10;
  double val_fraction = 0.1;
  nn::Backend backend = nn::Backend::parallel;
  // Called after every epoch; informational only.
  std::function<void(int epoch, double train_mse, double val_mse)> on_epoch;

  void validate() const;
};

struct CurvePoint {
  int epoch = 0;
  double train_mse = 0.0;
  double val_mse = 0.0;
};

struct TrainingInfo {
  std::uint64_t seed = 0;
  int epochs_run = 0;
  int best_epoch = 0;
  double final_train_mse = 0.0;
  double best_val_mse = 0.0;
  std::size_t train_windows = 0;
  std::size_t val_windows = 0;
  std::vector<std::size_t> train_records;  // corpus indices the windows came from
  std::vector<CurvePoint> curve;
};

struct CaeModel {
  CaeTopology topology;
  nn::Network net;
  TrainingInfo training;
};

// Encoder: [conv + LeakyReLU + batch-norm + max-pool] x2. Decoder: [conv + LeakyReLU + upsample] x2,
// symmetric crop back to the input length, linear conv to the input channels.
nn::Network build_cae(const CaeTopology& topo);
CaeModel init_cae(const CaeTopology& topo, std::uint64_t seed, bool zero_final = false);

// Trains on fault windows only; the last held-out fraction of a seeded shuffle is the validation set.
// The returned weights are those of the best validation epoch.
CaeModel train(const std::vector<WindowMatrix>& fault_windows, const TrainConfig& cfg,
               const CaeTopology& topo = {});

// Continues from an initialized model.
void train_model(CaeModel& model, const std::vector<WindowMatrix>& fault_windows, const TrainConfig& cfg);

WindowMatrix reconstruct(const CaeModel& model, const WindowMatrix& window);
std::vector<WindowMatrix> reconstruct_batch(const CaeModel& model, const std::vector<const WindowMatrix*>& windows);

// CC(x, reconstruct(x)) and mse(x, reconstruct(x)) for many windows at once.
struct Reconstruction {
  std::vector<double> cc;
  std::vector<double> mse;
};
Reconstruction score_windows(const CaeModel& model, const std::vector<const WindowMatrix*>& windows);

std::string curve_csv(const TrainingInfo& info);

nn::ordered_json model_to_json(const CaeModel& model);
CaeModel model_from_json(const nn::ordered_json& j);
void save_model(const std::filesystem::path& path, const CaeModel& model);
CaeModel load_model(const std::filesystem::path& path);

}  // namespace hifd
