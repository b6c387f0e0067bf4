#include "hifd/cae.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "hifd/io_util.hpp"
#include "hifd/nn/adam.hpp"
#include "hifd/stats.hpp"

namespace hifd {
namespace {

constexpr int kFormatVersion = 1;
constexpr std::size_t kInferChunk = 32;

enum Stream : std::uint64_t { kStreamInit = 11, kStreamShuffle = 12 };

int crop_total(const CaeTopology& t) {
  const int l1 = nn::pooled_length(t.input_steps, 2);
  const int l2 = nn::pooled_length(l1, 2);
  return l2 * 4 - t.input_steps;
}

}  // namespace

void TrainConfig::validate() const {
  if (batch < 2) throw std::invalid_argument("train: batch must be at least 2");
  if (epochs < 1) throw std::invalid_argument("train: epochs must be positive");
  if (!(lr > 0.0)) throw std::invalid_argument("train: learning rate must be positive");
  if (patience < 1) throw std::invalid_argument("train: patience must be positive");
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) throw std::invalid_argument("train: val_fraction must lie in (0,1)");
}

nn::Network build_cae(const CaeTopology& t) {
  using namespace nn;
  if (t.input_steps < 4 || t.channels < 1 || t.k < 1) throw std::invalid_argument("cae: bad topology");
  Network net;
  net.emplace<Conv1d>(t.channels, t.filters[0], t.k, Padding::same);
  net.emplace<LeakyRelu>(t.alpha);
  net.emplace<BatchNorm>(t.filters[0], t.bn_momentum, t.bn_eps);
  net.emplace<MaxPool>(2);
  net.emplace<Conv1d>(t.filters[0], t.filters[1], t.k, Padding::same);
  net.emplace<LeakyRelu>(t.alpha);
  net.emplace<BatchNorm>(t.filters[1], t.bn_momentum, t.bn_eps);
  net.emplace<MaxPool>(2);
  net.emplace<Conv1d>(t.filters[1], t.filters[2], t.k, Padding::same);
  net.emplace<LeakyRelu>(t.alpha);
  net.emplace<Upsample>(2);
  net.emplace<Conv1d>(t.filters[2], t.filters[3], t.k, Padding::same);
  net.emplace<LeakyRelu>(t.alpha);
  net.emplace<Upsample>(2);
  const int crop = crop_total(t);
  net.emplace<Crop>(crop / 2, crop - crop / 2);
  net.emplace<Conv1d>(t.filters[3], t.channels, t.k, Padding::same);
  return net;
}

CaeModel init_cae(const CaeTopology& topo, std::uint64_t seed, bool zero_final) {
  CaeModel m;
  m.topology = topo;
  m.net = build_cae(topo);
  m.training.seed = seed;
  std::mt19937_64 rng(mix_seed(seed, kStreamInit));
  std::vector<nn::Conv1d*> convs;
  for (std::size_t i = 0; i < m.net.size(); ++i)
    if (auto* c = dynamic_cast<nn::Conv1d*>(&m.net.layer(i))) convs.push_back(c);
  for (std::size_t i = 0; i < convs.size(); ++i) {
    const bool last = i + 1 == convs.size();
    convs[i]->init_uniform(rng, last ? 3.0 : 6.0);
    if (last && zero_final) std::fill(convs[i]->weight.begin(), convs[i]->weight.end(), 0.0);
  }
  return m;
}

static double mean_mse(const CaeModel& model, const std::vector<const WindowMatrix*>& ws) {
  if (ws.empty()) return 0.0;
  const Reconstruction r = score_windows(model, ws);
  return std::accumulate(r.mse.begin(), r.mse.end(), 0.0) / double(ws.size());
}

void train_model(CaeModel& model, const std::vector<WindowMatrix>& windows, const TrainConfig& cfg) {
  cfg.validate();
  for (const auto& w : windows) {
    if (!w.label || *w.label != Label::fault)
      throw std::invalid_argument("train: non-fault window in training set (record '" + w.record_id + "')");
    if (w.n_steps != model.topology.input_steps)
      throw std::invalid_argument("train: window length does not match topology");
  }
  if (windows.size() < std::size_t(2 * cfg.batch))
    throw std::invalid_argument("train: need at least two batches of windows");

  std::mt19937_64 rng(mix_seed(cfg.seed, kStreamShuffle));
  std::vector<std::size_t> order(windows.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t n_val = std::max<std::size_t>(1, std::size_t(std::llround(cfg.val_fraction * double(windows.size()))));
  std::vector<std::size_t> train_idx(order.begin(), order.end() - std::ptrdiff_t(n_val));
  std::vector<const WindowMatrix*> val;
  for (auto it = order.end() - std::ptrdiff_t(n_val); it != order.end(); ++it) val.push_back(&windows[*it]);
  if (train_idx.size() < std::size_t(cfg.batch)) throw std::invalid_argument("train: too few training windows");

  model.net.set_backend(cfg.backend);
  auto params = model.net.params();
  nn::AdamState adam;
  adam.cfg.lr = cfg.lr;

  TrainingInfo& info = model.training;
  info.seed = cfg.seed;
  info.train_windows = train_idx.size();
  info.val_windows = n_val;
  info.curve.clear();
  double best = std::numeric_limits<double>::infinity();
  nn::Network best_net = model.net;
  int since_best = 0;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(train_idx.begin(), train_idx.end(), rng);
    double sum = 0.0;
    std::size_t seen = 0;
    std::size_t pos = 0;
    while (pos < train_idx.size()) {
      std::size_t take = std::min<std::size_t>(cfg.batch, train_idx.size() - pos);
      // a trailing batch of one cannot be batch-normalized; fold it in
      if (train_idx.size() - pos - take == 1) ++take;
      std::vector<const WindowMatrix*> batch;
      for (std::size_t i = pos; i < pos + take; ++i) batch.push_back(&windows[train_idx[i]]);
      pos += take;
      const nn::Tensor x = to_tensor(batch);
      const nn::Tensor y = model.net.forward(x);
      const double loss = nn::mse(y, x);
      model.net.backward(nn::mse_grad(y, x));
      nn::adam_step(params, adam);
      sum += loss * double(take);
      seen += take;
    }
    const double train_mse = sum / double(seen);
    const double val_mse = mean_mse(model, val);
    info.curve.push_back({epoch, train_mse, val_mse});
    info.epochs_run = epoch;
    info.final_train_mse = train_mse;
    if (cfg.on_epoch) cfg.on_epoch(epoch, train_mse, val_mse);
    if (!std::isfinite(train_mse)) throw std::runtime_error("train: loss diverged");
    if (val_mse < best) {
      best = val_mse;
      best_net = model.net;
      info.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  model.net = std::move(best_net);
  info.best_val_mse = best;
}

CaeModel train(const std::vector<WindowMatrix>& windows, const TrainConfig& cfg, const CaeTopology& topo) {
  CaeModel m = init_cae(topo, cfg.seed);
  train_model(m, windows, cfg);
  return m;
}

std::vector<WindowMatrix> reconstruct_batch(const CaeModel& model, const std::vector<const WindowMatrix*>& ws) {
  std::vector<WindowMatrix> out;
  out.reserve(ws.size());
  for (std::size_t i = 0; i < ws.size(); i += kInferChunk) {
    std::vector<const WindowMatrix*> chunk(ws.begin() + std::ptrdiff_t(i),
                                           ws.begin() + std::ptrdiff_t(std::min(ws.size(), i + kInferChunk)));
    for (const auto* w : chunk)
      if (w->n_steps != model.topology.input_steps)
        throw std::invalid_argument("reconstruct: window length does not match topology");
    const nn::Tensor y = model.net.infer(to_tensor(chunk));
    for (int b = 0; b < y.batch; ++b) {
      WindowMatrix r = from_tensor(y, b);
      r.record_id = chunk[b]->record_id;
      r.start = chunk[b]->start;
      out.push_back(std::move(r));
    }
  }
  return out;
}

WindowMatrix reconstruct(const CaeModel& model, const WindowMatrix& w) { return reconstruct_batch(model, {&w}).front(); }

Reconstruction score_windows(const CaeModel& model, const std::vector<const WindowMatrix*>& ws) {
  Reconstruction r;
  r.cc.reserve(ws.size());
  r.mse.reserve(ws.size());
  for (std::size_t i = 0; i < ws.size(); i += kInferChunk) {
    std::vector<const WindowMatrix*> chunk(ws.begin() + std::ptrdiff_t(i),
                                           ws.begin() + std::ptrdiff_t(std::min(ws.size(), i + kInferChunk)));
    const auto rec = reconstruct_batch(model, chunk);
    for (std::size_t j = 0; j < chunk.size(); ++j) {
      r.cc.push_back(cross_correlation(*chunk[j], rec[j]));
      double s = 0.0;
      for (std::size_t e = 0; e < rec[j].values.size(); ++e) {
        const double d = rec[j].values[e] - chunk[j]->values[e];
        s += d * d;
      }
      r.mse.push_back(s / double(rec[j].values.size()));
    }
  }
  return r;
}

std::string curve_csv(const TrainingInfo& info) {
  std::string out = "epoch,train_mse,val_mse\n";
  for (const auto& p : info.curve)
    out += std::to_string(p.epoch) + "," + format_double(p.train_mse) + "," + format_double(p.val_mse) + "\n";
  return out;
}

nn::ordered_json model_to_json(const CaeModel& m) {
  nn::ordered_json j;
  j["format"] = "hifd-cae";
  j["version"] = kFormatVersion;
  nn::ordered_json t;
  t["input_steps"] = m.topology.input_steps;
  t["channels"] = m.topology.channels;
  t["k"] = m.topology.k;
  t["filters"] = m.topology.filters;
  t["alpha"] = m.topology.alpha;
  t["bn_momentum"] = m.topology.bn_momentum;
  t["bn_eps"] = m.topology.bn_eps;
  j["topology"] = t;
  nn::ordered_json tr;
  tr["seed"] = m.training.seed;
  tr["epochs_run"] = m.training.epochs_run;
  tr["best_epoch"] = m.training.best_epoch;
  tr["final_train_mse"] = m.training.final_train_mse;
  tr["best_val_mse"] = m.training.best_val_mse;
  tr["train_windows"] = m.training.train_windows;
  tr["val_windows"] = m.training.val_windows;
  tr["train_records"] = m.training.train_records;
  j["training"] = tr;
  j["layers"] = nn::network_to_json(m.net);
  return j;
}

CaeModel model_from_json(const nn::ordered_json& j) {
  if (j.value("format", std::string()) != "hifd-cae") throw std::runtime_error("model: not a hifd-cae model file");
  const int version = j.at("version").get<int>();
  if (version != kFormatVersion)
    throw std::runtime_error("model: unsupported version " + std::to_string(version));
  CaeModel m;
  const auto& t = j.at("topology");
  m.topology.input_steps = t.at("input_steps").get<int>();
  m.topology.channels = t.at("channels").get<int>();
  m.topology.k = t.at("k").get<int>();
  m.topology.filters = t.at("filters").get<std::array<int, 4>>();
  m.topology.alpha = t.at("alpha").get<double>();
  m.topology.bn_momentum = t.at("bn_momentum").get<double>();
  m.topology.bn_eps = t.at("bn_eps").get<double>();
  const auto& tr = j.at("training");
  m.training.seed = tr.at("seed").get<std::uint64_t>();
  m.training.epochs_run = tr.at("epochs_run").get<int>();
  m.training.best_epoch = tr.at("best_epoch").get<int>();
  m.training.final_train_mse = tr.at("final_train_mse").get<double>();
  m.training.best_val_mse = tr.at("best_val_mse").get<double>();
  m.training.train_windows = tr.at("train_windows").get<std::size_t>();
  m.training.val_windows = tr.at("val_windows").get<std::size_t>();
  m.training.train_records = tr.at("train_records").get<std::vector<std::size_t>>();
  m.net = nn::network_from_json(j.at("layers"));
  // the layer stack must match the declared topology
  const nn::Network expect = build_cae(m.topology);
  if (expect.size() != m.net.size()) throw std::runtime_error("model: layer count does not match topology");
  for (std::size_t i = 0; i < expect.size(); ++i)
    if (expect.layer(i).kind() != m.net.layer(i).kind())
      throw std::runtime_error("model: layer " + std::to_string(i) + " does not match topology");
  for (std::size_t i = 0; i < expect.size(); ++i) {
    const auto* a = dynamic_cast<const nn::Crop*>(&expect.layer(i));
    const auto* b = dynamic_cast<const nn::Crop*>(&m.net.layer(i));
    if (a && (a->left != b->left || a->right != b->right))
      throw std::runtime_error("model: crop does not match input_steps");
  }
  return m;
}

void save_model(const std::filesystem::path& path, const CaeModel& m) { atomic_write(path, model_to_json(m).dump() + "\n"); }

CaeModel load_model(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  nn::ordered_json j;
  try {
    j = nn::ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("model: " + path.string() + " is not valid JSON: " + e.what());
  }
  return model_from_json(j);
}

}  // namespace hifd
