#include "hifd/nn/serialize.hpp"

#include <stdexcept>
#include <string>

namespace hifd::nn {
namespace {

std::vector<double> read_array(const ordered_json& j, const char* key, std::size_t expect) {
  std::vector<double> v = j.at(key).get<std::vector<double>>();
  if (v.size() != expect)
    throw std::runtime_error(std::string("model: field '") + key + "' has " + std::to_string(v.size()) +
                             " values, expected " + std::to_string(expect));
  return v;
}

}  // namespace

ordered_json network_to_json(const Network& net) {
  ordered_json arr = ordered_json::array();
  for (std::size_t i = 0; i < net.size(); ++i) {
    const Layer& l = net.layer(i);
    ordered_json j;
    j["type"] = l.kind();
    if (auto* c = dynamic_cast<const Conv1d*>(&l)) {
      j["in"] = c->in_channels;
      j["out"] = c->out_channels;
      j["k"] = c->k;
      j["padding"] = c->padding == Padding::same ? "same" : "valid";
      j["weight"] = c->weight;
      j["bias"] = c->bias;
    } else if (auto* r = dynamic_cast<const LeakyRelu*>(&l)) {
      j["alpha"] = r->alpha;
    } else if (auto* b = dynamic_cast<const BatchNorm*>(&l)) {
      j["channels"] = b->channels;
      j["momentum"] = b->momentum;
      j["eps"] = b->eps;
      j["gamma"] = b->gamma;
      j["beta"] = b->beta;
      j["running_mean"] = b->running_mean;
      j["running_var"] = b->running_var;
    } else if (auto* m = dynamic_cast<const MaxPool*>(&l)) {
      j["p"] = m->p;
    } else if (auto* u = dynamic_cast<const Upsample*>(&l)) {
      j["p"] = u->p;
    } else if (auto* c2 = dynamic_cast<const Crop*>(&l)) {
      j["left"] = c2->left;
      j["right"] = c2->right;
    } else {
      throw std::runtime_error("model: cannot serialize layer " + l.kind());
    }
    arr.push_back(std::move(j));
  }
  return arr;
}

Network network_from_json(const ordered_json& arr) {
  if (!arr.is_array()) throw std::runtime_error("model: layers must be an array");
  Network net;
  for (const auto& j : arr) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "conv1d") {
      const std::string pad = j.at("padding").get<std::string>();
      if (pad != "same" && pad != "valid") throw std::runtime_error("model: bad padding '" + pad + "'");
      auto& c = net.emplace<Conv1d>(j.at("in").get<int>(), j.at("out").get<int>(), j.at("k").get<int>(),
                                    pad == "same" ? Padding::same : Padding::valid);
      c.weight = read_array(j, "weight", c.weight.size());
      c.bias = read_array(j, "bias", c.bias.size());
    } else if (type == "leaky_relu") {
      net.emplace<LeakyRelu>(j.at("alpha").get<double>());
    } else if (type == "batch_norm") {
      auto& b = net.emplace<BatchNorm>(j.at("channels").get<int>(), j.at("momentum").get<double>(),
                                       j.at("eps").get<double>());
      const std::size_t n = std::size_t(b.channels);
      b.gamma = read_array(j, "gamma", n);
      b.beta = read_array(j, "beta", n);
      b.running_mean = read_array(j, "running_mean", n);
      b.running_var = read_array(j, "running_var", n);
      for (double v : b.running_var)
        if (!(v > 0.0)) throw std::runtime_error("model: batch-norm running variance must be positive");
    } else if (type == "max_pool") {
      net.emplace<MaxPool>(j.at("p").get<int>());
    } else if (type == "upsample") {
      net.emplace<Upsample>(j.at("p").get<int>());
    } else if (type == "crop") {
      net.emplace<Crop>(j.at("left").get<int>(), j.at("right").get<int>());
    } else {
      throw std::runtime_error("model: unknown layer type '" + type + "'");
    }
  }
  return net;
}

}  // namespace hifd::nn
