#include "hifd/nn/network.hpp"

#include <stdexcept>

namespace hifd::nn {

Network::Network(const Network& o) {
  for (const auto& l : o.layers_) layers_.push_back(l->clone());
}

Network& Network::operator=(const Network& o) {
  if (this != &o) {
    layers_.clear();
    for (const auto& l : o.layers_) layers_.push_back(l->clone());
  }
  return *this;
}

void Network::add(std::unique_ptr<Layer> layer) {
  if (!layer) throw std::invalid_argument("network: null layer");
  layers_.push_back(std::move(layer));
}

Tensor Network::forward(const Tensor& x) {
  Tensor h = x;
  for (auto& l : layers_) h = l->forward(h);
  return h;
}

Tensor Network::infer(const Tensor& x) const {
  Tensor h = x;
  for (const auto& l : layers_) h = l->infer(h);
  return h;
}

Tensor Network::backward(const Tensor& dy) {
  Tensor g = dy;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
  return g;
}

std::vector<ParamView> Network::params() {
  std::vector<ParamView> out;
  for (std::size_t i = 0; i < layers_.size(); ++i)
    for (auto p : layers_[i]->params()) {
      p.name = std::to_string(i) + "." + layers_[i]->kind() + "." + p.name;
      out.push_back(p);
    }
  return out;
}

std::size_t Network::param_count() {
  std::size_t n = 0;
  for (const auto& p : params()) n += p.value->size();
  return n;
}

void Network::set_backend(Backend b) {
  for (auto& l : layers_)
    if (auto* c = dynamic_cast<Conv1d*>(l.get())) c->backend = b;
}

void Network::set_running_updates(bool on) {
  for (auto& l : layers_)
    if (auto* bn = dynamic_cast<BatchNorm*>(l.get())) bn->update_running = on;
}

}  // namespace hifd::nn
