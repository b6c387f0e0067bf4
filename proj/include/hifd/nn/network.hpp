#pragma once

#include <memory>
#include <vector>

#include "hifd/nn/layers.hpp"

namespace hifd::nn {

// Sequential stack of layers.
class Network {
 public:
  Network() = default;
  Network(const Network& o);
  Network& operator=(const Network& o);
  Network(Network&&) = default;
  Network& operator=(Network&&) = default;

  void add(std::unique_ptr<Layer> layer);
  template <class L, class... Args>
  L& emplace(Args&&... args) {
    auto p = std::make_unique<L>(std::forward<Args>(args)...);
    L& ref = *p;
    add(std::move(p));
    return ref;
  }

  Tensor forward(const Tensor& x);
  Tensor infer(const Tensor& x) const;
  Tensor backward(const Tensor& dy);

  std::vector<ParamView> params();
  std::size_t param_count();
  void set_backend(Backend b);
  void set_running_updates(bool on);

  std::size_t size() const { return layers_.size(); }
  Layer& layer(std::size_t i) { return *layers_[i]; }
  const Layer& layer(std::size_t i) const { return *layers_[i]; }

 private:
  std::vector<std::unique_ptr<Layer>> layers_;
};

}  // namespace hifd::nn
