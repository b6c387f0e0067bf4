#pragma once

#include <json.hpp>

#include "hifd/nn/network.hpp"

namespace hifd::nn {

using ordered_json = nlohmann::ordered_json;

// Layers as a JSON array in stack order, keys in a fixed order. Doubles are written
// in nlohmann's shortest round-trip form, so equal weights give equal bytes.
ordered_json network_to_json(const Network& net);
Network network_from_json(const ordered_json& j);

}  // namespace hifd::nn
