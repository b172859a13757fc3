#pragma once

#include <string>

#include "udnn/model.hpp"

namespace udnn {

// Checkpoint container: 8-byte magic "UDNNMDL1", a little-endian uint32
// header length, a JSON header (shapes, K, init metadata, grid fingerprint),
// then per layer the weight blocks W1R, W1I, W2R, W2I, theta as packed
// little-endian float64, matrices in row-major order.
void save_model(const UdnnModel& model, const std::string& path);
UdnnModel load_model(const std::string& path);

// Header JSON of a checkpoint without loading the weights.
std::string model_header_json(const std::string& path);

}  // namespace udnn
