#pragma once

#include <filesystem>

#include "snn/network.hpp"

namespace snn {

// On-disk model layout:
//   arch.json     network spec plus parameter checksum
//   weights.f32   little-endian float32, parameter tensors in
//                 build_param_refs order
void save_model(const Network32& net, const std::filesystem::path& dir);
Network32 load_model(const std::filesystem::path& dir);

}  // namespace snn
