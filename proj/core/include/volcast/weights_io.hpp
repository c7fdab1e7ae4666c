#pragma once

#include <filesystem>

#include "volcast/tcn.hpp"

namespace volcast::tcn {

// Binary weight container, little-endian:
//   magic "VCTW", u32 version (1), u32 input_length, u32 layer_count,
//   per layer: u32 in_channels, out_channels, kernel, dilation, u8 activation,
//   then per layer in order: f64 weights [out][in][kernel], f64 biases [out].
// save/load round-trips are bit-exact.
void save_weights(const TcnModel& model, const std::filesystem::path& path);
TcnModel load_weights(const std::filesystem::path& path);

} // namespace volcast::tcn
