#pragma once

#include <filesystem>

#include "sonn/tensor.hpp"

namespace sonn {

/// Reads a binary PGM ("P5", 1 channel) or PPM ("P6", 3 channels) with
/// maxval 255 into a [C,H,W] tensor, normalizing values by 255.
Tensor load_image(const std::filesystem::path& path);

/// Writes a [1,H,W] tensor as PGM or a [3,H,W] tensor as PPM, clamping to
/// [0,1] and rounding each value to the nearest of 255 levels. Loading a
/// file and saving it again reproduces the bytes exactly.
void save_image(const std::filesystem::path& path, const Tensor& image);

}  // namespace sonn
