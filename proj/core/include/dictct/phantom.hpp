#pragma once

#include <cstdint>

#include "dictct/image.hpp"

namespace dictct {

/// Synthetic textured test image in [0, 1]: a slowly varying background
/// covered with overlapping, shaded elliptical grains with soft edges.
/// Grain count scales with the image area; identical seeds give identical
/// images.
GrayImage textured_phantom(Index rows, Index cols, std::uint64_t seed, double grains_per_kilopixel = 4.0);

}  // namespace dictct
