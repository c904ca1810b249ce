#include "dictct/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dictct/errors.hpp"
#include "dictct/rng.hpp"

namespace dictct {

GrayImage textured_phantom(Index rows, Index cols, std::uint64_t seed, double grains_per_kilopixel) {
  if (rows < 1 || cols < 1) throw DimensionError("phantom size must be positive");
  if (!(grains_per_kilopixel >= 0.0)) throw ConfigError("grain density must be >= 0");
  Rng rng(seed);
  GrayImage img(rows, cols);

  const double fr = 2.0 * std::numbers::pi * (0.5 + rng.uniform()) / static_cast<double>(rows);
  const double fc = 2.0 * std::numbers::pi * (0.5 + rng.uniform()) / static_cast<double>(cols);
  const double phase = 2.0 * std::numbers::pi * rng.uniform();
  for (Index c = 0; c < cols; ++c) {
    for (Index r = 0; r < rows; ++r) {
      img(r, c) = 0.25 + 0.08 * std::sin(fr * static_cast<double>(r) + phase) * std::cos(fc * static_cast<double>(c));
    }
  }

  const auto grains = static_cast<Index>(grains_per_kilopixel * static_cast<double>(rows * cols) / 1000.0);
  for (Index g = 0; g < grains; ++g) {
    const double cy = rng.uniform() * static_cast<double>(rows);
    const double cx = rng.uniform() * static_cast<double>(cols);
    const double a = 3.0 + 9.0 * rng.uniform();
    const double b = a * (0.5 + 0.5 * rng.uniform());
    const double tilt = std::numbers::pi * rng.uniform();
    const double level = 0.45 + 0.5 * rng.uniform();
    const double shade = 0.25 * rng.uniform();
    const double ct = std::cos(tilt), st = std::sin(tilt);

    const auto r0 = std::max<Index>(0, static_cast<Index>(cy - a - 2));
    const auto r1 = std::min<Index>(rows - 1, static_cast<Index>(cy + a + 2));
    const auto c0 = std::max<Index>(0, static_cast<Index>(cx - a - 2));
    const auto c1 = std::min<Index>(cols - 1, static_cast<Index>(cx + a + 2));
    for (Index c = c0; c <= c1; ++c) {
      for (Index r = r0; r <= r1; ++r) {
        const double dy = static_cast<double>(r) + 0.5 - cy;
        const double dx = static_cast<double>(c) + 0.5 - cx;
        const double u = (ct * dx + st * dy) / a;
        const double v = (-st * dx + ct * dy) / b;
        const double rad = std::sqrt(u * u + v * v);
        // soft edge about one pixel wide
        const double edge = std::clamp((1.0 - rad) * b, 0.0, 1.0);
        if (edge <= 0.0) continue;
        const double value = level * (1.0 - shade * rad * rad) + shade * 0.3 * u;
        img(r, c) = (1.0 - edge) * img(r, c) + edge * value;
      }
    }
  }
  img.pixels() = img.pixels().cwiseMax(0.0).cwiseMin(1.0);
  return img;
}

}  // namespace dictct
