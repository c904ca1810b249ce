#include "dictct/projector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "dictct/errors.hpp"
#include "dictct/rng.hpp"

namespace dictct {

namespace {

constexpr double kMinPiece = 1e-12;
constexpr double kParallelTol = 1e-15;

}  // namespace

double ScanGeometry::ray_offset(Index k) const {
  return (static_cast<double>(k) + 0.5 - 0.5 * static_cast<double>(rays_per_projection)) * ray_spacing;
}

ScanGeometry make_geometry(Index image_rows, Index image_cols, Index num_projections,
                           double angle_start_deg, double angle_end_deg) {
  if (image_rows != image_cols) {
    throw GeometryError("only square images are supported, got " + std::to_string(image_rows) + "x" +
                        std::to_string(image_cols));
  }
  if (image_rows < 1) throw GeometryError("image size must be positive");
  if (num_projections < 1) throw GeometryError("need at least one projection");
  if (!(angle_end_deg > angle_start_deg)) throw GeometryError("angle range must be non-empty");

  ScanGeometry g;
  g.image_size = image_rows;
  g.rays_per_projection =
      static_cast<Index>(std::floor(std::numbers::sqrt2 * static_cast<double>(image_rows)));
  if (g.rays_per_projection < 1) g.rays_per_projection = 1;
  g.ray_spacing = std::numbers::sqrt2 * static_cast<double>(image_rows) /
                  static_cast<double>(g.rays_per_projection);
  g.angles_deg.resize(static_cast<std::size_t>(num_projections));
  const double step = (angle_end_deg - angle_start_deg) / static_cast<double>(num_projections);
  for (Index j = 0; j < num_projections; ++j) {
    g.angles_deg[static_cast<std::size_t>(j)] = angle_start_deg + static_cast<double>(j) * step;
  }
  return g;
}

std::vector<std::pair<Index, double>> trace_ray(Index rows, Index cols, double offset, double angle_deg) {
  const double theta = angle_deg * std::numbers::pi / 180.0;
  const double dx = std::cos(theta);
  const double dy = std::sin(theta);
  const double ox = -offset * dy;
  const double oy = offset * dx;

  const double half_w = 0.5 * static_cast<double>(cols);
  const double half_h = 0.5 * static_cast<double>(rows);

  // Clip the line against the image box (slab method).
  double s_lo = -std::numeric_limits<double>::infinity();
  double s_hi = std::numeric_limits<double>::infinity();
  bool missed = false;
  auto clip = [&](double origin, double dir, double lo, double hi) {
    if (std::abs(dir) < kParallelTol) {
      if (origin < lo || origin > hi) missed = true;
      return;
    }
    double a = (lo - origin) / dir;
    double b = (hi - origin) / dir;
    if (a > b) std::swap(a, b);
    s_lo = std::max(s_lo, a);
    s_hi = std::min(s_hi, b);
  };
  clip(ox, dx, -half_w, half_w);
  clip(oy, dy, -half_h, half_h);
  if (missed || !(s_hi - s_lo > kMinPiece)) return {};

  // Parameters of all grid-line crossings inside the box, merged in order.
  std::vector<double> xs, ys;
  if (std::abs(dx) >= kParallelTol) {
    xs.reserve(static_cast<std::size_t>(cols + 1));
    for (Index k = 0; k <= cols; ++k) {
      const double s = (static_cast<double>(k) - half_w - ox) / dx;
      if (s > s_lo && s < s_hi) xs.push_back(s);
    }
    if (dx < 0) std::reverse(xs.begin(), xs.end());
  }
  if (std::abs(dy) >= kParallelTol) {
    ys.reserve(static_cast<std::size_t>(rows + 1));
    for (Index k = 0; k <= rows; ++k) {
      const double s = (static_cast<double>(k) - half_h - oy) / dy;
      if (s > s_lo && s < s_hi) ys.push_back(s);
    }
    if (dy < 0) std::reverse(ys.begin(), ys.end());
  }
  std::vector<double> cuts;
  cuts.reserve(xs.size() + ys.size() + 2);
  cuts.push_back(s_lo);
  std::merge(xs.begin(), xs.end(), ys.begin(), ys.end(), std::back_inserter(cuts));
  cuts.push_back(s_hi);

  std::vector<std::pair<Index, double>> out;
  out.reserve(cuts.size());
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double len = cuts[k + 1] - cuts[k];
    if (len <= kMinPiece) continue;
    const double mid = 0.5 * (cuts[k] + cuts[k + 1]);
    const double x = ox + mid * dx;
    const double y = oy + mid * dy;
    const Index c = std::clamp<Index>(static_cast<Index>(std::floor(x + half_w)), 0, cols - 1);
    const Index r = std::clamp<Index>(static_cast<Index>(std::floor(half_h - y)), 0, rows - 1);
    out.emplace_back(r + c * rows, len);
  }
  std::sort(out.begin(), out.end());
  // A pixel is entered once along a line; merge any split pieces regardless.
  std::vector<std::pair<Index, double>> merged;
  merged.reserve(out.size());
  for (const auto& e : out) {
    if (!merged.empty() && merged.back().first == e.first) {
      merged.back().second += e.second;
    } else {
      merged.push_back(e);
    }
  }
  return merged;
}

SparseMatrix assemble_matrix(const ScanGeometry& geometry) {
  const Index n = geometry.num_pixels();
  const Index m = geometry.num_rays();
  const Index nr = geometry.rays_per_projection;

  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(m) * static_cast<std::size_t>(2 * geometry.image_size));
  for (Index j = 0; j < geometry.num_projections(); ++j) {
    const double angle = geometry.angles_deg[static_cast<std::size_t>(j)];
    for (Index k = 0; k < nr; ++k) {
      const Index row = j * nr + k;
      for (const auto& [col, len] :
           trace_ray(geometry.image_size, geometry.image_size, geometry.ray_offset(k), angle)) {
        entries.emplace_back(row, col, len);
      }
    }
  }
  SparseMatrix A(m, n);
  A.setFromTriplets(entries.begin(), entries.end());
  A.makeCompressed();
  return A;
}

Sinogram simulate(const SparseMatrix& A, const GrayImage& exact, double rel_noise, std::uint64_t seed) {
  if (!(rel_noise >= 0.0) || !std::isfinite(rel_noise)) throw ConfigError("relative noise level must be >= 0");
  if (A.cols() != exact.size()) detail::throw_dimension("image size vs system matrix", A.cols(), exact.size());

  Sinogram out;
  out.seed = seed;
  out.rel_noise = rel_noise;
  out.data = A * exact.vec();
  if (rel_noise == 0.0) return out;

  const double clean_norm = out.data.norm();
  Rng rng(seed);
  Eigen::VectorXd noise(out.data.size());
  for (Index i = 0; i < noise.size(); ++i) noise[i] = rng.gaussian();
  const double noise_norm = noise.norm();
  if (clean_norm == 0.0 || noise_norm == 0.0) return out;
  noise *= rel_noise * clean_norm / noise_norm;
  out.data += noise;
  out.achieved_noise = noise.norm() / clean_norm;
  return out;
}

}  // namespace dictct
