#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <utility>
#include <vector>

#include "dictct/image.hpp"
#include "dictct/sparse.hpp"

namespace dictct {

/// Parallel-beam scan of an N x N image of unit pixels centred at the origin.
///
/// Ray direction for angle theta is (cos theta, sin theta) with x pointing
/// right along the columns and y pointing up (row 0 is the top row). Ray k of
/// a projection passes through offset t_k along the normal
/// (-sin theta, cos theta), where
///   t_k = (k + 1/2 - N_r / 2) * spacing,   spacing = sqrt(2) N / N_r,
/// i.e. the N_r rays are the midpoints of N_r equal cells covering the image
/// diagonal. Row index of ray k at angle j is j * N_r + k.
struct ScanGeometry {
  Index image_size = 0;             // N (image is N x N)
  std::vector<double> angles_deg;   // N_p angles
  Index rays_per_projection = 0;    // N_r
  double ray_spacing = 1.0;

  Index num_projections() const { return static_cast<Index>(angles_deg.size()); }
  Index num_rays() const { return rays_per_projection * num_projections(); }  // m
  Index num_pixels() const { return image_size * image_size; }               // n
  double ray_offset(Index k) const;
};

/// N_p angles uniformly spaced in [angle_start, angle_end), N_r = floor(sqrt(2) N).
/// Throws GeometryError for non-square images or N_p < 1.
ScanGeometry make_geometry(Index image_rows, Index image_cols, Index num_projections,
                           double angle_start_deg = 0.0, double angle_end_deg = 180.0);

/// Intersection lengths of one line with the pixels of a rows x cols grid,
/// sorted by column-major pixel index. Pieces shorter than 1e-12 are dropped.
std::vector<std::pair<Index, double>> trace_ray(Index rows, Index cols, double offset, double angle_deg);

/// System matrix A (m x n) with a_ij the length of ray i inside pixel j.
SparseMatrix assemble_matrix(const ScanGeometry& geometry);

struct Sinogram {
  Eigen::VectorXd data;        // b = A x + e
  std::uint64_t seed = 0;
  double rel_noise = 0.0;      // requested ||e|| / ||A x||
  double achieved_noise = 0.0; // measured after rescaling
};

/// Noisy data b = A x + e with Gaussian e rescaled so that
/// ||e|| / ||A x|| equals rel_noise.
Sinogram simulate(const SparseMatrix& A, const GrayImage& exact, double rel_noise, std::uint64_t seed);

}  // namespace dictct
