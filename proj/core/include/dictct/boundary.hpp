#pragma once

#include <Eigen/Core>

#include "dictct/image.hpp"
#include "dictct/sparse.hpp"

namespace dictct {

/// Differences across block boundaries.
///
/// One row per pair of 4-neighbour pixels lying in different blocks, with +1
/// on the pixel of smaller (column-major) index and -1 on the other. Rows for
/// vertical neighbours come first, then horizontal ones, each group in
/// column-major order of the first pixel. The row count is
/// N (M/P - 1) + M (N/Q - 1).
struct BoundaryOperator {
  SparseMatrix matrix;

  Index rows() const { return matrix.rows(); }
  Index cols() const { return matrix.cols(); }
};

BoundaryOperator boundary_operator(const PatchGeometry& geometry);
BoundaryOperator boundary_operator(Index image_rows, Index image_cols, Index patch_rows, Index patch_cols);

/// Blocking penalty 1/2 ||L v||^2 / l; zero when there are no boundaries.
double psi(const Eigen::Ref<const Eigen::VectorXd>& image, const BoundaryOperator& op);

}  // namespace dictct
