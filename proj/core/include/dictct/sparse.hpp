#pragma once

#include <Eigen/SparseCore>

namespace dictct {

/// Compressed sparse row matrix used for the system matrix and the
/// block-boundary difference operator.
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

}  // namespace dictct
