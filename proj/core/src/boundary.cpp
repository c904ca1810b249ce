#include "dictct/boundary.hpp"

#include <vector>

#include "dictct/errors.hpp"

namespace dictct {

BoundaryOperator boundary_operator(Index image_rows, Index image_cols, Index patch_rows, Index patch_cols) {
  return boundary_operator(PatchGeometry(image_rows, image_cols, PatchShape{patch_rows, patch_cols}));
}

BoundaryOperator boundary_operator(const PatchGeometry& geometry) {
  const Index M = geometry.image_rows();
  const Index N = geometry.image_cols();
  const Index P = geometry.patch().height;
  const Index Q = geometry.patch().width;
  const Index rows = N * (geometry.block_rows() - 1) + M * (geometry.block_cols() - 1);

  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(2 * rows));
  Index row = 0;
  // (r, c) above (r + 1, c) with a block edge between them
  for (Index c = 0; c < N; ++c) {
    for (Index r = P - 1; r + 1 < M; r += P, ++row) {
      entries.emplace_back(row, r + c * M, 1.0);
      entries.emplace_back(row, r + 1 + c * M, -1.0);
    }
  }
  // (r, c) left of (r, c + 1)
  for (Index c = Q - 1; c + 1 < N; c += Q) {
    for (Index r = 0; r < M; ++r, ++row) {
      entries.emplace_back(row, r + c * M, 1.0);
      entries.emplace_back(row, r + (c + 1) * M, -1.0);
    }
  }

  BoundaryOperator op{SparseMatrix(rows, M * N)};
  op.matrix.setFromTriplets(entries.begin(), entries.end());
  return op;
}

double psi(const Eigen::Ref<const Eigen::VectorXd>& image, const BoundaryOperator& op) {
  if (image.size() != op.cols()) detail::throw_dimension("image vector length", op.cols(), image.size());
  if (op.rows() == 0) return 0.0;
  const Eigen::VectorXd diff = op.matrix * image;
  return 0.5 * diff.squaredNorm() / static_cast<double>(op.rows());
}

}  // namespace dictct
