#pragma once

#include <Eigen/Core>
#include <vector>

#include "dictct/image.hpp"

namespace dictct {

/// Reordering of an image vector into block-by-block order.
///
/// Blocks are taken column-major over the block grid and pixels column-major
/// inside each block, so position k of the block ordering lies in block
/// k / p at local index k % p.
class BlockPermutation {
 public:
  explicit BlockPermutation(const PatchGeometry& geometry);
  BlockPermutation(Index image_rows, Index image_cols, Index patch_rows, Index patch_cols);

  Index size() const { return static_cast<Index>(to_image_.size()); }
  const PatchGeometry& geometry() const { return geometry_; }

  /// Image index of block-order position k.
  Index image_index(Index k) const { return to_image_[static_cast<std::size_t>(k)]; }
  /// Block-order position of image index i.
  Index block_position(Index i) const { return to_block_[static_cast<std::size_t>(i)]; }

  /// Pi * x.
  Eigen::VectorXd to_blocks(const Eigen::Ref<const Eigen::VectorXd>& image) const;
  /// Pi^T * v.
  Eigen::VectorXd to_image(const Eigen::Ref<const Eigen::VectorXd>& blocks) const;

 private:
  PatchGeometry geometry_;
  std::vector<Index> to_image_;
  std::vector<Index> to_block_;
};

/// Pi^T (I kron D) alpha, computed as one p x q product without forming the
/// Kronecker matrix. `dictionary` is p x s, `alpha` has length s * q.
Eigen::VectorXd apply_block_dictionary(const Eigen::MatrixXd& dictionary,
                                       const Eigen::Ref<const Eigen::VectorXd>& alpha,
                                       const BlockPermutation& perm);

/// (I kron D^T) Pi v, the adjoint of apply_block_dictionary.
Eigen::VectorXd apply_block_dictionary_adjoint(const Eigen::MatrixXd& dictionary,
                                               const Eigen::Ref<const Eigen::VectorXd>& image,
                                               const BlockPermutation& perm);

}  // namespace dictct
