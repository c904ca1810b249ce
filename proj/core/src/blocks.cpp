#include "dictct/blocks.hpp"

#include "dictct/errors.hpp"

namespace dictct {

BlockPermutation::BlockPermutation(Index image_rows, Index image_cols, Index patch_rows, Index patch_cols)
    : BlockPermutation(PatchGeometry(image_rows, image_cols, PatchShape{patch_rows, patch_cols})) {}

BlockPermutation::BlockPermutation(const PatchGeometry& geometry) : geometry_(geometry) {
  const Index rows = geometry.image_rows();
  const Index ph = geometry.patch().height;
  const Index pw = geometry.patch().width;
  const Index p = geometry.patch_size();
  const Index grid_rows = geometry.block_rows();
  const auto n = static_cast<std::size_t>(geometry.num_pixels());

  to_image_.resize(n);
  to_block_.resize(n);
  Index k = 0;
  for (Index block = 0; block < geometry.num_blocks(); ++block) {
    const Index r0 = (block % grid_rows) * ph;
    const Index c0 = (block / grid_rows) * pw;
    for (Index local = 0; local < p; ++local, ++k) {
      const Index i = (r0 + local % ph) + (c0 + local / ph) * rows;
      to_image_[static_cast<std::size_t>(k)] = i;
      to_block_[static_cast<std::size_t>(i)] = k;
    }
  }
}

Eigen::VectorXd BlockPermutation::to_blocks(const Eigen::Ref<const Eigen::VectorXd>& image) const {
  if (image.size() != size()) detail::throw_dimension("image vector length", size(), image.size());
  Eigen::VectorXd out(size());
  for (Index k = 0; k < size(); ++k) out[k] = image[image_index(k)];
  return out;
}

Eigen::VectorXd BlockPermutation::to_image(const Eigen::Ref<const Eigen::VectorXd>& blocks) const {
  if (blocks.size() != size()) detail::throw_dimension("block vector length", size(), blocks.size());
  Eigen::VectorXd out(size());
  for (Index k = 0; k < size(); ++k) out[image_index(k)] = blocks[k];
  return out;
}

Eigen::VectorXd apply_block_dictionary(const Eigen::MatrixXd& dictionary,
                                       const Eigen::Ref<const Eigen::VectorXd>& alpha,
                                       const BlockPermutation& perm) {
  const auto& geom = perm.geometry();
  const Index p = geom.patch_size();
  const Index q = geom.num_blocks();
  const Index s = dictionary.cols();
  if (dictionary.rows() != p) detail::throw_dimension("dictionary rows", p, dictionary.rows());
  if (alpha.size() != s * q) detail::throw_dimension("coefficient vector length", s * q, alpha.size());

  const Eigen::Map<const Eigen::MatrixXd> coeffs(alpha.data(), s, q);
  const Eigen::MatrixXd blocks = dictionary * coeffs;
  return perm.to_image(Eigen::Map<const Eigen::VectorXd>(blocks.data(), blocks.size()));
}

Eigen::VectorXd apply_block_dictionary_adjoint(const Eigen::MatrixXd& dictionary,
                                               const Eigen::Ref<const Eigen::VectorXd>& image,
                                               const BlockPermutation& perm) {
  const auto& geom = perm.geometry();
  const Index p = geom.patch_size();
  const Index q = geom.num_blocks();
  if (dictionary.rows() != p) detail::throw_dimension("dictionary rows", p, dictionary.rows());
  if (image.size() != perm.size()) detail::throw_dimension("image vector length", perm.size(), image.size());

  const Eigen::VectorXd blocked = perm.to_blocks(image);
  const Eigen::Map<const Eigen::MatrixXd> blocks(blocked.data(), p, q);
  Eigen::VectorXd out(dictionary.cols() * q);
  Eigen::Map<Eigen::MatrixXd>(out.data(), dictionary.cols(), q).noalias() = dictionary.transpose() * blocks;
  return out;
}

}  // namespace dictct
