#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>

namespace dictct {

using Index = Eigen::Index;

/// Two-dimensional attenuation image.
///
/// Pixels are stored column-major, so `vec()` is the vectorization used by
/// every operator in the library: pixel (r, c) sits at index r + c * rows().
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(Index rows, Index cols);
  explicit GrayImage(Eigen::MatrixXd pixels);
  /// Reshape a column-major vector into a rows x cols image.
  static GrayImage from_vector(const Eigen::VectorXd& values, Index rows, Index cols);

  Index rows() const { return pixels_.rows(); }
  Index cols() const { return pixels_.cols(); }
  Index size() const { return pixels_.size(); }

  double operator()(Index r, Index c) const { return pixels_(r, c); }
  double& operator()(Index r, Index c) { return pixels_(r, c); }

  const Eigen::MatrixXd& pixels() const { return pixels_; }
  Eigen::MatrixXd& pixels() { return pixels_; }

  Eigen::Map<const Eigen::VectorXd> vec() const { return {pixels_.data(), pixels_.size()}; }
  Eigen::Map<Eigen::VectorXd> vec() { return {pixels_.data(), pixels_.size()}; }

  bool is_nonnegative() const { return pixels_.size() == 0 || pixels_.minCoeff() >= 0.0; }
  double max_value() const { return pixels_.size() == 0 ? 0.0 : pixels_.maxCoeff(); }

  /// Sub-image with top-left corner (row, col).
  GrayImage crop(Index row, Index col, Index height, Index width) const;

 private:
  Eigen::MatrixXd pixels_;
};

/// Patch (block) size P x Q.
struct PatchShape {
  Index height = 1;
  Index width = 1;

  Index pixels() const { return height * width; }
  friend bool operator==(const PatchShape&, const PatchShape&) = default;
};

/// An M x N image partitioned into non-overlapping P x Q blocks.
class PatchGeometry {
 public:
  /// Throws DimensionError unless P divides M and Q divides N.
  PatchGeometry(Index image_rows, Index image_cols, PatchShape patch);

  Index image_rows() const { return rows_; }
  Index image_cols() const { return cols_; }
  PatchShape patch() const { return patch_; }
  Index patch_size() const { return patch_.pixels(); }          // p
  Index block_rows() const { return rows_ / patch_.height; }
  Index block_cols() const { return cols_ / patch_.width; }
  Index num_blocks() const { return block_rows() * block_cols(); }  // q
  Index num_pixels() const { return rows_ * cols_; }            // n

  friend bool operator==(const PatchGeometry&, const PatchGeometry&) = default;

 private:
  Index rows_;
  Index cols_;
  PatchShape patch_;
};

/// Training patches, one vectorized (column-major) patch per column.
struct PatchMatrix {
  PatchShape shape;
  Eigen::MatrixXd data;  // p x t

  Index patch_size() const { return data.rows(); }
  Index count() const { return data.cols(); }
};

/// Every P x Q window whose top-left corner lies on the stride lattice,
/// enumerated column-major over window positions. With `limit`, a
/// seed-determined uniform subsample of that many windows is kept (in
/// lattice order). Values are divided by the image maximum when it exceeds 1.
PatchMatrix extract_patches(const GrayImage& image, PatchShape shape, Index stride,
                            std::optional<Index> limit = std::nullopt,
                            std::uint64_t seed = 0);

}  // namespace dictct
