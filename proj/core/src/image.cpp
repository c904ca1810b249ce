#include "dictct/image.hpp"

#include <string>
#include <utility>

#include "dictct/errors.hpp"
#include "dictct/rng.hpp"

namespace dictct {

GrayImage::GrayImage(Index rows, Index cols) : pixels_(Eigen::MatrixXd::Zero(rows, cols)) {
  if (rows < 1 || cols < 1) throw DimensionError("image must be at least 1x1");
}

GrayImage::GrayImage(Eigen::MatrixXd pixels) : pixels_(std::move(pixels)) {
  if (pixels_.rows() < 1 || pixels_.cols() < 1) throw DimensionError("image must be at least 1x1");
}

GrayImage GrayImage::from_vector(const Eigen::VectorXd& values, Index rows, Index cols) {
  if (values.size() != rows * cols) detail::throw_dimension("image vector length", rows * cols, values.size());
  return GrayImage(Eigen::Map<const Eigen::MatrixXd>(values.data(), rows, cols));
}

GrayImage GrayImage::crop(Index row, Index col, Index height, Index width) const {
  if (row < 0 || col < 0 || height < 1 || width < 1 || row + height > rows() || col + width > cols()) {
    throw DimensionError("crop window outside the image");
  }
  return GrayImage(Eigen::MatrixXd(pixels_.block(row, col, height, width)));
}

PatchGeometry::PatchGeometry(Index image_rows, Index image_cols, PatchShape patch)
    : rows_(image_rows), cols_(image_cols), patch_(patch) {
  if (rows_ < 1 || cols_ < 1 || patch_.height < 1 || patch_.width < 1) {
    throw DimensionError("image and patch sizes must be positive");
  }
  if (rows_ % patch_.height != 0 || cols_ % patch_.width != 0) {
    throw DimensionError("patch " + std::to_string(patch_.height) + "x" + std::to_string(patch_.width) +
                         " does not tile image " + std::to_string(rows_) + "x" + std::to_string(cols_));
  }
}

PatchMatrix extract_patches(const GrayImage& image, PatchShape shape, Index stride,
                            std::optional<Index> limit, std::uint64_t seed) {
  if (shape.height < 1 || shape.width < 1) throw DimensionError("patch size must be positive");
  if (shape.height > image.rows() || shape.width > image.cols()) {
    throw DimensionError("patch larger than image");
  }
  if (stride < 1) throw ConfigError("patch stride must be >= 1");
  if (!image.is_nonnegative()) throw ConfigError("training image has negative values");

  const Index pos_rows = (image.rows() - shape.height) / stride + 1;
  const Index pos_cols = (image.cols() - shape.width) / stride + 1;
  const Index total = pos_rows * pos_cols;

  std::vector<std::size_t> chosen;
  if (limit && *limit < total) {
    if (*limit < 1) throw ConfigError("patch limit must be >= 1");
    Rng rng(seed);
    chosen = rng.sample_sorted(static_cast<std::size_t>(total), static_cast<std::size_t>(*limit));
  } else {
    chosen.resize(static_cast<std::size_t>(total));
    for (std::size_t k = 0; k < chosen.size(); ++k) chosen[k] = k;
  }

  const double peak = image.max_value();
  const double scale = peak > 1.0 ? 1.0 / peak : 1.0;

  PatchMatrix out{shape, Eigen::MatrixXd(shape.pixels(), static_cast<Index>(chosen.size()))};
  for (Index j = 0; j < out.count(); ++j) {
    const auto pos = static_cast<Index>(chosen[static_cast<std::size_t>(j)]);
    const Index r0 = (pos % pos_rows) * stride;
    const Index c0 = (pos / pos_rows) * stride;
    Eigen::Map<Eigen::MatrixXd> patch(out.data.col(j).data(), shape.height, shape.width);
    patch = image.pixels().block(r0, c0, shape.height, shape.width) * scale;
  }
  return out;
}

}  // namespace dictct
