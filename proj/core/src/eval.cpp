#include "dictct/eval.hpp"

#include <Eigen/QR>
#include <cmath>
#include <limits>
#include <vector>

#include "dictct/blocks.hpp"
#include "dictct/errors.hpp"

namespace dictct {

ConeProjection project_block_to_cone(const Eigen::MatrixXd& dictionary,
                                     const Eigen::Ref<const Eigen::VectorXd>& block) {
  const Index p = dictionary.rows();
  const Index s = dictionary.cols();
  if (block.size() != p) detail::throw_dimension("block length", p, block.size());

  ConeProjection out;
  out.coefficients = Eigen::VectorXd::Zero(s);
  Eigen::VectorXd& z = out.coefficients;
  const double tol = 1e-13 * std::max(1.0, dictionary.norm() * block.norm());

  std::vector<bool> passive(static_cast<std::size_t>(s), false);
  auto passive_indices = [&] {
    std::vector<Index> idx;
    for (Index j = 0; j < s; ++j) {
      if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
    }
    return idx;
  };
  auto solve_passive = [&](const std::vector<Index>& idx) {
    Eigen::MatrixXd sub(p, static_cast<Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) sub.col(static_cast<Index>(k)) = dictionary.col(idx[k]);
    const Eigen::VectorXd sol = sub.colPivHouseholderQr().solve(block);
    Eigen::VectorXd full = Eigen::VectorXd::Zero(s);
    for (std::size_t k = 0; k < idx.size(); ++k) full[idx[k]] = sol[static_cast<Index>(k)];
    return full;
  };

  const Index max_outer = 3 * s + 10;
  Eigen::VectorXd w = dictionary.transpose() * (block - dictionary * z);
  for (Index outer = 0; outer < max_outer; ++outer) {
    Index best = -1;
    double best_w = tol;
    for (Index j = 0; j < s; ++j) {
      if (!passive[static_cast<std::size_t>(j)] && w[j] > best_w) {
        best_w = w[j];
        best = j;
      }
    }
    if (best < 0) break;
    passive[static_cast<std::size_t>(best)] = true;
    ++out.iterations;

    for (Index inner = 0; inner < 3 * s + 10; ++inner) {
      const auto idx = passive_indices();
      const Eigen::VectorXd trial = solve_passive(idx);
      bool positive = true;
      for (const Index j : idx) positive = positive && trial[j] > 0.0;
      if (positive) {
        z = trial;
        break;
      }
      double step = std::numeric_limits<double>::infinity();
      for (const Index j : idx) {
        if (trial[j] <= 0.0) step = std::min(step, z[j] / (z[j] - trial[j]));
      }
      z += step * (trial - z);
      for (const Index j : idx) {
        if (z[j] <= tol) {
          z[j] = 0.0;
          passive[static_cast<std::size_t>(j)] = false;
        }
      }
    }
    w = dictionary.transpose() * (block - dictionary * z);
  }
  out.residual_norm = (dictionary * z - block).norm();
  return out;
}

Eigen::VectorXd block_approximation_errors(const Eigen::MatrixXd& dictionary, const GrayImage& exact,
                                           const PatchGeometry& geometry) {
  if (exact.rows() != geometry.image_rows() || exact.cols() != geometry.image_cols()) {
    throw DimensionError("image does not match the patch geometry");
  }
  const Index p = geometry.patch_size();
  const BlockPermutation perm(geometry);
  const Eigen::VectorXd blocked = perm.to_blocks(exact.vec());
  const double scale = 1.0 / std::sqrt(static_cast<double>(p));

  Eigen::VectorXd errors(geometry.num_blocks());
  for (Index j = 0; j < geometry.num_blocks(); ++j) {
    errors[j] = project_block_to_cone(dictionary, blocked.segment(j * p, p)).residual_norm * scale;
  }
  return errors;
}

double mean_approximation_error(const Eigen::MatrixXd& dictionary, const GrayImage& exact,
                                const PatchGeometry& geometry) {
  return block_approximation_errors(dictionary, exact, geometry).mean();
}

double reconstruction_error(const Eigen::Ref<const Eigen::VectorXd>& x,
                            const Eigen::Ref<const Eigen::VectorXd>& exact) {
  if (x.size() != exact.size()) detail::throw_dimension("image length", exact.size(), x.size());
  const double norm = exact.norm();
  if (norm == 0.0) throw ConfigError("reference image is zero");
  return (x - exact).norm() / norm;
}

double reconstruction_error(const GrayImage& x, const GrayImage& exact) {
  return reconstruction_error(x.vec(), exact.vec());
}

}  // namespace dictct
