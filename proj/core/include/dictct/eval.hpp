#pragma once

#include <Eigen/Core>

#include "dictct/image.hpp"

namespace dictct {

/// Nearest point of the cone {D z : z >= 0} to one block.
struct ConeProjection {
  Eigen::VectorXd coefficients;  // z >= 0, length s
  double residual_norm = 0.0;    // ||D z - x||_2
  Index iterations = 0;
};

/// Lawson-Hanson active-set NNLS: min 1/2 ||D z - x||^2 subject to z >= 0.
ConeProjection project_block_to_cone(const Eigen::MatrixXd& dictionary,
                                     const Eigen::Ref<const Eigen::VectorXd>& block);

/// ||P_C(x_j) - x_j|| / sqrt(p) for every block j, in block order.
Eigen::VectorXd block_approximation_errors(const Eigen::MatrixXd& dictionary, const GrayImage& exact,
                                           const PatchGeometry& geometry);

/// Mean of block_approximation_errors.
double mean_approximation_error(const Eigen::MatrixXd& dictionary, const GrayImage& exact,
                                const PatchGeometry& geometry);

/// ||x - x_exact|| / ||x_exact||. Throws when x_exact is zero.
double reconstruction_error(const Eigen::Ref<const Eigen::VectorXd>& x,
                            const Eigen::Ref<const Eigen::VectorXd>& exact);
double reconstruction_error(const GrayImage& x, const GrayImage& exact);

struct EvalReport {
  double re = 0.0;
  double mae = 0.0;
  Eigen::VectorXd block_errors;
};

}  // namespace dictct
