#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dictct/blocks.hpp"
#include "dictct/errors.hpp"
#include "dictct/eval.hpp"
#include "oracles.hpp"

using namespace dictct;
namespace dt = dictct::testing;

TEST(ConeProjection, IdentityDictionaryClipsNegatives) {
  const Eigen::Vector3d x(0.5, -0.25, 2.0);
  const auto proj = project_block_to_cone(Eigen::MatrixXd::Identity(3, 3), x);
  EXPECT_NEAR((proj.coefficients - Eigen::Vector3d(0.5, 0.0, 2.0)).norm(), 0.0, 1e-14);
  EXPECT_NEAR(proj.residual_norm, 0.25, 1e-14);
}

TEST(ConeProjection, ZeroBlock) {
  std::mt19937_64 rng(1);
  const auto proj = project_block_to_cone(dt::random_matrix(4, 6, rng), Eigen::VectorXd::Zero(4));
  EXPECT_TRUE(proj.coefficients.isZero());
  EXPECT_EQ(proj.residual_norm, 0.0);
}

TEST(ConeProjection, MatchesEnumerationOracle) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 300; ++trial) {
    const Eigen::Index p = 1 + trial % 4;
    const Eigen::Index s = 1 + (trial / 4) % 4;
    const Eigen::MatrixXd D = dt::random_matrix(p, s, rng, -1.0, 1.0);
    const Eigen::VectorXd x = dt::random_vector(p, rng, -1.0, 1.0);
    const auto proj = project_block_to_cone(D, x);
    const Eigen::VectorXd z = dt::nnls_by_enumeration(D, x);
    // the minimiser in z may not be unique; the projected point is
    EXPECT_LT((D * proj.coefficients - D * z).norm(), 1e-9) << "trial " << trial;
    EXPECT_NEAR(proj.residual_norm, (D * z - x).norm(), 1e-9);
  }
}

TEST(ConeProjection, SatisfiesKktConditions) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::MatrixXd D = dt::random_matrix(9, 5 + trial % 20, rng, 0.0, 1.0);
    const Eigen::VectorXd x = dt::random_vector(9, rng, 0.0, 1.0);
    const auto proj = project_block_to_cone(D, x);
    const Eigen::VectorXd& z = proj.coefficients;
    const Eigen::VectorXd grad = D.transpose() * (D * z - x);
    EXPECT_GE(z.minCoeff(), 0.0);
    EXPECT_GE(grad.minCoeff(), -1e-8);
    EXPECT_LT(std::abs(z.dot(grad)), 1e-8);
  }
}

TEST(ApproximationError, StandardBasisIsExact) {
  std::mt19937_64 rng(4);
  const GrayImage x(dt::random_matrix(8, 8, rng, 0.0, 1.0));
  const PatchGeometry g(8, 8, {2, 4});
  EXPECT_NEAR(mean_approximation_error(Eigen::MatrixXd::Identity(8, 8), x, g), 0.0, 1e-14);
}

TEST(ApproximationError, PerBlockDefinition) {
  std::mt19937_64 rng(5);
  const GrayImage x(dt::random_matrix(6, 4, rng, 0.0, 1.0));
  const PatchGeometry g(6, 4, {3, 2});
  const Eigen::MatrixXd D = dt::random_matrix(6, 3, rng, 0.0, 1.0);
  const Eigen::VectorXd errs = block_approximation_errors(D, x, g);
  ASSERT_EQ(errs.size(), 4);
  const Eigen::VectorXd stacked = BlockPermutation(g).to_blocks(x.vec());
  const Eigen::Map<const Eigen::MatrixXd> blocks(stacked.data(), 6, 4);
  for (Eigen::Index j = 0; j < 4; ++j) {
    const Eigen::VectorXd z = dt::nnls_by_enumeration(D, blocks.col(j));
    EXPECT_NEAR(errs[j], (D * z - blocks.col(j)).norm() / std::sqrt(6.0), 1e-10);
  }
  EXPECT_NEAR(mean_approximation_error(D, x, g), errs.mean(), 1e-15);
}

TEST(ApproximationError, AddingAtomsNeverHurts) {
  std::mt19937_64 rng(6);
  const GrayImage x(dt::random_matrix(8, 8, rng, 0.0, 1.0));
  const PatchGeometry g(8, 8, {4, 4});
  Eigen::MatrixXd D = dt::random_matrix(16, 2, rng, 0.0, 1.0);
  double prev = mean_approximation_error(D, x, g);
  for (int k = 0; k < 10; ++k) {
    D.conservativeResize(Eigen::NoChange, D.cols() + 1);
    D.col(D.cols() - 1) = dt::random_vector(16, rng, 0.0, 1.0);
    const double cur = mean_approximation_error(D, x, g);
    EXPECT_LE(cur, prev + 1e-12);
    prev = cur;
  }
}

TEST(ApproximationError, DimensionChecks) {
  const GrayImage x(4, 4);
  EXPECT_THROW(mean_approximation_error(Eigen::MatrixXd::Identity(3, 3), x, PatchGeometry(4, 4, {2, 2})),
               DimensionError);
}

TEST(ReconstructionError, Cases) {
  const Eigen::Vector2d exact(3.0, 4.0);
  EXPECT_EQ(reconstruction_error(exact, exact), 0.0);
  EXPECT_NEAR(reconstruction_error(Eigen::Vector2d::Zero(), exact), 1.0, 1e-15);
  EXPECT_NEAR(reconstruction_error(Eigen::Vector2d(3.0, 5.0), exact), 0.2, 1e-15);
  EXPECT_THROW(reconstruction_error(exact, Eigen::Vector2d::Zero()), Error);
  EXPECT_THROW(reconstruction_error(Eigen::Vector3d::Zero(), exact), DimensionError);
  EXPECT_NEAR(reconstruction_error(GrayImage(Eigen::MatrixXd::Ones(2, 2)), GrayImage(Eigen::MatrixXd::Constant(2, 2, 2.0))),
              0.5, 1e-15);
}
