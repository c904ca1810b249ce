#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dictct/dictlearn.hpp"
#include "dictct/errors.hpp"
#include "oracles.hpp"

using namespace dictct;
namespace dt = dictct::testing;

namespace {

PatchMatrix random_patches(Index p, Index t, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  PatchMatrix Y;
  Y.shape = {p, 1};
  Y.data = dt::random_matrix(p, t, rng);
  return Y;
}

Eigen::VectorXd clip_then_scale(const Eigen::VectorXd& d) {
  Eigen::VectorXd z = d.cwiseMax(0.0);
  const double r = std::sqrt(static_cast<double>(d.size()));
  if (z.norm() > r) z *= r / z.norm();
  return z;
}

// Straight-line dense version of one ADMM sweep with explicit inverses.
AdmmState reference_step(const AdmmState& s0, const Eigen::MatrixXd& Y, double lambda, ConstraintSet set) {
  AdmmState s = s0;
  const double rho = s.rho;
  const Index k = s.U.cols();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(k, k);
  Eigen::MatrixXd Dt = s.U - s.Lambda / rho;
  for (Index j = 0; j < Dt.cols(); ++j) {
    if (set == ConstraintSet::Ball2) {
      Dt.col(j) = clip_then_scale(Dt.col(j));
    } else {
      for (Index i = 0; i < Dt.rows(); ++i) Dt(i, j) = std::min(1.0, std::max(0.0, Dt(i, j)));
    }
  }
  s.D = Dt;
  s.V = (s.U.transpose() * s.U + rho * I).inverse() * (s.U.transpose() * Y + s.Pi + rho * s.H);
  Eigen::MatrixXd arg = s.V - s.Pi / rho;
  for (Index i = 0; i < arg.size(); ++i) {
    const double v = arg.data()[i];
    const double shrunk = v > lambda / rho ? v - lambda / rho : (v < -lambda / rho ? v + lambda / rho : 0.0);
    arg.data()[i] = std::max(0.0, shrunk);
  }
  s.H = arg;
  s.U = (Y * s.V.transpose() + s.Lambda + rho * s.D) * (s.V * s.V.transpose() + rho * I).inverse();
  s.Lambda = s.Lambda + rho * (s.D - s.U);
  s.Pi = s.Pi + rho * (s.H - s.V);
  return s;
}

}  // namespace

TEST(LambdaMax, EqualsPatchSize) {
  EXPECT_DOUBLE_EQ(lambda_max(25), 25.0);
  EXPECT_DOUBLE_EQ(lambda_max(400), 400.0);
}

TEST(SoftThreshold, NonnegativeShrinkage) {
  Eigen::MatrixXd x(1, 3);
  x << 2.0, -3.0, 0.2;
  const auto y = soft_threshold_nonneg(x, 0.5);
  EXPECT_DOUBLE_EQ(y(0, 0), 1.5);
  EXPECT_DOUBLE_EQ(y(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(y(0, 2), 0.0);
  EXPECT_EQ(soft_threshold_nonneg(x, 0.0), x.cwiseMax(0.0));
  EXPECT_THROW(soft_threshold_nonneg(x, -1.0), ConfigError);
}

TEST(ProjectBox, ClampsAndIsIdempotent) {
  Eigen::MatrixXd x(1, 3);
  x << 0.5, -2.0, 7.0;
  const auto y = project_box(x);
  EXPECT_EQ(y, (Eigen::MatrixXd(1, 3) << 0.5, 0.0, 1.0).finished());
  EXPECT_EQ(project_box(y), y);
}

TEST(ProjectBox, NearestPointAgainstGridSearch) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd x = dt::random_matrix(2, 1, rng, -1.5, 2.5);
    const Eigen::MatrixXd y = project_box(x);
    double best = 1e300;
    for (int i = 0; i <= 200; ++i) {
      for (int j = 0; j <= 200; ++j) {
        const double a = i / 200.0, b = j / 200.0;
        best = std::min(best, std::hypot(x(0) - a, x(1) - b));
      }
    }
    EXPECT_LE((x - y).norm(), best + 1e-12);
  }
}

TEST(ProjectBall2, HandExampleAndSpecialCases) {
  const auto z = project_ball2_column(Eigen::Vector2d(3.0, 4.0));
  EXPECT_NEAR(z[0], 3.0 * std::sqrt(2.0) / 5.0, 1e-12);
  EXPECT_NEAR(z[1], 4.0 * std::sqrt(2.0) / 5.0, 1e-12);
  const Eigen::Vector2d inside(0.3, 0.9);
  EXPECT_EQ(project_ball2_column(inside), Eigen::VectorXd(inside));
  EXPECT_TRUE(project_ball2_column(Eigen::Vector2d(-1.0, -1.0)).isZero());
}

TEST(ProjectBall2, EqualsClipThenScale) {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::VectorXd d = dt::random_vector(1 + trial % 9, rng, -3.0, 4.0);
    EXPECT_LT((project_ball2_column(d) - clip_then_scale(d)).norm(), 1e-10);
  }
}

TEST(AdmmInit, StartingPoint) {
  const auto Y = random_patches(4, 10, 1);
  LearnConfig cfg;
  cfg.seed = 7;
  const auto s = admm_init(Y, 3, cfg);
  for (Index j = 0; j < 10; ++j) {
    for (Index i = 0; i < 3; ++i) EXPECT_EQ(s.V(i, j), (i == j) ? 1.0 : 0.0);
  }
  EXPECT_EQ(s.D, s.U);
  EXPECT_EQ(s.H, s.V);
  EXPECT_TRUE(s.Lambda.isZero());
  EXPECT_TRUE(s.Pi.isZero());
  // every U column is a training column, all distinct
  for (Index a = 0; a < 3; ++a) {
    bool found = false;
    for (Index j = 0; j < 10; ++j) found = found || s.U.col(a) == Y.data.col(j);
    EXPECT_TRUE(found);
    for (Index b = a + 1; b < 3; ++b) EXPECT_NE(s.U.col(a), s.U.col(b));
  }
  EXPECT_EQ(admm_init(Y, 3, cfg).U, s.U);
  EXPECT_TRUE(project_dictionary(s.D, ConstraintSet::Ball2).isApprox(s.D));
  EXPECT_THROW(admm_init(Y, 11, cfg), InsufficientDataError);
}

TEST(AdmmStep, MatchesDenseReference) {
  const auto Y = random_patches(4, 6, 2);
  for (auto set : {ConstraintSet::Ball2, ConstraintSet::BoxInf}) {
    LearnConfig cfg;
    cfg.rho = 0.7;
    AdmmState s = admm_init(Y, 3, cfg);
    for (int k = 0; k < 4; ++k) {
      const AdmmState expected = reference_step(s, Y.data, 0.3, set);
      s = admm_step(s, Y.data, 0.3, set);
      EXPECT_LT((s.D - expected.D).cwiseAbs().maxCoeff(), 1e-10);
      EXPECT_LT((s.V - expected.V).cwiseAbs().maxCoeff(), 1e-10);
      EXPECT_LT((s.H - expected.H).cwiseAbs().maxCoeff(), 1e-10);
      EXPECT_LT((s.U - expected.U).cwiseAbs().maxCoeff(), 1e-10);
      EXPECT_LT((s.Lambda - expected.Lambda).cwiseAbs().maxCoeff(), 1e-10);
      EXPECT_LT((s.Pi - expected.Pi).cwiseAbs().maxCoeff(), 1e-10);
      s = expected;
    }
  }
}

TEST(AdmmStep, FeasibilityAfterEveryUpdate) {
  const auto Y = random_patches(9, 40, 3);
  for (auto set : {ConstraintSet::Ball2, ConstraintSet::BoxInf}) {
    AdmmState s = admm_init(Y, 12, LearnConfig{});
    for (int k = 0; k < 30; ++k) {
      s = admm_step(std::move(s), Y.data, 0.5, set);
      EXPECT_GE(s.H.minCoeff(), 0.0);
      Dictionary d;
      d.atoms = s.D;
      d.constraint = set;
      EXPECT_TRUE(d.is_feasible(1e-10));
    }
  }
}

TEST(AdmmStep, ZeroDataDrivesCodesToZero) {
  PatchMatrix Y;
  Y.shape = {4, 1};
  Y.data = Eigen::MatrixXd::Zero(4, 8);
  AdmmState s = admm_init(random_patches(4, 8, 4), 3, LearnConfig{});
  s.H.setZero();
  s.V.setZero();
  for (int k = 0; k < 200; ++k) s = admm_step(std::move(s), Y.data, 0.1, ConstraintSet::Ball2);
  EXPECT_LT(s.H.cwiseAbs().maxCoeff(), 1e-8);
}

TEST(AdmmStep, BlockUpdatesDoNotIncreaseAugmentedLagrangian) {
  // Each partial update is an exact block minimisation with the others fixed.
  const auto Y = random_patches(6, 30, 5);
  const double lambda = 0.4;
  const auto set = ConstraintSet::Ball2;
  AdmmState s = admm_init(Y, 8, LearnConfig{});
  for (int k = 0; k < 10; ++k) s = admm_step(std::move(s), Y.data, lambda, set);

  const double rho = s.rho;
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(8, 8);
  double prev = augmented_lagrangian(s, Y.data, lambda, set);
  ASSERT_TRUE(std::isfinite(prev));
  s.D = project_dictionary(s.U - s.Lambda / rho, set);
  double cur = augmented_lagrangian(s, Y.data, lambda, set);
  EXPECT_LE(cur, prev + 1e-9);
  prev = cur;
  s.V = (s.U.transpose() * s.U + rho * I).ldlt().solve(s.U.transpose() * Y.data + s.Pi + rho * s.H);
  cur = augmented_lagrangian(s, Y.data, lambda, set);
  EXPECT_LE(cur, prev + 1e-9);
  prev = cur;
  s.H = soft_threshold_nonneg(s.V - s.Pi / rho, lambda / rho);
  cur = augmented_lagrangian(s, Y.data, lambda, set);
  EXPECT_LE(cur, prev + 1e-9);
  prev = cur;
  s.U = (s.V * s.V.transpose() + rho * I).ldlt().solve((Y.data * s.V.transpose() + s.Lambda + rho * s.D).transpose()).transpose();
  cur = augmented_lagrangian(s, Y.data, lambda, set);
  EXPECT_LE(cur, prev + 1e-9);
}

TEST(AdmmStep, FactorizationObjectiveNonIncreasingWithoutSparsity) {
  // lambda = 0 and the consensus pinned (H = V, D = U): alternating exact
  // minimisation of 1/2 ||Y - U V||^2 + rho/2 ||.||^2 proximal terms.
  const auto Y = random_patches(5, 20, 6);
  AdmmState s = admm_init(Y, 5, LearnConfig{});
  double prev = 0.5 * (Y.data - s.U * s.V).squaredNorm();
  for (int k = 0; k < 25; ++k) {
    s = admm_step(std::move(s), Y.data, 0.0, ConstraintSet::Ball2);
    s.D = s.U;
    s.H = s.V;
    s.Lambda.setZero();
    s.Pi.setZero();
    const double cur = 0.5 * (Y.data - s.U * s.V).squaredNorm();
    EXPECT_LE(cur, prev + 1e-10);
    prev = cur;
  }
}

TEST(KktResiduals, ZeroAtManufacturedPoint) {
  const auto Y = random_patches(5, 12, 7);
  std::mt19937_64 rng(8);
  AdmmState s;
  s.D = dt::random_matrix(5, 4, rng);
  s.H = dt::random_matrix(4, 12, rng);
  s.U = s.D;
  s.V = s.H;
  s.Lambda = -(Y.data - s.D * s.H) * s.H.transpose();
  s.Pi = -s.D.transpose() * (Y.data - s.D * s.H);
  const auto r = kkt_residuals(s, Y.data);
  EXPECT_EQ(r.dictionary_consensus, 0.0);
  EXPECT_EQ(r.code_consensus, 0.0);
  EXPECT_EQ(r.code_multiplier, 0.0);
  EXPECT_EQ(r.dictionary_multiplier, 0.0);

  const auto r0 = kkt_residuals(admm_init(Y, 4, LearnConfig{}), Y.data);
  EXPECT_TRUE(std::isfinite(r0.max()));
  EXPECT_GE(r0.max(), 0.0);
}

TEST(Learn, LambdaAtBoundGivesEmptyCodes) {
  const auto Y = random_patches(25, 200, 9);
  LearnConfig cfg;
  cfg.lambda = lambda_max(25);
  cfg.max_iterations = 300;
  const auto d = learn(Y, 50, cfg);
  EXPECT_LE(d.provenance.code_max, cfg.epsilon);
  EXPECT_TRUE(d.is_feasible());
  // a larger penalty also reaches the KKT tolerance quickly
  cfg.rho = 100.0;
  const auto fast = learn(Y, 50, cfg);
  EXPECT_TRUE(fast.provenance.converged);
  EXPECT_LE(fast.provenance.code_max, cfg.epsilon);
}

TEST(Learn, ConvergesAndBeatsFeasiblePoint) {
  const auto Y = random_patches(4, 4, 10);
  LearnConfig cfg;
  cfg.lambda = 1e-3;
  cfg.max_iterations = 5000;
  const auto d = learn(Y, 4, cfg);
  // D = Y, H = I is feasible for the ball constraint
  const double reference = coding_objective(Y.data, Eigen::MatrixXd::Identity(4, 4), Y.data, cfg.lambda);
  EXPECT_LE(d.provenance.objective, reference + 1e-3);
  if (d.provenance.converged) EXPECT_TRUE(d.provenance.residuals.below(cfg.epsilon));
}

TEST(Learn, ConvergedRunReportsSmallResiduals) {
  const auto Y = random_patches(9, 60, 11);
  LearnConfig cfg;
  cfg.lambda = 0.5;
  cfg.rho = 5.0;
  cfg.max_iterations = 4000;
  const auto d = learn(Y, 12, cfg);
  ASSERT_TRUE(d.provenance.converged);
  EXPECT_TRUE(d.provenance.residuals.below(cfg.epsilon));
  EXPECT_TRUE(d.is_feasible());
}

TEST(Learn, PaperSmallDictionaryShapeAndDeterminism) {
  const auto Y = random_patches(25, 300, 12);
  LearnConfig cfg;
  cfg.lambda = 3.16;
  cfg.max_iterations = 30;
  const auto a = learn(Y, 100, cfg);
  const auto b = learn(Y, 100, cfg);
  EXPECT_EQ(a.atoms.rows(), 25);
  EXPECT_EQ(a.atoms.cols(), 100);
  EXPECT_EQ(a.atoms, b.atoms);
  EXPECT_EQ(a.provenance.objective, b.provenance.objective);
}

TEST(Learn, RejectsBadParameters) {
  const auto Y = random_patches(4, 10, 13);
  LearnConfig cfg;
  cfg.lambda = 5.0;
  EXPECT_THROW(learn(Y, 3, cfg), ConfigError);
  cfg.lambda = 0.0;
  EXPECT_THROW(learn(Y, 3, cfg), ConfigError);
  PatchMatrix bad = Y;
  bad.data(0, 0) = 1.5;
  cfg.lambda = 1.0;
  EXPECT_THROW(learn(bad, 3, cfg), ConfigError);
  EXPECT_THROW(parse_constraint("sphere"), ConfigError);
  EXPECT_EQ(parse_constraint("BOX"), ConstraintSet::BoxInf);
}
