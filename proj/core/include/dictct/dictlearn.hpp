#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <string_view>

#include "dictct/image.hpp"

namespace dictct {

/// Column constraint on the dictionary.
///  BoxInf: every entry in [0, 1].
///  Ball2:  columns nonnegative with ||d_j||_2 <= sqrt(p).
enum class ConstraintSet { BoxInf, Ball2 };

std::string_view to_string(ConstraintSet set);
/// Accepts "box", "boxinf", "ball", "ball2" (case-insensitive). Throws ConfigError.
ConstraintSet parse_constraint(std::string_view text);

/// Normalised max-norm residuals of the first-order optimality conditions.
struct KktResiduals {
  double dictionary_consensus = 0.0;      // ||D - U|| / max(1, ||D||)
  double code_consensus = 0.0;            // ||H - V|| / max(1, ||H||)
  double code_multiplier = 0.0;           // ||Pi - D^T (DH - Y)|| / max(1, ||Pi||)
  double dictionary_multiplier = 0.0;     // ||Lambda - (DH - Y) H^T|| / max(1, ||Lambda||)

  double max() const;
  bool below(double tolerance) const { return max() < tolerance; }
};

struct LearnConfig {
  double lambda = 1.0;            // sparsity weight, in (0, p]
  double rho = 1.0;               // ADMM penalty
  double epsilon = 1e-4;          // KKT stopping tolerance
  Index max_iterations = 2000;
  std::uint64_t seed = 0;         // selects the training columns used to start U
  ConstraintSet constraint = ConstraintSet::Ball2;
};

/// Iterates of the split problem: D = U and H = V are enforced through the
/// multipliers Lambda (p x s) and Pi (s x t).
struct AdmmState {
  Eigen::MatrixXd D;       // p x s, feasible dictionary iterate
  Eigen::MatrixXd H;       // s x t, nonnegative codes
  Eigen::MatrixXd U;       // p x s
  Eigen::MatrixXd V;       // s x t
  Eigen::MatrixXd Lambda;  // p x s
  Eigen::MatrixXd Pi;      // s x t
  double rho = 1.0;
  Index iteration = 0;
};

struct LearnProvenance {
  std::string training_hash;
  Index training_patches = 0;
  Index iterations = 0;
  bool converged = false;
  KktResiduals residuals;
  double objective = 0.0;  // 1/2 ||Y - DH||_F^2 + lambda ||H||_sum
  double code_max = 0.0;   // ||H||_max
  Index code_support = 0;  // nonzeros of H
};

/// Learned nonnegative patch dictionary.
struct Dictionary {
  Eigen::MatrixXd atoms;  // p x s
  PatchShape shape;
  ConstraintSet constraint = ConstraintSet::Ball2;
  double lambda = 0.0;
  double rho = 1.0;
  double epsilon = 1e-4;
  LearnProvenance provenance;

  Index patch_size() const { return atoms.rows(); }
  Index atom_count() const { return atoms.cols(); }
  /// True when every column satisfies the constraint within `tolerance`.
  bool is_feasible(double tolerance = 1e-10) const;
};

/// Smallest lambda for which H = 0 is stationary for data scaled to [0, 1].
inline double lambda_max(Index patch_size) { return static_cast<double>(patch_size); }

/// max(0, x - tau) entrywise: soft thresholding followed by projection onto
/// the nonnegative orthant.
Eigen::MatrixXd soft_threshold_nonneg(const Eigen::MatrixXd& x, double tau);

/// Entrywise clamp to [0, 1].
Eigen::MatrixXd project_box(const Eigen::MatrixXd& x);

/// Euclidean projection onto {z >= 0, ||z||_2 <= sqrt(p)} by Dykstra's
/// alternating projections between the orthant and the ball.
Eigen::VectorXd project_ball2_column(const Eigen::Ref<const Eigen::VectorXd>& d);

/// Column-wise projection onto the constraint set.
Eigen::MatrixXd project_dictionary(const Eigen::MatrixXd& d, ConstraintSet set);

/// U from s distinct training columns picked by the seed, V = [I 0],
/// D = U, H = V and zero multipliers. Throws InsufficientDataError if s > t.
AdmmState admm_init(const PatchMatrix& patches, Index atoms, const LearnConfig& config);

/// One sweep: D, V, H, U updates followed by the multiplier ascent.
AdmmState admm_step(AdmmState state, const Eigen::MatrixXd& patches, double lambda, ConstraintSet set);

KktResiduals kkt_residuals(const AdmmState& state, const Eigen::MatrixXd& patches);

/// Augmented Lagrangian of the split problem (indicator terms are zero at
/// feasible iterates; +inf otherwise).
double augmented_lagrangian(const AdmmState& state, const Eigen::MatrixXd& patches, double lambda,
                            ConstraintSet set);

/// 1/2 ||Y - DH||_F^2 + lambda ||H||_sum.
double coding_objective(const Eigen::MatrixXd& dictionary, const Eigen::MatrixXd& codes,
                        const Eigen::MatrixXd& patches, double lambda);

/// Runs ADMM until all KKT residuals fall below epsilon or the iteration cap
/// is reached. Without convergence the iterate with the smallest residual is
/// returned and provenance.converged is false.
Dictionary learn(const PatchMatrix& patches, Index atoms, const LearnConfig& config);

}  // namespace dictct
