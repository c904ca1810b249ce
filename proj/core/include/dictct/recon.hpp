#pragma once

#include <Eigen/Core>
#include <functional>
#include <memory>

#include "dictct/blocks.hpp"
#include "dictct/boundary.hpp"
#include "dictct/image.hpp"
#include "dictct/sparse.hpp"

namespace dictct {

/// Dictionary-constrained reconstruction problem
///
///   minimise  1/(2m) ||A Pi^T (I kron D) alpha - b||^2
///             + (mu / q) ||alpha||_1 + delta^2 psi(Pi^T (I kron D) alpha)
///   subject to alpha >= 0.
///
/// The system matrix is shared so that parameter sweeps can reuse it.
class ReconProblem {
 public:
  ReconProblem(std::shared_ptr<const SparseMatrix> system, Eigen::VectorXd data, Eigen::MatrixXd dictionary,
               const PatchGeometry& geometry, double mu = 0.0, double delta = 0.0);

  const SparseMatrix& system() const { return *system_; }
  const std::shared_ptr<const SparseMatrix>& shared_system() const { return system_; }
  const Eigen::VectorXd& data() const { return data_; }
  const Eigen::MatrixXd& dictionary() const { return dictionary_; }
  const PatchGeometry& geometry() const { return perm_.geometry(); }
  const BlockPermutation& permutation() const { return perm_; }
  const BoundaryOperator& boundary() const { return boundary_; }

  double mu() const { return mu_; }
  double delta() const { return delta_; }
  ReconProblem with_weights(double mu, double delta) const;

  Index measurements() const { return system_->rows(); }       // m
  Index blocks() const { return perm_.geometry().num_blocks(); }  // q
  Index boundary_pairs() const { return boundary_.rows(); }     // l
  Index atoms() const { return dictionary_.cols(); }            // s
  Index coefficients() const { return atoms() * blocks(); }     // s q

  /// Pi^T (I kron D) alpha
  Eigen::VectorXd synthesize(const Eigen::Ref<const Eigen::VectorXd>& alpha) const;
  /// (I kron D^T) Pi v
  Eigen::VectorXd analyze(const Eigen::Ref<const Eigen::VectorXd>& image) const;

 private:
  std::shared_ptr<const SparseMatrix> system_;
  Eigen::VectorXd data_;
  Eigen::MatrixXd dictionary_;
  BlockPermutation perm_;
  BoundaryOperator boundary_;
  double mu_;
  double delta_;
};

/// Value and gradient of the smooth (least-squares plus blocking) part.
struct SmoothEval {
  double value = 0.0;
  Eigen::VectorXd gradient;
};

/// The three pieces of the objective; total() recombines them.
struct ObjectiveTerms {
  double data_fidelity = 0.0;  // 1/(2m) ||A x - b||^2
  double l1 = 0.0;             // ||alpha||_1
  double psi = 0.0;            // psi(x), unweighted
  double mu_over_q = 0.0;
  double delta = 0.0;

  double total() const { return data_fidelity + mu_over_q * l1 + delta * delta * psi; }
};

/// (q/m) ||(I kron D^T) Pi A^T b||_inf; alpha = 0 is optimal for mu >= mu_max.
double mu_max(const ReconProblem& problem);

SmoothEval smooth_part(const ReconProblem& problem, const Eigen::Ref<const Eigen::VectorXd>& alpha);
double smooth_value(const ReconProblem& problem, const Eigen::Ref<const Eigen::VectorXd>& alpha);
ObjectiveTerms objective_terms(const ReconProblem& problem, const Eigen::Ref<const Eigen::VectorXd>& alpha);
/// Full objective f(alpha) + (mu/q) ||alpha||_1.
double objective(const ReconProblem& problem, const Eigen::Ref<const Eigen::VectorXd>& alpha);

/// Largest eigenvalue of the Hessian of the smooth part, by power iteration.
double lipschitz_estimate(const ReconProblem& problem, Index iterations = 50);

struct SolverConfig {
  double tolerance = 1e-6;
  Index max_iterations = 5000;
  Index window = 5;                  // iterations between compared iterates
  Index power_iterations = 50;
  double support_threshold = 1e-8;
};

struct SolverReport {
  Index iterations = 0;
  double objective = 0.0;
  double data_fidelity = 0.0;
  double psi = 0.0;
  double l1 = 0.0;
  Index support = 0;
  double wall_seconds = 0.0;
  bool converged = false;
  double step = 0.0;                 // final step size
  double fixed_point_residual = 0.0; // ||alpha - T(alpha)|| / max(1, ||alpha||)
  Index restarts = 0;
};

struct ReconResult {
  Eigen::VectorXd alpha;
  GrayImage image;
  SolverReport report;
};

/// Accelerated proximal gradient with function-value restart and
/// backtracking. The prox of (mu/q)||.||_1 plus the orthant indicator is the
/// one-sided shrinkage max(0, v - eta mu / q).
ReconResult solve_main(const ReconProblem& problem, const SolverConfig& config = {});

/// solve_main with mu = 0 (nonnegative least squares).
ReconResult solve_nnls(const ReconProblem& problem, const SolverConfig& config = {});

/// Least squares with ||alpha||_1 <= gamma and no sign constraint (mu is
/// ignored). The image may have negative pixels.
ReconResult solve_l1ball(const ReconProblem& problem, double gamma, const SolverConfig& config = {});

/// Euclidean projection onto {z : ||z||_1 <= radius} (sort-based).
Eigen::VectorXd project_l1_ball(const Eigen::Ref<const Eigen::VectorXd>& v, double radius);

using ArtObserver = std::function<void(Index sweep, const Eigen::VectorXd& image)>;

/// Cyclic Kaczmarz sweeps with relaxation, clamped to x >= 0 after every
/// sweep. Empty rows are skipped. The observer, if given, sees the iterate
/// after each sweep.
GrayImage solve_art(const SparseMatrix& A, const Eigen::VectorXd& b, const GrayImage& initial, Index sweeps,
                    double relax = 1.0, const ArtObserver& observer = {});

}  // namespace dictct
