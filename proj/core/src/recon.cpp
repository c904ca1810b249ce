#include "dictct/recon.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <utility>
#include <vector>

#include "dictct/errors.hpp"

namespace dictct {

ReconProblem::ReconProblem(std::shared_ptr<const SparseMatrix> system, Eigen::VectorXd data,
                           Eigen::MatrixXd dictionary, const PatchGeometry& geometry, double mu, double delta)
    : system_(std::move(system)),
      data_(std::move(data)),
      dictionary_(std::move(dictionary)),
      perm_(geometry),
      boundary_(boundary_operator(geometry)),
      mu_(mu),
      delta_(delta) {
  if (!system_) throw DimensionError("reconstruction problem needs a system matrix");
  if (system_->cols() != geometry.num_pixels()) {
    detail::throw_dimension("system matrix columns", geometry.num_pixels(), system_->cols());
  }
  if (data_.size() != system_->rows()) detail::throw_dimension("sinogram length", system_->rows(), data_.size());
  if (dictionary_.rows() != geometry.patch_size()) {
    detail::throw_dimension("dictionary rows", geometry.patch_size(), dictionary_.rows());
  }
  if (dictionary_.cols() < 1) throw DimensionError("dictionary has no atoms");
  if (!(mu_ >= 0.0) || !(delta_ >= 0.0)) throw ConfigError("mu and delta must be >= 0");
}

ReconProblem ReconProblem::with_weights(double mu, double delta) const {
  ReconProblem copy = *this;
  if (!(mu >= 0.0) || !(delta >= 0.0)) throw ConfigError("mu and delta must be >= 0");
  copy.mu_ = mu;
  copy.delta_ = delta;
  return copy;
}

Eigen::VectorXd ReconProblem::synthesize(const Eigen::Ref<const Eigen::VectorXd>& alpha) const {
  return apply_block_dictionary(dictionary_, alpha, perm_);
}

Eigen::VectorXd ReconProblem::analyze(const Eigen::Ref<const Eigen::VectorXd>& image) const {
  return apply_block_dictionary_adjoint(dictionary_, image, perm_);
}

double mu_max(const ReconProblem& problem) {
  const Eigen::VectorXd back = problem.system().transpose() * problem.data();
  const Eigen::VectorXd coeff = problem.analyze(back);
  const double scale = static_cast<double>(problem.blocks()) / static_cast<double>(problem.measurements());
  return scale * (coeff.size() ? coeff.cwiseAbs().maxCoeff() : 0.0);
}

namespace {

double boundary_weight(const ReconProblem& problem) {
  const Index l = problem.boundary_pairs();
  return l == 0 ? 0.0 : problem.delta() * problem.delta() / static_cast<double>(l);
}

void check_length(const ReconProblem& problem, Index length) {
  if (length != problem.coefficients()) detail::throw_dimension("coefficient vector length", problem.coefficients(), length);
}

}  // namespace

SmoothEval smooth_part(const ReconProblem& problem, const Eigen::Ref<const Eigen::VectorXd>& alpha) {
  check_length(problem, alpha.size());
  const double inv_m = 1.0 / static_cast<double>(problem.measurements());
  const double w = boundary_weight(problem);

  const Eigen::VectorXd x = problem.synthesize(alpha);
  const Eigen::VectorXd residual = problem.system() * x - problem.data();
  Eigen::VectorXd image_grad = problem.system().transpose() * residual;
  image_grad *= inv_m;

  SmoothEval out;
  out.value = 0.5 * inv_m * residual.squaredNorm();
  if (w > 0.0) {
    const Eigen::VectorXd jumps = problem.boundary().matrix * x;
    out.value += 0.5 * w * jumps.squaredNorm();
    image_grad += w * (problem.boundary().matrix.transpose() * jumps);
  }
  out.gradient = problem.analyze(image_grad);
  return out;
}

double smooth_value(const ReconProblem& problem, const Eigen::Ref<const Eigen::VectorXd>& alpha) {
  check_length(problem, alpha.size());
  const Eigen::VectorXd x = problem.synthesize(alpha);
  double value = 0.5 * (problem.system() * x - problem.data()).squaredNorm() /
                 static_cast<double>(problem.measurements());
  const double w = boundary_weight(problem);
  if (w > 0.0) value += 0.5 * w * (problem.boundary().matrix * x).squaredNorm();
  return value;
}

ObjectiveTerms objective_terms(const ReconProblem& problem, const Eigen::Ref<const Eigen::VectorXd>& alpha) {
  check_length(problem, alpha.size());
  const Eigen::VectorXd x = problem.synthesize(alpha);
  ObjectiveTerms t;
  t.data_fidelity = 0.5 * (problem.system() * x - problem.data()).squaredNorm() /
                    static_cast<double>(problem.measurements());
  t.l1 = alpha.lpNorm<1>();
  t.psi = psi(x, problem.boundary());
  t.mu_over_q = problem.mu() / static_cast<double>(problem.blocks());
  t.delta = problem.delta();
  return t;
}

double objective(const ReconProblem& problem, const Eigen::Ref<const Eigen::VectorXd>& alpha) {
  return smooth_value(problem, alpha) +
         problem.mu() / static_cast<double>(problem.blocks()) * alpha.lpNorm<1>();
}

double lipschitz_estimate(const ReconProblem& problem, Index iterations) {
  const double inv_m = 1.0 / static_cast<double>(problem.measurements());
  const double w = boundary_weight(problem);
  auto hessian = [&](const Eigen::VectorXd& v) {
    const Eigen::VectorXd x = problem.synthesize(v);
    Eigen::VectorXd img = problem.system().transpose() * (problem.system() * x);
    img *= inv_m;
    if (w > 0.0) {
      img += w * (problem.boundary().matrix.transpose() * (problem.boundary().matrix * x));
    }
    return problem.analyze(img);
  };

  const Index n = problem.coefficients();
  Eigen::VectorXd v = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
  double estimate = 0.0;
  for (Index k = 0; k < iterations; ++k) {
    const Eigen::VectorXd hv = hessian(v);
    const double norm = hv.norm();
    if (norm == 0.0) return 0.0;
    estimate = norm;
    v = hv / norm;
  }
  return estimate;
}

namespace {

using Clock = std::chrono::steady_clock;

/// Accelerated proximal gradient shared by all dictionary solvers.
/// `prox(v, eta)` is the proximal map of eta * penalty; `penalty(alpha)`
/// the non-smooth term (excluding indicators, which prox enforces).
template <class Prox, class Penalty>
ReconResult accelerated_prox_grad(const ReconProblem& problem, const SolverConfig& config, Prox prox,
                                  Penalty penalty) {
  if (!(config.tolerance > 0.0)) throw ConfigError("solver tolerance must be > 0");
  if (config.max_iterations < 1) throw ConfigError("solver max_iterations must be >= 1");
  if (config.window < 1) throw ConfigError("solver window must be >= 1");
  const auto started = Clock::now();
  const Index n = problem.coefficients();

  const double lipschitz = lipschitz_estimate(problem, config.power_iterations);
  double eta = lipschitz > 0.0 ? 1.0 / lipschitz : 1.0;

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  double fx = smooth_value(problem, x) + penalty(x);
  Eigen::VectorXd y = x;
  bool momentum = false;
  double t = 1.0;

  // ring buffer of the last window+1 accepted iterates
  const auto slots = static_cast<std::size_t>(config.window + 1);
  std::vector<Eigen::VectorXd> past_x(slots);
  std::vector<double> past_f(slots, 0.0);
  std::size_t accepted = 0;
  past_x[0] = x;
  past_f[0] = fx;

  auto fixed_point_residual = [&](const Eigen::VectorXd& a) {
    const SmoothEval s = smooth_part(problem, a);
    const Eigen::VectorXd mapped = prox(Eigen::VectorXd(a - eta * s.gradient), eta);
    return (a - mapped).norm() / std::max(1.0, a.norm());
  };

  SolverReport report;
  for (Index k = 0; k < config.max_iterations; ++k) {
    report.iterations = k + 1;
    const SmoothEval sy = smooth_part(problem, y);
    Eigen::VectorXd z;
    double fz_smooth = 0.0;
    for (;;) {
      z = prox(Eigen::VectorXd(y - eta * sy.gradient), eta);
      fz_smooth = smooth_value(problem, z);
      const Eigen::VectorXd d = z - y;
      const double bound = sy.value + sy.gradient.dot(d) + d.squaredNorm() / (2.0 * eta);
      if (fz_smooth <= bound + 1e-12 * std::abs(sy.value)) break;
      if (!std::isfinite(fz_smooth) && !std::isfinite(bound)) throw DivergedError("objective became non-finite");
      eta *= 0.5;
      if (eta < 1e-300) throw DivergedError("step size collapsed during backtracking");
    }
    const double fz = fz_smooth + penalty(z);
    if (!std::isfinite(fz)) throw DivergedError("objective became non-finite");

    if (momentum && fz > fx) {
      // function-value restart: drop momentum and redo the step from x
      y = x;
      t = 1.0;
      momentum = false;
      ++report.restarts;
      continue;
    }

    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = z + ((t - 1.0) / t_next) * (z - x);
    momentum = t > 1.0;
    x = std::move(z);
    fx = fz;
    t = t_next;

    ++accepted;
    past_x[accepted % slots] = x;
    past_f[accepted % slots] = fx;
    if (accepted >= slots - 1) {
      const std::size_t old = (accepted + 1) % slots;
      const bool flat_objective = std::abs(past_f[old] - fx) <= config.tolerance * std::abs(fx);
      const bool flat_iterate = (past_x[old] - x).norm() <= config.tolerance * x.norm();
      if (flat_objective || flat_iterate) {
        report.fixed_point_residual = fixed_point_residual(x);
        if (report.fixed_point_residual < 10.0 * config.tolerance) {
          report.converged = true;
          break;
        }
      }
    }
  }
  if (!report.converged) report.fixed_point_residual = fixed_point_residual(x);

  const ObjectiveTerms terms = objective_terms(problem, x);
  report.data_fidelity = terms.data_fidelity;
  report.l1 = terms.l1;
  report.psi = terms.psi;
  report.objective = terms.total();
  report.support = (x.array().abs() > config.support_threshold).count();
  report.step = eta;

  ReconResult out;
  const auto& geom = problem.geometry();
  out.image = GrayImage::from_vector(problem.synthesize(x), geom.image_rows(), geom.image_cols());
  out.alpha = std::move(x);
  report.wall_seconds = std::chrono::duration<double>(Clock::now() - started).count();
  out.report = report;
  return out;
}

}  // namespace

ReconResult solve_main(const ReconProblem& problem, const SolverConfig& config) {
  const double shrink = problem.mu() / static_cast<double>(problem.blocks());
  auto prox = [shrink](Eigen::VectorXd v, double eta) {
    v = (v.array() - eta * shrink).cwiseMax(0.0).matrix();
    return v;
  };
  auto penalty = [shrink](const Eigen::VectorXd& a) { return shrink * a.sum(); };
  return accelerated_prox_grad(problem, config, prox, penalty);
}

ReconResult solve_nnls(const ReconProblem& problem, const SolverConfig& config) {
  return solve_main(problem.with_weights(0.0, problem.delta()), config);
}

ReconResult solve_l1ball(const ReconProblem& problem, double gamma, const SolverConfig& config) {
  if (!(gamma > 0.0)) throw ConfigError("l1-ball radius gamma must be > 0");
  const ReconProblem unpenalised = problem.with_weights(0.0, problem.delta());
  auto prox = [gamma](const Eigen::VectorXd& v, double) { return project_l1_ball(v, gamma); };
  auto penalty = [](const Eigen::VectorXd&) { return 0.0; };
  return accelerated_prox_grad(unpenalised, config, prox, penalty);
}

Eigen::VectorXd project_l1_ball(const Eigen::Ref<const Eigen::VectorXd>& v, double radius) {
  if (!(radius > 0.0)) throw ConfigError("l1-ball radius must be > 0");
  if (v.lpNorm<1>() <= radius) return v;

  std::vector<double> mags(static_cast<std::size_t>(v.size()));
  for (Index i = 0; i < v.size(); ++i) mags[static_cast<std::size_t>(i)] = std::abs(v[i]);
  std::sort(mags.begin(), mags.end(), std::greater<>());

  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < mags.size(); ++j) {
    cumulative += mags[j];
    const double candidate = (cumulative - radius) / static_cast<double>(j + 1);
    if (mags[j] - candidate > 0.0) theta = candidate;
  }
  Eigen::VectorXd out(v.size());
  for (Index i = 0; i < v.size(); ++i) {
    const double mag = std::max(std::abs(v[i]) - theta, 0.0);
    out[i] = v[i] < 0.0 ? -mag : mag;
  }
  return out;
}

GrayImage solve_art(const SparseMatrix& A, const Eigen::VectorXd& b, const GrayImage& initial, Index sweeps,
                    double relax, const ArtObserver& observer) {
  if (A.cols() != initial.size()) detail::throw_dimension("initial image size", A.cols(), initial.size());
  if (b.size() != A.rows()) detail::throw_dimension("sinogram length", A.rows(), b.size());
  if (!(relax > 0.0 && relax < 2.0)) throw ConfigError("ART relaxation must lie in (0, 2)");
  if (sweeps < 0) throw ConfigError("ART sweep count must be >= 0");

  Eigen::VectorXd row_norms(A.rows());
  for (Index i = 0; i < A.rows(); ++i) row_norms[i] = A.row(i).squaredNorm();

  Eigen::VectorXd x = initial.vec();
  for (Index sweep = 0; sweep < sweeps; ++sweep) {
    for (Index i = 0; i < A.rows(); ++i) {
      if (row_norms[i] == 0.0) continue;
      double dot = 0.0;
      for (SparseMatrix::InnerIterator it(A, i); it; ++it) dot += it.value() * x[it.col()];
      const double step = relax * (b[i] - dot) / row_norms[i];
      for (SparseMatrix::InnerIterator it(A, i); it; ++it) x[it.col()] += step * it.value();
    }
    x = x.cwiseMax(0.0);
    if (observer) observer(sweep + 1, x);
  }
  return GrayImage::from_vector(x, initial.rows(), initial.cols());
}

}  // namespace dictct
