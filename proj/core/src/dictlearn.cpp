#include "dictct/dictlearn.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <string>

#include "dictct/errors.hpp"
#include "dictct/hash.hpp"
#include "dictct/rng.hpp"

namespace dictct {

namespace {

constexpr double kDykstraTol = 1e-12;
constexpr int kDykstraMaxSweeps = 1000;

double max_abs(const Eigen::MatrixXd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

double normalised(const Eigen::MatrixXd& diff, const Eigen::MatrixXd& reference) {
  return max_abs(diff) / std::max(1.0, max_abs(reference));
}

Eigen::LLT<Eigen::MatrixXd> gram_factor(const Eigen::MatrixXd& gram) {
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  // rho > 0 makes the shifted Gram matrix positive definite.
  if (llt.info() != Eigen::Success) throw Error("Gram matrix factorization failed");
  return llt;
}

}  // namespace

std::string_view to_string(ConstraintSet set) {
  return set == ConstraintSet::BoxInf ? "box" : "ball2";
}

ConstraintSet parse_constraint(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "box" || lower == "boxinf" || lower == "inf") return ConstraintSet::BoxInf;
  if (lower == "ball" || lower == "ball2" || lower == "2") return ConstraintSet::Ball2;
  throw ConfigError("unknown constraint set '" + std::string(text) + "' (expected box or ball2)");
}

double KktResiduals::max() const {
  return std::max({dictionary_consensus, code_consensus, code_multiplier, dictionary_multiplier});
}

bool Dictionary::is_feasible(double tolerance) const {
  if (atoms.size() == 0) return true;
  if (atoms.minCoeff() < -tolerance) return false;
  if (constraint == ConstraintSet::BoxInf) return atoms.maxCoeff() <= 1.0 + tolerance;
  const double radius = std::sqrt(static_cast<double>(atoms.rows()));
  return atoms.colwise().norm().maxCoeff() <= radius + tolerance;
}

Eigen::MatrixXd soft_threshold_nonneg(const Eigen::MatrixXd& x, double tau) {
  if (!(tau >= 0.0)) throw ConfigError("threshold must be >= 0");
  return (x.array() - tau).cwiseMax(0.0).matrix();
}

Eigen::MatrixXd project_box(const Eigen::MatrixXd& x) {
  return x.cwiseMax(0.0).cwiseMin(1.0);
}

Eigen::VectorXd project_ball2_column(const Eigen::Ref<const Eigen::VectorXd>& d) {
  const double radius = std::sqrt(static_cast<double>(d.size()));
  auto to_ball = [radius](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    const double norm = v.norm();
    return norm > radius ? Eigen::VectorXd(v * (radius / norm)) : v;
  };

  Eigen::VectorXd x = d;
  Eigen::VectorXd orthant_corr = Eigen::VectorXd::Zero(d.size());
  Eigen::VectorXd ball_corr = Eigen::VectorXd::Zero(d.size());
  for (int sweep = 0; sweep < kDykstraMaxSweeps; ++sweep) {
    const Eigen::VectorXd y = (x + orthant_corr).cwiseMax(0.0);
    orthant_corr += x - y;
    const Eigen::VectorXd next = to_ball(y + ball_corr);
    ball_corr += y - next;
    const double change = (next - x).norm();
    x = next;
    if (change < kDykstraTol) break;
  }
  return x;
}

Eigen::MatrixXd project_dictionary(const Eigen::MatrixXd& d, ConstraintSet set) {
  if (set == ConstraintSet::BoxInf) return project_box(d);
  Eigen::MatrixXd out(d.rows(), d.cols());
  for (Index j = 0; j < d.cols(); ++j) out.col(j) = project_ball2_column(d.col(j));
  return out;
}

AdmmState admm_init(const PatchMatrix& patches, Index atoms, const LearnConfig& config) {
  const Index t = patches.count();
  if (atoms < 1) throw ConfigError("dictionary needs at least one atom");
  if (atoms > t) {
    throw InsufficientDataError("requested " + std::to_string(atoms) + " atoms from only " + std::to_string(t) +
                                " training patches");
  }
  if (!(config.rho > 0.0)) throw ConfigError("rho must be > 0");

  Rng rng(config.seed);
  const auto picked = rng.sample_shuffled(static_cast<std::size_t>(t), static_cast<std::size_t>(atoms));

  AdmmState state;
  state.rho = config.rho;
  state.U.resize(patches.patch_size(), atoms);
  for (Index j = 0; j < atoms; ++j) state.U.col(j) = patches.data.col(static_cast<Index>(picked[static_cast<std::size_t>(j)]));
  state.V = Eigen::MatrixXd::Zero(atoms, t);
  state.V.leftCols(atoms).setIdentity();
  state.D = state.U;
  state.H = state.V;
  state.Lambda = Eigen::MatrixXd::Zero(state.U.rows(), atoms);
  state.Pi = Eigen::MatrixXd::Zero(atoms, t);
  return state;
}

AdmmState admm_step(AdmmState state, const Eigen::MatrixXd& patches, double lambda, ConstraintSet set) {
  const double rho = state.rho;
  const Index s = state.U.cols();
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(s, s);

  // (D, V) block
  state.D = project_dictionary(state.U - state.Lambda / rho, set);
  {
    const auto llt = gram_factor(state.U.transpose() * state.U + rho * eye);
    Eigen::MatrixXd rhs = state.U.transpose() * patches;
    rhs += state.Pi + rho * state.H;
    state.V = llt.solve(rhs);
  }

  // (H, U) block
  state.H = ((state.V - state.Pi / rho).array() - lambda / rho).cwiseMax(0.0).matrix();
  {
    const auto llt = gram_factor(state.V * state.V.transpose() + rho * eye);
    Eigen::MatrixXd rhs = state.V * patches.transpose();  // (Y V^T)^T
    rhs += state.Lambda.transpose() + rho * state.D.transpose();
    state.U = llt.solve(rhs).transpose();
  }

  // multiplier ascent
  state.Lambda += rho * (state.D - state.U);
  state.Pi += rho * (state.H - state.V);
  ++state.iteration;
  return state;
}

KktResiduals kkt_residuals(const AdmmState& state, const Eigen::MatrixXd& patches) {
  const Eigen::MatrixXd misfit = state.D * state.H - patches;  // DH - Y
  KktResiduals r;
  r.dictionary_consensus = normalised(state.D - state.U, state.D);
  r.code_consensus = normalised(state.H - state.V, state.H);
  r.code_multiplier = normalised(state.Pi - state.D.transpose() * misfit, state.Pi);
  r.dictionary_multiplier = normalised(state.Lambda - misfit * state.H.transpose(), state.Lambda);
  return r;
}

double coding_objective(const Eigen::MatrixXd& dictionary, const Eigen::MatrixXd& codes,
                        const Eigen::MatrixXd& patches, double lambda) {
  return 0.5 * (patches - dictionary * codes).squaredNorm() + lambda * codes.sum();
}

double augmented_lagrangian(const AdmmState& state, const Eigen::MatrixXd& patches, double lambda,
                            ConstraintSet set) {
  constexpr double kFeasTol = 1e-10;
  if (state.H.size() > 0 && state.H.minCoeff() < 0.0) return std::numeric_limits<double>::infinity();
  Dictionary probe;
  probe.atoms = state.D;
  probe.constraint = set;
  if (!probe.is_feasible(kFeasTol)) return std::numeric_limits<double>::infinity();

  const Eigen::MatrixXd dict_gap = state.D - state.U;
  const Eigen::MatrixXd code_gap = state.H - state.V;
  return 0.5 * (patches - state.U * state.V).squaredNorm() + lambda * state.H.sum() +
         (state.Lambda.array() * dict_gap.array()).sum() + (state.Pi.array() * code_gap.array()).sum() +
         0.5 * state.rho * dict_gap.squaredNorm() + 0.5 * state.rho * code_gap.squaredNorm();
}

Dictionary learn(const PatchMatrix& patches, Index atoms, const LearnConfig& config) {
  const Index p = patches.patch_size();
  if (!(config.lambda > 0.0) || config.lambda > lambda_max(p)) {
    throw ConfigError("lambda must lie in (0, " + std::to_string(p) + "]");
  }
  if (!(config.epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
  if (config.max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
  if (patches.data.size() == 0 || patches.data.minCoeff() < 0.0 || patches.data.maxCoeff() > 1.0) {
    throw ConfigError("training patches must be scaled to [0, 1]");
  }

  const Eigen::MatrixXd& Y = patches.data;
  AdmmState state = admm_init(patches, atoms, config);

  Dictionary out;
  out.shape = patches.shape;
  out.constraint = config.constraint;
  out.lambda = config.lambda;
  out.rho = config.rho;
  out.epsilon = config.epsilon;
  out.provenance.training_hash =
      Fnv1a().update(std::span<const double>(Y.data(), static_cast<std::size_t>(Y.size()))).hex();
  out.provenance.training_patches = Y.cols();

  auto record = [&](const Eigen::MatrixXd& D, const Eigen::MatrixXd& H, Index iteration,
                    const KktResiduals& res, bool converged) {
    out.atoms = D;
    auto& prov = out.provenance;
    prov.iterations = iteration;
    prov.converged = converged;
    prov.residuals = res;
    prov.objective = coding_objective(D, H, Y, config.lambda);
    prov.code_max = H.size() ? H.maxCoeff() : 0.0;
    prov.code_support = (H.array() > 0.0).count();
  };

  double best = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd best_D, best_H;
  KktResiduals best_res;
  for (Index k = 0; k < config.max_iterations; ++k) {
    state = admm_step(std::move(state), Y, config.lambda, config.constraint);
    const KktResiduals res = kkt_residuals(state, Y);
    if (!std::isfinite(res.max())) throw DivergedError("ADMM iterates became non-finite");
    if (res.below(config.epsilon)) {
      record(state.D, state.H, state.iteration, res, true);
      return out;
    }
    if (res.max() < best) {
      best = res.max();
      best_D = state.D;
      best_H = state.H;
      best_res = res;
    }
  }
  record(best_D, best_H, state.iteration, best_res, false);
  return out;
}

}  // namespace dictct
