#pragma once

// Independent reference computations used only by the tests. Nothing here
// calls into the code paths it is used to check.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

namespace dictct::testing {

inline Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng,
                                     double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = dist(rng);
  }
  return m;
}

inline Eigen::VectorXd random_vector(Eigen::Index n, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  return random_matrix(n, 1, rng, lo, hi);
}

/// Block-order position of pixel (r, c), straight from the index formula.
inline Eigen::Index block_position(Eigen::Index r, Eigen::Index c, Eigen::Index M, Eigen::Index P, Eigen::Index Q) {
  const Eigen::Index block = (r / P) + (c / Q) * (M / P);
  const Eigen::Index local = (r % P) + (c % Q) * P;
  return block * P * Q + local;
}

/// Dense permutation matrix Pi (n x n) with (Pi x)[pos] = x[r + c M].
inline Eigen::MatrixXd dense_permutation(Eigen::Index M, Eigen::Index N, Eigen::Index P, Eigen::Index Q) {
  Eigen::MatrixXd pi = Eigen::MatrixXd::Zero(M * N, M * N);
  for (Eigen::Index c = 0; c < N; ++c) {
    for (Eigen::Index r = 0; r < M; ++r) pi(block_position(r, c, M, P, Q), r + c * M) = 1.0;
  }
  return pi;
}

/// Dense Pi^T (I kron D).
inline Eigen::MatrixXd dense_synthesis(const Eigen::MatrixXd& D, Eigen::Index M, Eigen::Index N, Eigen::Index P,
                                       Eigen::Index Q) {
  const Eigen::Index q = (M / P) * (N / Q);
  Eigen::MatrixXd kron = Eigen::MatrixXd::Zero(q * D.rows(), q * D.cols());
  for (Eigen::Index j = 0; j < q; ++j) kron.block(j * D.rows(), j * D.cols(), D.rows(), D.cols()) = D;
  return dense_permutation(M, N, P, Q).transpose() * kron;
}

/// Dense block-boundary difference matrix, rows in arbitrary order.
inline Eigen::MatrixXd dense_boundary(Eigen::Index M, Eigen::Index N, Eigen::Index P, Eigen::Index Q) {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
  for (Eigen::Index c = 0; c < N; ++c) {
    for (Eigen::Index r = 0; r < M; ++r) {
      if (r + 1 < M && (r / P) != ((r + 1) / P)) pairs.emplace_back(r + c * M, r + 1 + c * M);
      if (c + 1 < N && (c / Q) != ((c + 1) / Q)) pairs.emplace_back(r + c * M, r + (c + 1) * M);
    }
  }
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(pairs.size()), M * N);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    L(static_cast<Eigen::Index>(k), pairs[k].first) = 1.0;
    L(static_cast<Eigen::Index>(k), pairs[k].second) = -1.0;
  }
  return L;
}

/// Length of the line {t n + s d} inside the box [-W/2, W/2] x [-H/2, H/2]
/// by Liang-Barsky clipping.
inline double chord_length(double width, double height, double offset, double angle_deg) {
  const double th = angle_deg * std::numbers::pi / 180.0;
  const double dx = std::cos(th), dy = std::sin(th);
  const double ox = -offset * dy, oy = offset * dx;
  double lo = -1e300, hi = 1e300;
  const double p[4] = {-dx, dx, -dy, dy};
  const double q[4] = {ox + width / 2, width / 2 - ox, oy + height / 2, height / 2 - oy};
  for (int k = 0; k < 4; ++k) {
    if (std::abs(p[k]) < 1e-300) {
      if (q[k] < 0) return 0.0;
      continue;
    }
    const double r = q[k] / p[k];
    if (p[k] < 0) lo = std::max(lo, r);
    else hi = std::min(hi, r);
  }
  return std::max(0.0, hi - lo);
}

/// Midpoint-rule estimate of the length of the line inside pixel (r, c) of
/// an N x N grid. Samples are spaced 1/samples_per_unit apart on the part of
/// the line inside the pixel's circumscribed circle, so the counting error is
/// at most one spacing.
inline double sampled_pixel_length(Eigen::Index N, double offset, double angle_deg, Eigen::Index r, Eigen::Index c,
                                   int samples_per_unit = 10000) {
  const double th = angle_deg * std::numbers::pi / 180.0;
  const double dx = std::cos(th), dy = std::sin(th);
  const double ox = -offset * dy, oy = offset * dx;
  const double half = 0.5 * static_cast<double>(N);
  const double x0 = static_cast<double>(c) - half, x1 = x0 + 1.0;
  const double y1 = half - static_cast<double>(r), y0 = y1 - 1.0;
  const double cx = 0.5 * (x0 + x1), cy = 0.5 * (y0 + y1);
  const double s_centre = (cx - ox) * dx + (cy - oy) * dy;
  const double dist = (cx - ox) * (-dy) + (cy - oy) * dx;
  const double w2 = 0.5 - dist * dist;
  if (w2 <= 0.0) return 0.0;
  const double w = std::sqrt(w2);
  const double step = 1.0 / samples_per_unit;
  const auto count = static_cast<long>(std::ceil(2.0 * w / step));
  const double start = s_centre - 0.5 * static_cast<double>(count) * step;
  long inside = 0;
  for (long k = 0; k < count; ++k) {
    const double s = start + (static_cast<double>(k) + 0.5) * step;
    const double x = ox + s * dx, y = oy + s * dy;
    if (x >= x0 && x < x1 && y >= y0 && y < y1) ++inside;
  }
  return static_cast<double>(inside) * step;
}

/// Exact length of the line inside pixel (r, c) by clipping against the
/// pixel square alone.
inline double clipped_pixel_length(Eigen::Index N, double offset, double angle_deg, Eigen::Index r, Eigen::Index c) {
  const double th = angle_deg * std::numbers::pi / 180.0;
  const double dx = std::cos(th), dy = std::sin(th);
  const double half = 0.5 * static_cast<double>(N);
  const double x0 = static_cast<double>(c) - half;
  const double y0 = half - static_cast<double>(r) - 1.0;
  // shift so the pixel is the unit square at the origin
  const double ox = -offset * dy - x0, oy = offset * dx - y0;
  double lo = -1e300, hi = 1e300;
  auto clip = [&](double o, double d) {
    if (std::abs(d) < 1e-15) {
      if (o < 0.0 || o > 1.0) hi = lo - 1.0;
      return;
    }
    double a = -o / d, b = (1.0 - o) / d;
    if (a > b) std::swap(a, b);
    lo = std::max(lo, a);
    hi = std::min(hi, b);
  };
  clip(ox, dx);
  clip(oy, dy);
  return std::max(0.0, hi - lo);
}

/// min 1/2 ||G z - y||^2, z >= 0, by enumerating every support pattern.
inline Eigen::VectorXd nnls_by_enumeration(const Eigen::MatrixXd& G, const Eigen::VectorXd& y) {
  const Eigen::Index n = G.cols();
  Eigen::VectorXd best = Eigen::VectorXd::Zero(n);
  double best_obj = 0.5 * y.squaredNorm();
  for (unsigned long mask = 1; mask < (1UL << n); ++mask) {
    std::vector<Eigen::Index> cols;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (mask & (1UL << j)) cols.push_back(j);
    }
    Eigen::MatrixXd sub(G.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = G.col(cols[k]);
    const Eigen::VectorXd z = sub.completeOrthogonalDecomposition().solve(y);
    if (z.minCoeff() < 0.0) continue;
    Eigen::VectorXd full = Eigen::VectorXd::Zero(n);
    for (std::size_t k = 0; k < cols.size(); ++k) full[cols[k]] = z[static_cast<Eigen::Index>(k)];
    const double obj = 0.5 * (G * full - y).squaredNorm();
    if (obj < best_obj) {
      best_obj = obj;
      best = full;
    }
  }
  return best;
}

/// Projection onto the l1 ball from its optimality conditions: the
/// threshold theta solving sum max(|v_i| - theta, 0) = radius, by bisection.
inline Eigen::VectorXd l1_projection_by_bisection(const Eigen::VectorXd& v, double radius) {
  if (v.lpNorm<1>() <= radius) return v;
  double lo = 0.0, hi = v.cwiseAbs().maxCoeff();
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double mass = (v.cwiseAbs().array() - mid).cwiseMax(0.0).sum();
    (mass > radius ? lo : hi) = mid;
  }
  const double theta = 0.5 * (lo + hi);
  Eigen::VectorXd w(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    w[i] = (v[i] < 0 ? -1.0 : 1.0) * std::max(std::abs(v[i]) - theta, 0.0);
  }
  return w;
}

}  // namespace dictct::testing
