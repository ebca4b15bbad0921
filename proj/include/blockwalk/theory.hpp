#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>

#include "blockwalk/common.hpp"
#include "blockwalk/sbm.hpp"
#include "blockwalk/spectral.hpp"
#include "blockwalk/walks.hpp"

namespace blockwalk {

// Entries of the expected co-occurrence matrix E[C] and the derived spectral
// scales. E[C] takes the value `a` inside diagonal blocks (diagonal included)
// and `b` elsewhere; gamma and theta are the separation scales that drive the
// linearized iteration: theta = n(a-b)/k is the growth eigenvalue gap factor
// and gamma = theta / 2.
struct BlockValues {
  double a = 0.0;
  double b = 0.0;
  double gamma = 0.0;
  double theta = 0.0;
};

// Closed forms. With S = T*L - T(T+1)/2 and the block eigenvalue ratio
// rho_2 = (p-q) / (p + (k-1)q):
//   a - b = (2k/n^2) * sum_{t<=T} (L-t) rho_2^t
//   a     = (2/n^2) * (S + (k-1) sum_t (L-t) rho_2^t)
//   b     = (2/n^2) * (S -        sum_t (L-t) rho_2^t)
inline BlockValues block_values(const SbmParams& params, int walk_length,
                                int window) {
  validate(params);
  if (walk_length < 2 || window < 1 || window >= walk_length)
    throw ValidationError("theory: require 1 <= window < walk_length");

  const double n = params.n;
  const double ratio = (params.p - params.q) /
                       (params.p + (params.k - 1) * params.q);
  double weighted = 0.0;  // sum_t (L - t) ratio^t
  double power = 1.0;
  for (int offset = 1; offset <= window; ++offset) {
    power *= ratio;
    weighted += (walk_length - offset) * power;
  }
  const double mass = static_cast<double>(window) * walk_length -
                      static_cast<double>(window) * (window + 1) / 2.0;

  BlockValues values;
  values.a = 2.0 / (n * n) * (mass + (params.k - 1) * weighted);
  values.b = 2.0 / (n * n) * (mass - weighted);
  values.theta = n * (values.a - values.b) / params.k;
  values.gamma = values.theta / 2.0;
  return values;
}

// Spectrum of E[C], descending: one eigenvalue (2/n) * (T*L - T(T+1)/2) on the
// all-ones direction, k-1 copies of (2/n) sum_t (L-t) rho_2^t on the
// block-difference space, and n-k zeros.
inline Eigen::VectorXd cbar_spectrum(const SbmParams& params, int walk_length,
                                     int window) {
  const BlockValues values = block_values(params, walk_length, window);
  const double block = params.n / static_cast<double>(params.k);
  Eigen::VectorXd spectrum = Eigen::VectorXd::Zero(params.n);
  spectrum(0) = block * values.a + (params.n - block) * values.b;
  const double secondary = block * (values.a - values.b);
  for (int i = 1; i < params.k; ++i) spectrum(i) = secondary;
  return spectrum;
}

// E[C] as the walk-limit operator applied to the expected adjacency. The
// result must coincide with the two-value block form given by block_values;
// both that identity and the equal-row-sum property are asserted here because
// they depend on the kept-diagonal convention of expected_adjacency.
inline Eigen::MatrixXd expected_cooccurrence(const SbmParams& params,
                                             int walk_length, int window) {
  const Eigen::MatrixXd mean_adjacency = expected_adjacency(params);
  Eigen::MatrixXd expected =
      cooccurrence_limit(mean_adjacency, walk_length, window);

  const BlockValues values = block_values(params, walk_length, window);
  const int block = params.block_size();
  double worst = 0.0;
  for (int u = 0; u < params.n; ++u)
    for (int v = 0; v < params.n; ++v) {
      const double entry = (u / block == v / block) ? values.a : values.b;
      worst = std::max(worst, std::abs(expected(u, v) - entry));
    }
  if (worst > 1e-10)
    throw NumericError("theory: expected co-occurrence deviates from block form");

  const Eigen::VectorXd row_sums = expected.rowwise().sum();
  if ((row_sums.array() - row_sums(0)).abs().maxCoeff() > 1e-10)
    throw NumericError("theory: expected co-occurrence row sums differ");
  return expected;
}

// Linearized update data around the uniform-softmax point:
//   M    = D_C J/n - C          (D_C = diag of row sums)
//   Lmat = [[I, -eta M], [-eta M^T, I]]
//   Pi   = orthogonal projector onto the top-(k-1) eigenspace of Lmat
// Lmat is symmetric by construction even when M is not. When no eigenvalue
// exceeds 1 (M vanishes, e.g. a = b), the top eigenspace is undefined and Pi
// falls back to the zero projector with `degenerate` set.
struct LinearUpdate {
  Eigen::MatrixXd m;          // n x n
  Eigen::MatrixXd lmat;       // 2n x 2n
  Eigen::MatrixXd projector;  // 2n x 2n (zero when degenerate or skipped)
  Eigen::MatrixXd basis;      // 2n x (k-1) orthonormal columns (empty when skipped)
  Eigen::VectorXd spectrum;   // eigenvalues of lmat, descending (empty when skipped)
  double eta = 0.0;
  int k = 0;
  bool degenerate = false;
};

inline LinearUpdate build_linear_update(const Eigen::MatrixXd& cooc, double eta,
                                        int k, bool with_projector = true) {
  if (cooc.rows() != cooc.cols())
    throw ValidationError("theory: co-occurrence matrix must be square");
  if (!(eta > 0.0) || !std::isfinite(eta))
    throw ValidationError("theory: eta must be positive and finite");
  if (k < 2) throw ValidationError("theory: need at least 2 blocks");
  const int n = static_cast<int>(cooc.rows());

  LinearUpdate update;
  update.eta = eta;
  update.k = k;
  const Eigen::VectorXd row_sums = cooc.rowwise().sum();
  update.m = row_sums.replicate(1, n) / static_cast<double>(n) - cooc;

  update.lmat.setIdentity(2 * n, 2 * n);
  update.lmat.block(0, n, n, n) = -eta * update.m;
  update.lmat.block(n, 0, n, n) = (-eta * update.m).transpose();

  if (!with_projector) {
    update.projector.resize(0, 0);
    return update;
  }

  const SymmetricEigen eigen = symmetric_eigen(update.lmat);
  update.spectrum = eigen.values;
  if (eigen.values(k - 2) <= 1.0 + 1e-12) {
    warn("theory: top eigenspace degenerate; projector set to zero");
    update.degenerate = true;
    update.basis = Eigen::MatrixXd::Zero(2 * n, k - 1);
    update.projector = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    return update;
  }
  update.basis = eigen.vectors.leftCols(k - 1);
  update.projector = update.basis * update.basis.transpose();
  return update;
}

// ||C - E[C]||_2 / (||E[C]||_2 * sqrt(log n / n^rho)), spectral norms by
// power iteration. The denominator rate is the concentration scale the model
// predicts for q >= n^(rho-1).
inline double concentration_ratio(const Eigen::MatrixXd& cooc,
                                  const Eigen::MatrixXd& expected, double rho) {
  if (cooc.rows() != expected.rows() || cooc.cols() != expected.cols())
    throw ValidationError("theory: matrix shapes differ");
  if (cooc.rows() != cooc.cols())
    throw ValidationError("theory: matrices must be square");
  const int n = static_cast<int>(cooc.rows());
  if (n < 2) throw ValidationError("theory: need n >= 2");

  const double deviation = spectral_norm(cooc - expected);
  const double scale = spectral_norm(expected);
  const double rate =
      std::sqrt(std::log(static_cast<double>(n)) / std::pow(n, rho));
  if (scale == 0.0 || rate == 0.0)
    throw NumericError("theory: concentration denominator is zero");
  return deviation / (scale * rate);
}

// ||P^t - Pbar^t||_2 for the random-walk transition matrices of a sampled
// and an expected adjacency (rows must have positive sums).
inline double transition_deviation(const Eigen::MatrixXd& adjacency,
                                   const Eigen::MatrixXd& mean_adjacency,
                                   int steps) {
  if (steps < 1) throw ValidationError("theory: steps must be >= 1");
  if (adjacency.rows() != adjacency.cols() ||
      mean_adjacency.rows() != mean_adjacency.cols() ||
      adjacency.rows() != mean_adjacency.rows())
    throw ValidationError("theory: adjacency shapes differ");
  const Eigen::VectorXd degrees = adjacency.rowwise().sum();
  const Eigen::VectorXd mean_degrees = mean_adjacency.rowwise().sum();
  if ((degrees.array() <= 0.0).any() || (mean_degrees.array() <= 0.0).any())
    throw IsolatedNodeError("theory: zero-degree row in adjacency");

  const Eigen::MatrixXd transition =
      degrees.cwiseInverse().asDiagonal() * adjacency;
  const Eigen::MatrixXd mean_transition =
      mean_degrees.cwiseInverse().asDiagonal() * mean_adjacency;
  Eigen::MatrixXd power = transition;
  Eigen::MatrixXd mean_power = mean_transition;
  for (int s = 1; s < steps; ++s) {
    power = power * transition;
    mean_power = mean_power * mean_transition;
  }
  return spectral_norm(power - mean_power);
}

inline double transition_deviation(const Graph& graph, const SbmParams& params,
                                   int steps) {
  return transition_deviation(adjacency_matrix(graph),
                              expected_adjacency(params), steps);
}

}  // namespace blockwalk
