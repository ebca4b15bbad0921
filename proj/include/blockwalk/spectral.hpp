#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "blockwalk/common.hpp"

namespace blockwalk {

// Largest singular value via power iteration on B^T B. The start vector is
// the normalized all-ones vector; if an iterate collapses to zero it is
// perturbed by a fixed alternating pattern, so the whole computation is
// deterministic. Stops when the estimate moves by at most
// tol * max(estimate, 1) or after max_iters steps (default 10 * max dim),
// returning the current estimate either way.
inline double spectral_norm(const Eigen::MatrixXd& matrix, double tol = 1e-8,
                            int max_iters = 0) {
  const int rows = static_cast<int>(matrix.rows());
  const int cols = static_cast<int>(matrix.cols());
  if (rows == 0 || cols == 0) return 0.0;
  if (max_iters <= 0) max_iters = 10 * std::max(rows, cols);

  Eigen::VectorXd direction =
      Eigen::VectorXd::Constant(cols, 1.0 / std::sqrt(static_cast<double>(cols)));
  double estimate = 0.0;
  int restarts = 0;
  for (int iter = 0; iter < max_iters; ++iter) {
    const Eigen::VectorXd image = matrix * direction;
    const double previous = estimate;
    estimate = image.norm();
    if (estimate == 0.0) {
      if (++restarts > 2) return 0.0;
      for (int i = 0; i < cols; ++i)
        direction(i) = (i % 2 == 0 ? 1.0 : -1.0) * (1.0 + i) / cols;
      direction.normalize();
      continue;
    }
    Eigen::VectorXd pulled_back = matrix.transpose() * image;
    pulled_back.normalize();
    direction = pulled_back;
    if (iter > 0 && std::abs(estimate - previous) <= tol * std::max(estimate, 1.0))
      break;
  }
  return estimate;
}

struct SymmetricEigen {
  Eigen::VectorXd values;   // descending
  Eigen::MatrixXd vectors;  // column i pairs with values(i)
};

// Dense symmetric eigendecomposition with a pinned presentation: eigenvalues
// descending; each eigenvector scaled so its first coordinate of magnitude
// > 1e-12 is positive; bitwise-equal eigenvalues ordered by lexicographic
// comparison of the sign-fixed vectors. Input symmetry is the caller's
// responsibility (only the lower triangle is read).
inline SymmetricEigen symmetric_eigen(const Eigen::MatrixXd& matrix) {
  if (matrix.rows() != matrix.cols())
    throw ValidationError("spectral: matrix must be square");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(matrix);
  if (solver.info() != Eigen::Success)
    throw NumericError("spectral: eigendecomposition failed to converge");

  const int n = static_cast<int>(matrix.rows());
  Eigen::MatrixXd vectors = solver.eigenvectors();
  for (int c = 0; c < n; ++c) {
    for (int r = 0; r < n; ++r) {
      if (std::abs(vectors(r, c)) > 1e-12) {
        if (vectors(r, c) < 0.0) vectors.col(c) *= -1.0;
        break;
      }
    }
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  const Eigen::VectorXd& raw = solver.eigenvalues();
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (raw(a) != raw(b)) return raw(a) > raw(b);
    return std::lexicographical_compare(vectors.col(a).data(),
                                        vectors.col(a).data() + n,
                                        vectors.col(b).data(),
                                        vectors.col(b).data() + n);
  });

  SymmetricEigen result;
  result.values.resize(n);
  result.vectors.resize(n, n);
  for (int i = 0; i < n; ++i) {
    result.values(i) = raw(order[i]);
    result.vectors.col(i) = vectors.col(order[i]);
  }
  return result;
}

}  // namespace blockwalk
