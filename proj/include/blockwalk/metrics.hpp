#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "blockwalk/common.hpp"
#include "blockwalk/rng.hpp"
#include "blockwalk/trainer.hpp"

namespace blockwalk {

// cluster: recover groups from the embedding alone (1-D: sort and cut at the
// K-1 largest gaps; d>1: k-means with restarts), then permutation-match.
// threshold: assign each node to the nearest ground-truth centroid; this is
// the rule the separation analysis reasons about.
enum class RecoveryMode { cluster, threshold };

namespace detail {

inline Eigen::MatrixXd block_centroids(const Eigen::MatrixXd& x,
                                       const std::vector<int>& labels, int k) {
  if (static_cast<int>(labels.size()) != x.rows())
    throw ValidationError("metrics: labels do not match embedding size");
  Eigen::MatrixXd centroids = Eigen::MatrixXd::Zero(k, x.cols());
  std::vector<int> sizes(k, 0);
  for (int v = 0; v < x.rows(); ++v) {
    const int c = labels[v];
    if (c < 0 || c >= k) throw ValidationError("metrics: label out of range");
    centroids.row(c) += x.row(v);
    ++sizes[c];
  }
  for (int c = 0; c < k; ++c) {
    if (sizes[c] == 0) throw ValidationError("metrics: empty cluster");
    centroids.row(c) /= sizes[c];
  }
  return centroids;
}

// Largest fraction of nodes whose predicted group matches the true label
// under the best relabeling of the prediction.
inline double best_permutation_fraction(const std::vector<int>& predicted,
                                        const std::vector<int>& labels, int k) {
  Eigen::MatrixXi counts = Eigen::MatrixXi::Zero(k, k);
  for (std::size_t v = 0; v < labels.size(); ++v)
    ++counts(predicted[v], labels[v]);
  std::vector<int> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  long best = 0;
  do {
    long matched = 0;
    for (int c = 0; c < k; ++c) matched += counts(c, perm[c]);
    best = std::max(best, matched);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<double>(best) / static_cast<double>(labels.size());
}

// Sort the 1-D values and cut at the K-1 largest strictly positive gaps, so
// ties collapse into one group instead of being split arbitrarily.
inline std::vector<int> gap_cut_assignment(const Eigen::VectorXd& values,
                                           int k) {
  const int n = static_cast<int>(values.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (values(a) != values(b)) return values(a) < values(b);
    return a < b;
  });
  std::vector<std::pair<double, int>> gaps;
  gaps.reserve(n - 1);
  for (int i = 0; i + 1 < n; ++i) {
    const double gap = values(order[i + 1]) - values(order[i]);
    if (gap > 0.0) gaps.push_back({gap, i});
  }
  const int cuts = std::min<int>(k - 1, static_cast<int>(gaps.size()));
  std::partial_sort(gaps.begin(), gaps.begin() + cuts, gaps.end(),
                    [](const auto& a, const auto& b) {
                      if (a.first != b.first) return a.first > b.first;
                      return a.second < b.second;
                    });
  std::vector<int> cut_positions;
  for (int i = 0; i < cuts; ++i) cut_positions.push_back(gaps[i].second);
  std::sort(cut_positions.begin(), cut_positions.end());

  std::vector<int> predicted(n, 0);
  int group = 0;
  std::size_t next_cut = 0;
  for (int i = 0; i < n; ++i) {
    predicted[order[i]] = group;
    if (next_cut < cut_positions.size() && i == cut_positions[next_cut]) {
      ++group;
      ++next_cut;
    }
  }
  return predicted;
}

inline int nearest_row(const Eigen::MatrixXd& centroids,
                       const Eigen::RowVectorXd& point) {
  int best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (int c = 0; c < centroids.rows(); ++c) {
    const double dist = (point - centroids.row(c)).squaredNorm();
    if (dist < best_dist) {
      best_dist = dist;
      best = c;
    }
  }
  return best;
}

// Lloyd iterations from k distinct sampled rows; an emptied cluster keeps
// its previous centroid.
inline std::vector<int> kmeans_assignment(const Eigen::MatrixXd& x, int k,
                                          std::uint64_t seed) {
  const int n = static_cast<int>(x.rows());
  double best_inertia = std::numeric_limits<double>::infinity();
  std::vector<int> best_assignment(n, 0);
  for (std::uint64_t restart = 0; restart < 10; ++restart) {
    Rng rng(derive_seed(seed, restart));
    std::vector<int> chosen;
    while (static_cast<int>(chosen.size()) < k) {
      const int candidate = static_cast<int>(rng.below(n));
      if (std::find(chosen.begin(), chosen.end(), candidate) == chosen.end())
        chosen.push_back(candidate);
    }
    Eigen::MatrixXd centroids(k, x.cols());
    for (int c = 0; c < k; ++c) centroids.row(c) = x.row(chosen[c]);

    std::vector<int> assignment(n, -1);
    for (int round = 0; round < 100; ++round) {
      bool changed = false;
      for (int v = 0; v < n; ++v) {
        const int c = nearest_row(centroids, x.row(v));
        if (c != assignment[v]) {
          assignment[v] = c;
          changed = true;
        }
      }
      if (!changed) break;
      for (int c = 0; c < k; ++c) {
        Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(x.cols());
        int size = 0;
        for (int v = 0; v < n; ++v)
          if (assignment[v] == c) {
            sum += x.row(v);
            ++size;
          }
        if (size > 0) centroids.row(c) = sum / size;
      }
    }
    double inertia = 0.0;
    for (int v = 0; v < n; ++v)
      inertia += (x.row(v) - centroids.row(assignment[v])).squaredNorm();
    if (inertia < best_inertia) {
      best_inertia = inertia;
      best_assignment = assignment;
    }
  }
  return best_assignment;
}

}  // namespace detail

inline double recovery_fraction(const Eigen::MatrixXd& x,
                                const std::vector<int>& labels, int k,
                                RecoveryMode mode = RecoveryMode::cluster,
                                std::uint64_t seed = 0) {
  if (k < 2) throw ValidationError("metrics: need k >= 2");
  if (k > 8)
    throw ValidationError("metrics: k > 8 not supported (permutation matching)");
  if (static_cast<int>(labels.size()) != x.rows())
    throw ValidationError("metrics: labels do not match embedding size");
  if (x.rows() < k) throw ValidationError("metrics: fewer rows than clusters");

  std::vector<int> predicted;
  if (mode == RecoveryMode::threshold) {
    const Eigen::MatrixXd centroids = detail::block_centroids(x, labels, k);
    predicted.resize(x.rows());
    for (int v = 0; v < x.rows(); ++v)
      predicted[v] = detail::nearest_row(centroids, x.row(v));
  } else if (x.cols() == 1) {
    predicted = detail::gap_cut_assignment(x.col(0), k);
  } else {
    predicted = detail::kmeans_assignment(x, k, seed);
  }
  return detail::best_permutation_fraction(predicted, labels, k);
}

struct ClusterReport {
  Eigen::MatrixXd means;  // k x d ground-truth centroids
  double spread = 0.0;    // ||x - mu|| with mu the block-constant expansion
  double min_gap = 0.0;   // minimum pairwise centroid distance
  double recovery = 0.0;
  double bound_spread = 0.0;  // 5 ||x|| / delta
  double bound_gap = 0.0;     // epsilon delta / (20 k^2 sqrt(n))
  bool spread_ok = false;
  bool gap_ok = false;
};

inline ClusterReport cluster_report(const Eigen::MatrixXd& x,
                                    const std::vector<int>& labels, int k,
                                    double epsilon, double delta) {
  if (!(epsilon > 0.0) || !(delta > 0.0))
    throw ValidationError("metrics: epsilon and delta must be positive");
  ClusterReport report;
  report.means = detail::block_centroids(x, labels, k);
  Eigen::MatrixXd deviation = x;
  for (int v = 0; v < x.rows(); ++v)
    deviation.row(v) -= report.means.row(labels[v]);
  report.spread = deviation.norm();
  report.min_gap = std::numeric_limits<double>::infinity();
  for (int a = 0; a < k; ++a)
    for (int b = a + 1; b < k; ++b)
      report.min_gap = std::min(
          report.min_gap, (report.means.row(a) - report.means.row(b)).norm());
  report.recovery = recovery_fraction(x, labels, k);
  const double n = static_cast<double>(x.rows());
  report.bound_spread = 5.0 * x.norm() / delta;
  report.bound_gap = epsilon * delta / (20.0 * k * k * std::sqrt(n));
  report.spread_ok = report.spread <= report.bound_spread;
  report.gap_ok = report.min_gap >= report.bound_gap;
  return report;
}

// Per-iteration Euclidean distance between the node-embedding parts of two
// runs recorded with store_states.
inline std::vector<double> trajectory_distance(const Trajectory& run_a,
                                               const Trajectory& run_b) {
  if (run_a.states.empty() || run_b.states.empty())
    throw ValidationError("metrics: trajectories were not recorded with states");
  if (run_a.states.size() != run_b.states.size())
    throw ValidationError("metrics: trajectories have different lengths");
  std::vector<double> distances;
  distances.reserve(run_a.states.size());
  for (std::size_t t = 0; t < run_a.states.size(); ++t) {
    const Eigen::MatrixXd& a = run_a.states[t];
    const Eigen::MatrixXd& b = run_b.states[t];
    if (a.rows() != b.rows() || a.cols() != b.cols())
      throw ValidationError("metrics: trajectory state shapes differ");
    const long n = a.rows() / 2;
    distances.push_back((a.topRows(n) - b.topRows(n)).norm());
  }
  return distances;
}

struct ReportRow {
  std::uint64_t seed = 0;
  int n = 0;
  int k = 0;
  double p = 0.0;
  double q = 0.0;
  int dim = 1;
  ClusterReport report;
  int t_f = 0;
};

inline void write_report(const std::vector<ReportRow>& rows,
                         const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("report: cannot open for writing: " + path);
  out << "seed,n,K,p,q,d,spread,bound_spread,min_gap,bound_gap,recovery,t_f\n";
  for (const ReportRow& row : rows) {
    out << row.seed << ',' << row.n << ',' << row.k << ','
        << format_double(row.p) << ',' << format_double(row.q) << ','
        << row.dim << ',' << format_double(row.report.spread) << ','
        << format_double(row.report.bound_spread) << ','
        << format_double(row.report.min_gap) << ','
        << format_double(row.report.bound_gap) << ','
        << format_double(row.report.recovery) << ',' << row.t_f << '\n';
  }
  if (!out.good()) throw IoError("report: write failed: " + path);
}

}  // namespace blockwalk
