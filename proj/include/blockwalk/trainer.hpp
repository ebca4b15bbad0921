#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "blockwalk/common.hpp"
#include "blockwalk/rng.hpp"
#include "blockwalk/theory.hpp"

namespace blockwalk {

inline double default_epsilon(int n) {
  return std::pow(static_cast<double>(n), -2.0 / 3.0);
}

inline double default_delta(int n) {
  return std::pow(static_cast<double>(n), 1.0 / 6.0);
}

// norm_ball: scale the stacked gaussian draw to Frobenius norm epsilon.
// inf_ball: scale it so the largest |entry| equals inf_ball_radius.
enum class InitMode { norm_ball, inf_ball };

// norm_threshold stops once ||w|| >= epsilon * delta (checked after each
// step, max_iterations as a cap); fixed_iterations runs exactly that many
// steps with the threshold ignored.
enum class StopRule { norm_threshold, fixed_iterations };

struct TrainConfig {
  int dim = 1;
  double eta = 0.01;
  double epsilon = 0.0;  // 0 -> n^(-2/3)
  double delta = 0.0;    // 0 -> n^(1/6)
  InitMode init = InitMode::norm_ball;
  double inf_ball_radius = 0.01;
  StopRule stop = StopRule::norm_threshold;
  int fixed_iterations = 0;
  int max_iterations = 0;  // 0 -> 10 * ceil(4 log(n/delta) / eta)
  std::uint64_t seed = 0;
  bool record_objective = false;
  bool record_error_term = true;
  bool store_states = false;
};

inline void validate(const TrainConfig& config) {
  if (config.dim < 1) throw ValidationError("trainer: dim must be >= 1");
  if (!(config.eta > 0.0) || !std::isfinite(config.eta))
    throw ValidationError("trainer: eta must be positive and finite");
  if (config.epsilon < 0.0 || !std::isfinite(config.epsilon))
    throw ValidationError("trainer: epsilon must be >= 0 and finite");
  if (config.delta < 0.0 || !std::isfinite(config.delta))
    throw ValidationError("trainer: delta must be >= 0 and finite");
  if (config.init == InitMode::inf_ball &&
      (!(config.inf_ball_radius > 0.0) || !std::isfinite(config.inf_ball_radius)))
    throw ValidationError("trainer: inf_ball_radius must be positive");
  if (config.fixed_iterations < 0)
    throw ValidationError("trainer: fixed_iterations must be >= 0");
  if (config.max_iterations < 0)
    throw ValidationError("trainer: max_iterations must be >= 0");
}

// Node embeddings x (rows index vertices) and context embeddings y.
struct EmbeddingState {
  Eigen::MatrixXd x;
  Eigen::MatrixXd y;
  int iter = 0;

  double stacked_norm() const {
    return std::sqrt(x.squaredNorm() + y.squaredNorm());
  }

  // [x; y] as one 2n x d matrix.
  Eigen::MatrixXd stacked() const {
    Eigen::MatrixXd w(x.rows() + y.rows(), x.cols());
    w.topRows(x.rows()) = x;
    w.bottomRows(y.rows()) = y;
    return w;
  }
};

// Q with Q_ij = exp(<x_i, y_j>) / sum_l exp(<x_i, y_l>), computed with the
// row maximum subtracted before exponentiation.
inline Eigen::MatrixXd softmax_matrix(const Eigen::MatrixXd& x,
                                      const Eigen::MatrixXd& y) {
  if (x.cols() != y.cols() || x.rows() != y.rows())
    throw ValidationError("trainer: embedding shapes differ");
  Eigen::MatrixXd scores = x * y.transpose();
  const Eigen::VectorXd row_max = scores.rowwise().maxCoeff();
  scores.colwise() -= row_max;
  Eigen::MatrixXd soft = scores.array().exp().matrix();
  const Eigen::VectorXd row_sum = soft.rowwise().sum();
  soft.array().colwise() /= row_sum.array();
  return soft;
}

// -sum_ij C_ij log Q_ij via the log-sum-exp form, so saturated scores stay
// finite.
inline double objective(const Eigen::MatrixXd& cooc, const Eigen::MatrixXd& x,
                        const Eigen::MatrixXd& y) {
  if (cooc.rows() != x.rows() || cooc.cols() != y.rows())
    throw ValidationError("trainer: co-occurrence shape mismatch");
  Eigen::MatrixXd scores = x * y.transpose();
  const Eigen::VectorXd row_max = scores.rowwise().maxCoeff();
  scores.colwise() -= row_max;
  const Eigen::VectorXd log_norm =
      scores.array().exp().rowwise().sum().log().matrix();
  double value = 0.0;
  for (int i = 0; i < cooc.rows(); ++i)
    value += cooc.row(i).dot((log_norm(i) - scores.row(i).array()).matrix());
  return value;
}

struct Gradient {
  Eigen::MatrixXd x;
  Eigen::MatrixXd y;
};

// With G = D_C Q - C (D_C = diag of row sums of C): dx = G y, dy = G^T x.
inline Gradient gradient(const Eigen::MatrixXd& cooc, const Eigen::MatrixXd& x,
                         const Eigen::MatrixXd& y) {
  if (cooc.rows() != cooc.cols() || cooc.rows() != x.rows() ||
      cooc.rows() != y.rows())
    throw ValidationError("trainer: co-occurrence shape mismatch");
  const Eigen::MatrixXd soft = softmax_matrix(x, y);
  const Eigen::VectorXd row_sums = cooc.rowwise().sum();
  const Eigen::MatrixXd residual = row_sums.asDiagonal() * soft - cooc;
  Gradient grad;
  grad.x.noalias() = residual * y;
  grad.y.noalias() = residual.transpose() * x;
  return grad;
}

// One simultaneous step: both gradients are evaluated at the incoming state
// before either side moves.
inline void gd_step(const Eigen::MatrixXd& cooc, EmbeddingState& state,
                    double eta) {
  const Gradient grad = gradient(cooc, state.x, state.y);
  state.x -= eta * grad.x;
  state.y -= eta * grad.y;
  ++state.iter;
}

// Frobenius norm of the step's deviation from the linearized update:
// ||E||_F = sqrt(2) ||D_C (Q - J/n)||_F.
inline double error_term_norm(const Eigen::MatrixXd& cooc,
                              const Eigen::MatrixXd& x,
                              const Eigen::MatrixXd& y) {
  const int n = static_cast<int>(cooc.rows());
  Eigen::MatrixXd centered =
      softmax_matrix(x, y).array() - 1.0 / static_cast<double>(n);
  const Eigen::VectorXd row_sums = cooc.rowwise().sum();
  centered = row_sums.asDiagonal() * centered;
  return std::sqrt(2.0) * centered.norm();
}

// Gaussian init drawn row-major into x then y from Rng(seed), then rescaled
// per InitMode. Both modes share the same pre-scaling draw, so for one seed
// they differ only by a positive factor.
inline EmbeddingState init_state(int n, const TrainConfig& config) {
  validate(config);
  if (n < 1) throw ValidationError("trainer: need n >= 1");
  EmbeddingState state;
  state.x.resize(n, config.dim);
  state.y.resize(n, config.dim);
  Rng rng(config.seed);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < config.dim; ++c) state.x(i, c) = rng.normal();
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < config.dim; ++c) state.y(i, c) = rng.normal();

  double scale = 1.0;
  if (config.init == InitMode::norm_ball) {
    const double epsilon =
        config.epsilon > 0.0 ? config.epsilon : default_epsilon(n);
    scale = epsilon / state.stacked_norm();
  } else {
    const double largest =
        std::max(state.x.cwiseAbs().maxCoeff(), state.y.cwiseAbs().maxCoeff());
    scale = config.inf_ball_radius / largest;
  }
  state.x *= scale;
  state.y *= scale;
  return state;
}

struct TrajectoryRow {
  int iter = 0;
  double norm_w = 0.0;
  double norm_z = std::numeric_limits<double>::quiet_NaN();
  double resid = std::numeric_limits<double>::quiet_NaN();
  double err_frob = std::numeric_limits<double>::quiet_NaN();
  double objective = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> cluster_means;
};

struct Trajectory {
  std::vector<TrajectoryRow> rows;  // rows[0] describes the initial state
  int t_f = 0;                      // steps actually taken
  std::string stop_reason;          // "threshold" | "cap" | "fixed"
  double epsilon = 0.0;             // resolved values used by the run
  double delta = 0.0;
  int num_blocks = 0;
  Eigen::MatrixXd z_first;  // top-eigenspace coefficients basis^T w, (k-1) x d
  Eigen::MatrixXd z_last;
  std::vector<Eigen::MatrixXd> states;  // stacked state per row (store_states)
};

// Optional probes recorded along a run. top_basis must have orthonormal
// columns (as produced by build_linear_update); labels/num_blocks switch on
// the per-block means of the first embedding coordinate.
struct TrainObservers {
  const Eigen::MatrixXd* top_basis = nullptr;
  const std::vector<int>* labels = nullptr;
  int num_blocks = 0;
};

namespace detail {

inline int resolved_max_iterations(const TrainConfig& config, int n,
                                   double delta) {
  if (config.max_iterations > 0) return config.max_iterations;
  const double bound = 4.0 * std::log(static_cast<double>(n) / delta) / config.eta;
  return 10 * static_cast<int>(std::ceil(std::max(bound, 1.0)));
}

inline void record_row(Trajectory& trajectory, const EmbeddingState& state,
                       const Eigen::MatrixXd& cooc, const TrainConfig& config,
                       const TrainObservers& observers, Eigen::MatrixXd* z_out) {
  TrajectoryRow row;
  row.iter = state.iter;
  row.norm_w = state.stacked_norm();
  if (config.record_error_term)
    row.err_frob = error_term_norm(cooc, state.x, state.y);
  if (config.record_objective)
    row.objective = objective(cooc, state.x, state.y);
  if (observers.top_basis != nullptr && observers.top_basis->size() > 0) {
    const Eigen::MatrixXd coeffs = observers.top_basis->transpose() * state.stacked();
    row.norm_z = coeffs.norm();
    row.resid = std::sqrt(
        std::max(0.0, row.norm_w * row.norm_w - row.norm_z * row.norm_z));
    if (z_out != nullptr) *z_out = coeffs;
  }
  if (observers.labels != nullptr && observers.num_blocks > 0) {
    row.cluster_means.assign(observers.num_blocks, 0.0);
    std::vector<int> sizes(observers.num_blocks, 0);
    for (int v = 0; v < state.x.rows(); ++v) {
      row.cluster_means[(*observers.labels)[v]] += state.x(v, 0);
      ++sizes[(*observers.labels)[v]];
    }
    for (int c = 0; c < observers.num_blocks; ++c)
      if (sizes[c] > 0) row.cluster_means[c] /= sizes[c];
  }
  if (config.store_states) trajectory.states.push_back(state.stacked());
  trajectory.rows.push_back(std::move(row));
}

template <typename StepFn>
std::pair<Trajectory, EmbeddingState> run_iteration(
    const Eigen::MatrixXd& cooc, const TrainConfig& config,
    const TrainObservers& observers, StepFn&& step) {
  validate(config);
  if (cooc.rows() != cooc.cols())
    throw ValidationError("trainer: co-occurrence matrix must be square");
  if (cooc.rows() < 2) throw ValidationError("trainer: need n >= 2");
  if (!cooc.allFinite())
    throw ValidationError("trainer: co-occurrence matrix has non-finite entries");
  const int n = static_cast<int>(cooc.rows());

  Trajectory trajectory;
  trajectory.epsilon = config.epsilon > 0.0 ? config.epsilon : default_epsilon(n);
  trajectory.delta = config.delta > 0.0 ? config.delta : default_delta(n);
  trajectory.num_blocks = observers.num_blocks;
  const double threshold = trajectory.epsilon * trajectory.delta;
  if (config.stop == StopRule::norm_threshold && 4.0 * threshold * threshold >= 1.0)
    warn("trainer: 4*(epsilon*delta)^2 >= 1; the stopping norm leaves the "
         "near-uniform softmax regime");
  const int limit = config.stop == StopRule::fixed_iterations
                        ? config.fixed_iterations
                        : resolved_max_iterations(config, n, trajectory.delta);

  EmbeddingState state = init_state(n, config);
  record_row(trajectory, state, cooc, config, observers, &trajectory.z_first);
  trajectory.z_last = trajectory.z_first;
  trajectory.stop_reason =
      config.stop == StopRule::fixed_iterations ? "fixed" : "cap";
  for (int t = 1; t <= limit; ++t) {
    step(state);
    if (!state.x.allFinite() || !state.y.allFinite())
      throw NumericError("trainer: non-finite state at iteration " +
                         std::to_string(t));
    record_row(trajectory, state, cooc, config, observers, &trajectory.z_last);
    if (config.stop == StopRule::norm_threshold &&
        state.stacked_norm() >= threshold) {
      trajectory.stop_reason = "threshold";
      break;
    }
  }
  trajectory.t_f = state.iter;
  return {std::move(trajectory), std::move(state)};
}

}  // namespace detail

// Gradient-descent training loop: init, then simultaneous steps until the
// stop rule fires. rows[t] describes the state after t steps.
inline std::pair<Trajectory, EmbeddingState> run_deepwalk(
    const Eigen::MatrixXd& cooc, const TrainConfig& config,
    const TrainObservers& observers = {}) {
  return detail::run_iteration(cooc, config, observers,
                               [&](EmbeddingState& state) {
                                 gd_step(cooc, state, config.eta);
                               });
}

// One linearized step: stacked state w <- Lmat w, column by column.
inline void linear_step(const LinearUpdate& update, EmbeddingState& state) {
  const int n = static_cast<int>(update.m.rows());
  if (state.x.rows() != n || state.y.rows() != n)
    throw ValidationError("trainer: state does not match update size");
  const Eigen::MatrixXd stacked = update.lmat * state.stacked();
  state.x = stacked.topRows(n);
  state.y = stacked.bottomRows(n);
  ++state.iter;
}

// Linearized counterpart of run_deepwalk: identical init for the same seed,
// Lmat applications instead of gradient steps, same stop rule and the same
// recorded quantities (err_frob still reports the neglected term's size at
// the linear iterates; cooc is used only for that and the objective).
inline std::pair<Trajectory, EmbeddingState> run_linearized(
    const LinearUpdate& update, const Eigen::MatrixXd& cooc,
    const TrainConfig& config, const TrainObservers& observers = {}) {
  if (update.m.rows() != cooc.rows())
    throw ValidationError("trainer: update does not match co-occurrence size");
  return detail::run_iteration(cooc, config, observers,
                               [&](EmbeddingState& state) {
                                 linear_step(update, state);
                               });
}

// Trajectory CSV: iter,norm_w,norm_z,resid,err_frob,objective[,mu_1..mu_K].
inline void write_trajectory(const Trajectory& trajectory,
                             const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("trajectory: cannot open for writing: " + path);
  out << "iter,norm_w,norm_z,resid,err_frob,objective";
  for (int c = 1; c <= trajectory.num_blocks; ++c) out << ",mu_" << c;
  out << '\n';
  for (const TrajectoryRow& row : trajectory.rows) {
    out << row.iter << ',' << format_double(row.norm_w) << ','
        << format_double(row.norm_z) << ',' << format_double(row.resid) << ','
        << format_double(row.err_frob) << ',' << format_double(row.objective);
    for (double mean : row.cluster_means) out << ',' << format_double(mean);
    out << '\n';
  }
  if (!out.good()) throw IoError("trajectory: write failed: " + path);
}

// Embedding CSV: node,label,x_1..x_d,y_1..y_d.
inline void write_embedding(const EmbeddingState& state,
                            const std::vector<int>& labels,
                            const std::string& path) {
  if (static_cast<int>(labels.size()) != state.x.rows())
    throw ValidationError("trainer: labels do not match embedding size");
  std::ofstream out(path);
  if (!out) throw IoError("embedding: cannot open for writing: " + path);
  const int dim = static_cast<int>(state.x.cols());
  out << "node,label";
  for (int c = 1; c <= dim; ++c) out << ",x_" << c;
  for (int c = 1; c <= dim; ++c) out << ",y_" << c;
  out << '\n';
  for (int v = 0; v < state.x.rows(); ++v) {
    out << v << ',' << labels[v];
    for (int c = 0; c < dim; ++c) out << ',' << format_double(state.x(v, c));
    for (int c = 0; c < dim; ++c) out << ',' << format_double(state.y(v, c));
    out << '\n';
  }
  if (!out.good()) throw IoError("embedding: write failed: " + path);
}

}  // namespace blockwalk
