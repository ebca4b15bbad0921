#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "blockwalk/common.hpp"
#include "blockwalk/rng.hpp"
#include "blockwalk/sbm.hpp"

namespace blockwalk {

// Random-walk corpus parameters: num_walks independent walks of walk_length
// vertices each; co-occurrences are counted for every ordered pair at offset
// 1..window inside a walk.
struct WalkConfig {
  std::int64_t num_walks = 2000;
  int walk_length = 10;
  int window = 5;
};

inline void validate(const WalkConfig& config) {
  if (config.num_walks < 1) throw ValidationError("walks: num_walks must be >= 1");
  if (config.walk_length < 2)
    throw ValidationError("walks: walk_length must be >= 2");
  if (config.window < 1 || config.window >= config.walk_length)
    throw ValidationError("walks: require 1 <= window < walk_length");
}

enum class CoocKind { empirical, limiting, expected };

inline std::string to_string(CoocKind kind) {
  switch (kind) {
    case CoocKind::empirical: return "empirical";
    case CoocKind::limiting: return "limiting";
    case CoocKind::expected: return "expected";
  }
  throw ValidationError("cooc: unknown kind");
}

inline CoocKind cooc_kind_from_string(const std::string& name) {
  if (name == "empirical") return CoocKind::empirical;
  if (name == "limiting") return CoocKind::limiting;
  if (name == "expected") return CoocKind::expected;
  throw IoError("cooc: unknown kind: " + name);
}

// Symmetric co-occurrence matrix together with how it was produced.
// For kind == empirical, values are raw pair counts divided by num_walks;
// seed is meaningful only in that case.
struct CoocMatrix {
  Eigen::MatrixXd values;
  CoocKind kind = CoocKind::empirical;
  WalkConfig config;
  std::uint64_t seed = 0;
};

namespace detail {

// Cumulative degree array for stationary start sampling.
inline std::vector<double> degree_cumulative(const Graph& graph) {
  std::vector<double> cumulative(graph.n);
  double running = 0.0;
  for (int v = 0; v < graph.n; ++v) {
    running += graph.degree(v);
    cumulative[v] = running;
  }
  return cumulative;
}

inline void sample_walk_into(const Graph& graph,
                             const std::vector<double>& cumulative, int walk_length,
                             Rng& rng, std::vector<int>& walk) {
  walk.resize(walk_length);
  const double target = rng.uniform() * cumulative.back();
  int current = static_cast<int>(
      std::upper_bound(cumulative.begin(), cumulative.end(), target) -
      cumulative.begin());
  if (current >= graph.n) current = graph.n - 1;
  walk[0] = current;
  for (int step = 1; step < walk_length; ++step) {
    const auto& adj = graph.neighbors[current];
    current = adj[rng.below(adj.size())];
    walk[step] = current;
  }
}

}  // namespace detail

// One walk: the start vertex is drawn from the stationary distribution
// deg(v) / 2|E|, every later vertex uniformly among the neighbors of its
// predecessor. Deterministic in (graph, seed).
inline std::vector<int> sample_walk(const Graph& graph, int walk_length,
                                    std::uint64_t seed) {
  if (walk_length < 1) throw ValidationError("walks: walk_length must be >= 1");
  if (graph.has_isolated_vertex())
    throw IsolatedNodeError("walks: graph has an isolated vertex");
  const std::vector<double> cumulative = detail::degree_cumulative(graph);
  Rng rng(seed);
  std::vector<int> walk;
  detail::sample_walk_into(graph, cumulative, walk_length, rng, walk);
  return walk;
}

// Empirical co-occurrence matrix. Walk m runs on seed derive_seed(seed, m),
// so the corpus is reproducible walk-by-walk and independent of traversal
// order. Counts accumulate in integers; each walk contributes exactly
// 2 * sum_{t=1..T} (L - t) ordered pairs, and that identity is checked on the
// totals before the single division by num_walks.
inline CoocMatrix build_cooccurrence(const Graph& graph, const WalkConfig& config,
                                     std::uint64_t seed) {
  validate(config);
  if (graph.has_isolated_vertex())
    throw IsolatedNodeError("walks: graph has an isolated vertex");

  const int n = graph.n;
  const int length = config.walk_length;
  const int window = config.window;
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(n) * n, 0);
  const std::vector<double> cumulative = detail::degree_cumulative(graph);

  std::vector<int> walk;
  for (std::int64_t m = 0; m < config.num_walks; ++m) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(m)));
    detail::sample_walk_into(graph, cumulative, length, rng, walk);
    for (int offset = 1; offset <= window; ++offset) {
      for (int start = 0; start + offset < length; ++start) {
        const int u = walk[start];
        const int v = walk[start + offset];
        ++counts[static_cast<std::size_t>(u) * n + v];
        ++counts[static_cast<std::size_t>(v) * n + u];
      }
    }
  }

  std::uint64_t total = 0;
  for (std::uint64_t c : counts) total += c;
  const std::uint64_t pairs_per_walk =
      2ULL * (static_cast<std::uint64_t>(window) * length -
              static_cast<std::uint64_t>(window) * (window + 1) / 2);
  if (total != pairs_per_walk * static_cast<std::uint64_t>(config.num_walks))
    throw NumericError("walks: co-occurrence count identity violated");

  CoocMatrix cooc;
  cooc.kind = CoocKind::empirical;
  cooc.config = config;
  cooc.seed = seed;
  cooc.values.resize(n, n);
  const double scale = 1.0 / static_cast<double>(config.num_walks);
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v)
      cooc.values(u, v) =
          static_cast<double>(counts[static_cast<std::size_t>(u) * n + v]) * scale;
  return cooc;
}

// num_walks -> infinity limit of the normalized counts for a fixed weighted
// adjacency with positive row sums:
//   C = sum_{t=1..T} 2 (L - t) diag(pi) P^t,   P = D^-1 A,  pi_i = d_i / sum d.
// The summand is symmetric for undirected weights (detailed balance); the
// result is symmetrized and the asymmetry is required to be fp-level noise.
inline Eigen::MatrixXd cooccurrence_limit(const Eigen::MatrixXd& adjacency,
                                          int walk_length, int window) {
  if (adjacency.rows() != adjacency.cols())
    throw ValidationError("walks: adjacency must be square");
  if (walk_length < 2 || window < 1 || window >= walk_length)
    throw ValidationError("walks: require 1 <= window < walk_length");
  const int n = static_cast<int>(adjacency.rows());
  const Eigen::VectorXd degrees = adjacency.rowwise().sum();
  if ((degrees.array() <= 0.0).any())
    throw IsolatedNodeError("walks: adjacency has a zero-degree row");
  const double volume = degrees.sum();

  const Eigen::MatrixXd transition = degrees.cwiseInverse().asDiagonal() * adjacency;
  Eigen::MatrixXd step = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd limit = Eigen::MatrixXd::Zero(n, n);
  for (int offset = 1; offset <= window; ++offset) {
    step = step * transition;
    limit.noalias() +=
        (2.0 * (walk_length - offset) / volume) * (degrees.asDiagonal() * step);
  }

  const double asymmetry = (limit - limit.transpose()).cwiseAbs().maxCoeff();
  if (asymmetry > 1e-12 * std::max(1.0, limit.cwiseAbs().maxCoeff()))
    throw NumericError("walks: limit matrix unexpectedly asymmetric");
  return 0.5 * (limit + limit.transpose());
}

inline CoocMatrix limiting_cooccurrence(const Graph& graph, int walk_length,
                                        int window) {
  if (graph.has_isolated_vertex())
    throw IsolatedNodeError("walks: graph has an isolated vertex");
  CoocMatrix cooc;
  cooc.kind = CoocKind::limiting;
  cooc.config.num_walks = 0;
  cooc.config.walk_length = walk_length;
  cooc.config.window = window;
  cooc.values = cooccurrence_limit(adjacency_matrix(graph), walk_length, window);
  return cooc;
}

// Matrix CSV with a leading metadata line:
//   # kind=<kind> r=<num_walks> L=<walk_length> T=<window> seed=<seed>
// followed by n rows of n comma-separated round-trip decimals.
inline void write_cooccurrence(const CoocMatrix& cooc, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cooc: cannot open for writing: " + path);
  out << "# kind=" << to_string(cooc.kind) << " r=" << cooc.config.num_walks
      << " L=" << cooc.config.walk_length << " T=" << cooc.config.window
      << " seed=" << cooc.seed << '\n';
  const int n = static_cast<int>(cooc.values.rows());
  for (int u = 0; u < n; ++u) {
    for (int v = 0; v < n; ++v)
      out << format_double(cooc.values(u, v)) << (v + 1 == n ? '\n' : ',');
  }
  if (!out.good()) throw IoError("cooc: write failed: " + path);
}

inline CoocMatrix read_cooccurrence(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cooc: cannot open for reading: " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0)
    throw IoError("cooc: missing metadata line: " + path);

  CoocMatrix cooc;
  {
    std::istringstream meta(line.substr(2));
    std::string field;
    bool have_kind = false;
    while (meta >> field) {
      const auto split = field.find('=');
      if (split == std::string::npos)
        throw IoError("cooc: malformed metadata field: " + path);
      const std::string key = field.substr(0, split);
      const std::string value = field.substr(split + 1);
      try {
        if (key == "kind") {
          cooc.kind = cooc_kind_from_string(value);
          have_kind = true;
        } else if (key == "r") {
          cooc.config.num_walks = std::stoll(value);
        } else if (key == "L") {
          cooc.config.walk_length = std::stoi(value);
        } else if (key == "T") {
          cooc.config.window = std::stoi(value);
        } else if (key == "seed") {
          cooc.seed = std::stoull(value);
        } else {
          throw IoError("cooc: unknown metadata key: " + key);
        }
      } catch (const std::invalid_argument&) {
        throw IoError("cooc: malformed metadata value: " + path);
      } catch (const std::out_of_range&) {
        throw IoError("cooc: metadata value out of range: " + path);
      }
    }
    if (!have_kind) throw IoError("cooc: metadata missing kind: " + path);
  }

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      std::size_t used = 0;
      double value = 0.0;
      try {
        value = std::stod(cell, &used);
      } catch (const std::exception&) {
        throw IoError("cooc: malformed cell: " + path);
      }
      if (used != cell.size()) throw IoError("cooc: malformed cell: " + path);
      row.push_back(value);
    }
    rows.push_back(std::move(row));
  }
  const int n = static_cast<int>(rows.size());
  if (n == 0) throw IoError("cooc: empty matrix: " + path);
  cooc.values.resize(n, n);
  for (int u = 0; u < n; ++u) {
    if (static_cast<int>(rows[u].size()) != n)
      throw IoError("cooc: ragged matrix rows: " + path);
    for (int v = 0; v < n; ++v) cooc.values(u, v) = rows[u][v];
  }
  return cooc;
}

}  // namespace blockwalk
