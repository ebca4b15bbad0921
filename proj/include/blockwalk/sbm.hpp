#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "blockwalk/common.hpp"
#include "blockwalk/rng.hpp"

namespace blockwalk {

// Symmetric planted-partition model: k equal blocks of n/k vertices, edge
// probability p inside a block and q across blocks, independently per pair.
// rho is the sparsity exponent the concentration diagnostics assume
// (q >= n^(rho-1)); generation itself works for any 0 <= q < p <= 1.
struct SbmParams {
  int n = 0;
  int k = 2;
  double p = 0.0;
  double q = 0.0;
  double rho = 0.75;

  int block_size() const { return n / k; }

  // Every vertex has this expected degree; the expected adjacency keeps the
  // within-block value on the diagonal, which makes the identity exact.
  double expected_degree() const {
    return block_size() * p + static_cast<double>(n - block_size()) * q;
  }
};

inline void validate(const SbmParams& params) {
  if (params.n <= 0) throw ValidationError("sbm: n must be positive");
  if (params.k < 2) throw ValidationError("sbm: need at least 2 blocks");
  if (params.n % params.k != 0)
    throw ValidationError("sbm: block count must divide n");
  if (!std::isfinite(params.p) || !std::isfinite(params.q))
    throw ValidationError("sbm: probabilities must be finite");
  if (params.q < 0.0 || params.p > 1.0)
    throw ValidationError("sbm: probabilities must lie in [0, 1]");
  if (!(params.p > params.q)) throw ValidationError("sbm: require p > q");
  if (!std::isfinite(params.rho) || params.rho <= 0.0 || params.rho > 1.0)
    throw ValidationError("sbm: rho must lie in (0, 1]");
  if (params.q < std::pow(static_cast<double>(params.n), params.rho - 1.0))
    warn("sbm: q < n^(rho-1); outside the regime the concentration rates assume");
}

// Undirected simple graph with planted block labels. Neighbor lists are
// sorted ascending; vertices are 0-based.
struct Graph {
  int n = 0;
  int k = 0;
  std::vector<int> labels;
  std::vector<std::vector<int>> neighbors;

  int degree(int v) const { return static_cast<int>(neighbors[v].size()); }

  // 2|E|: the normalizer of the stationary distribution deg(v) / 2|E|.
  std::int64_t total_degree() const {
    std::int64_t total = 0;
    for (const auto& adj : neighbors) total += static_cast<std::int64_t>(adj.size());
    return total;
  }

  bool has_isolated_vertex() const {
    return std::any_of(neighbors.begin(), neighbors.end(),
                       [](const std::vector<int>& adj) { return adj.empty(); });
  }

  bool operator==(const Graph& other) const {
    return n == other.n && k == other.k && labels == other.labels &&
           neighbors == other.neighbors;
  }
};

// Samples a graph with block-contiguous labels (vertex v belongs to block
// v / (n/k)). Pairs are visited in lexicographic order, one uniform draw
// each, so a seed pins the graph exactly. Throws IsolatedNodeError if any
// vertex ends up with no neighbors; callers may retry with another seed.
inline Graph generate_sbm(const SbmParams& params, std::uint64_t seed) {
  validate(params);
  Graph graph;
  graph.n = params.n;
  graph.k = params.k;
  graph.labels.resize(params.n);
  const int block = params.block_size();
  for (int v = 0; v < params.n; ++v) graph.labels[v] = v / block;

  graph.neighbors.assign(params.n, {});
  Rng rng(seed);
  for (int u = 0; u < params.n; ++u) {
    for (int v = u + 1; v < params.n; ++v) {
      const double prob = graph.labels[u] == graph.labels[v] ? params.p : params.q;
      if (rng.uniform() < prob) {
        graph.neighbors[u].push_back(v);
        graph.neighbors[v].push_back(u);
      }
    }
  }
  if (graph.has_isolated_vertex())
    throw IsolatedNodeError("sbm: sampled graph has an isolated vertex");
  return graph;
}

// E[A]: p on diagonal blocks (diagonal entries included), q elsewhere.
// Row sums all equal SbmParams::expected_degree().
inline Eigen::MatrixXd expected_adjacency(const SbmParams& params) {
  validate(params);
  Eigen::MatrixXd mean(params.n, params.n);
  const int block = params.block_size();
  for (int u = 0; u < params.n; ++u)
    for (int v = 0; v < params.n; ++v)
      mean(u, v) = (u / block == v / block) ? params.p : params.q;
  return mean;
}

inline Eigen::MatrixXd adjacency_matrix(const Graph& graph) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(graph.n, graph.n);
  for (int u = 0; u < graph.n; ++u)
    for (int v : graph.neighbors[u]) a(u, v) = 1.0;
  return a;
}

// Plain-text graph format:
//   line 1: "<n> <k>"
//   line 2: n block labels
//   then one "u v" line per edge with u < v, lexicographically sorted.
inline void write_graph(const Graph& graph, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("graph: cannot open for writing: " + path);
  out << graph.n << ' ' << graph.k << '\n';
  for (int v = 0; v < graph.n; ++v)
    out << graph.labels[v] << (v + 1 == graph.n ? '\n' : ' ');
  for (int u = 0; u < graph.n; ++u)
    for (int v : graph.neighbors[u])
      if (u < v) out << u << ' ' << v << '\n';
  if (!out.good()) throw IoError("graph: write failed: " + path);
}

inline Graph read_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("graph: cannot open for reading: " + path);
  Graph graph;
  std::string line;
  if (!std::getline(in, line)) throw IoError("graph: missing header: " + path);
  {
    std::istringstream header(line);
    std::string extra;
    if (!(header >> graph.n >> graph.k) || (header >> extra))
      throw IoError("graph: malformed header: " + path);
  }
  if (graph.n <= 0 || graph.k <= 0)
    throw IoError("graph: non-positive sizes in header: " + path);
  if (!std::getline(in, line)) throw IoError("graph: missing label line: " + path);
  {
    std::istringstream labels(line);
    graph.labels.resize(graph.n);
    for (int v = 0; v < graph.n; ++v) {
      if (!(labels >> graph.labels[v]) || graph.labels[v] < 0 ||
          graph.labels[v] >= graph.k)
        throw IoError("graph: malformed label line: " + path);
    }
    std::string extra;
    if (labels >> extra) throw IoError("graph: trailing labels: " + path);
  }
  graph.neighbors.assign(graph.n, {});
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream edge(line);
    int u = -1, v = -1;
    std::string extra;
    if (!(edge >> u >> v) || (edge >> extra))
      throw IoError("graph: malformed edge line: " + path);
    if (u < 0 || v < 0 || u >= graph.n || v >= graph.n || u == v)
      throw IoError("graph: edge endpoints out of range: " + path);
    graph.neighbors[u].push_back(v);
    graph.neighbors[v].push_back(u);
  }
  for (auto& adj : graph.neighbors) {
    std::sort(adj.begin(), adj.end());
    if (std::adjacent_find(adj.begin(), adj.end()) != adj.end())
      throw IoError("graph: duplicate edge: " + path);
  }
  return graph;
}

}  // namespace blockwalk
