#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "blockwalk/blockwalk.hpp"

namespace {

using blockwalk::CoocMatrix;
using blockwalk::EmbeddingState;
using blockwalk::Graph;
using blockwalk::LinearUpdate;
using blockwalk::SbmParams;
using blockwalk::TrainConfig;
using blockwalk::Trajectory;
using blockwalk::WalkConfig;

namespace fs = std::filesystem;

// Seed streams derived from the master seed, so the graph, the walks, and
// the initialization never share raw engine state.
constexpr std::uint64_t kGraphStream = 0;
constexpr std::uint64_t kWalkStream = 1;
constexpr std::uint64_t kInitStream = 2;

struct SbmOptions {
  int n = 600;
  int k = 3;
  double p = 0.4;
  double q = 0.1;
  double rho = 0.75;

  SbmParams params() const { return {n, k, p, q, rho}; }
};

struct WalkOptions {
  std::int64_t num_walks = 2000;
  int walk_length = 10;
  int window = 5;

  WalkConfig config() const { return {num_walks, walk_length, window}; }
};

struct TrainOptions {
  int dim = 1;
  double eta = 0.01;
  double epsilon = 0.0;
  double delta = 0.0;
  std::string init = "norm";
  double inf_radius = 0.01;
  std::string stop = "norm";
  int iters = 100;
  int max_iters = 0;
  bool record_objective = false;

  TrainConfig config(std::uint64_t seed) const {
    TrainConfig cfg;
    cfg.dim = dim;
    cfg.eta = eta;
    cfg.epsilon = epsilon;
    cfg.delta = delta;
    if (init == "norm")
      cfg.init = blockwalk::InitMode::norm_ball;
    else if (init == "inf")
      cfg.init = blockwalk::InitMode::inf_ball;
    else
      throw blockwalk::ValidationError("cli: --init must be norm or inf");
    cfg.inf_ball_radius = inf_radius;
    if (stop == "norm")
      cfg.stop = blockwalk::StopRule::norm_threshold;
    else if (stop == "fixed")
      cfg.stop = blockwalk::StopRule::fixed_iterations;
    else
      throw blockwalk::ValidationError("cli: --stop must be norm or fixed");
    cfg.fixed_iterations = iters;
    cfg.max_iterations = max_iters;
    cfg.record_objective = record_objective;
    cfg.seed = seed;
    return cfg;
  }
};

// CLI11 only processes set_config on the root app, so subcommand config files
// are applied by hand: the --config callback fires before requirement checks
// and before sibling option callbacks (it is registered first), so values it
// injects behave like command-line values while explicit flags still win.
void apply_config_file(CLI::App* cmd, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw blockwalk::IoError("cli: cannot read config file " + path);
  std::string line;
  int line_no = 0;
  auto trim = [](const std::string& text) {
    const auto first = text.find_first_not_of(" \t\r");
    if (first == std::string::npos) return std::string();
    const auto last = text.find_last_not_of(" \t\r");
    return text.substr(first, last - first + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#' || stripped[0] == ';') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos || eq == 0)
      throw blockwalk::IoError("cli: expected key=value at " + path + ":" +
                               std::to_string(line_no));
    const std::string key = trim(stripped.substr(0, eq));
    std::string value = trim(stripped.substr(eq + 1));
    if (key == "command") {
      if (value != cmd->get_name())
        throw blockwalk::IoError("cli: config file " + path +
                                 " is for command '" + value + "', not '" +
                                 cmd->get_name() + "'");
      continue;
    }
    CLI::Option* option = cmd->get_option_no_throw("--" + key);
    if (option == nullptr)
      throw blockwalk::IoError("cli: unknown config key '" + key + "' at " +
                               path + ":" + std::to_string(line_no));
    if (value.empty()) continue;  // bare `key =` means unset
    if (!option->empty()) continue;
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      option->add_result(value.substr(1, value.size() - 2));
    } else {
      std::istringstream tokens(value);
      std::string token;
      while (tokens >> token) option->add_result(token);
    }
  }
}

void add_config_flag(CLI::App* cmd) {
  cmd->add_option_function<std::string>(
         "--config",
         [cmd](const std::string& path) { apply_config_file(cmd, path); },
         "flat key=value file; explicit flags take precedence")
      ->check(CLI::ExistingFile);
}

void add_sbm_flags(CLI::App* cmd, SbmOptions& opts, bool required) {
  auto* n = cmd->add_option("--n", opts.n, "number of vertices");
  auto* k = cmd->add_option("--k", opts.k, "number of blocks");
  auto* p = cmd->add_option("--p", opts.p, "within-block edge probability");
  auto* q = cmd->add_option("--q", opts.q, "across-block edge probability");
  cmd->add_option("--rho", opts.rho, "sparsity exponent for the q warning")
      ->capture_default_str();
  if (required) {
    n->required();
    k->required();
    p->required();
    q->required();
  } else {
    n->capture_default_str();
    k->capture_default_str();
    p->capture_default_str();
    q->capture_default_str();
  }
}

void add_walk_flags(CLI::App* cmd, WalkOptions& opts) {
  cmd->add_option("--r,--num-walks", opts.num_walks,
                  "total walks, starts drawn from the degree distribution")
      ->capture_default_str();
  cmd->add_option("--walk-length", opts.walk_length, "vertices per walk")
      ->capture_default_str();
  cmd->add_option("--window", opts.window, "co-occurrence window size")
      ->capture_default_str();
}

void add_train_flags(CLI::App* cmd, TrainOptions& opts) {
  cmd->add_option("--d,--dim", opts.dim, "embedding dimension")
      ->capture_default_str();
  cmd->add_option("--eta", opts.eta, "learning rate")->capture_default_str();
  cmd->add_option("--epsilon", opts.epsilon,
                  "initialization norm (0 resolves to n^(-2/3))")
      ->capture_default_str();
  cmd->add_option("--delta", opts.delta,
                  "stopping factor (0 resolves to n^(1/6))")
      ->capture_default_str();
  cmd->add_option("--init", opts.init, "initialization mode: norm or inf")
      ->capture_default_str();
  cmd->add_option("--inf-radius", opts.inf_radius,
                  "entry bound for --init inf")
      ->capture_default_str();
  cmd->add_option("--stop", opts.stop, "stop rule: norm or fixed")
      ->capture_default_str();
  cmd->add_option("--iters", opts.iters, "step count for --stop fixed")
      ->capture_default_str();
  cmd->add_option("--max-iters", opts.max_iters,
                  "cap for --stop norm (0 resolves to 10*ceil(4log(n/delta)/eta))")
      ->capture_default_str();
  cmd->add_flag("--record-objective", opts.record_objective,
                "evaluate the softmax objective every iteration");
}

// False flags are omitted from persisted configs: replaying a config must not
// count a flag as "given", which would trip exclusion rules.
void push_flag(std::vector<std::pair<std::string, std::string>>& entries,
               const std::string& key, bool value) {
  if (value) entries.push_back({key, "true"});
}

void append_sbm_entries(std::vector<std::pair<std::string, std::string>>& out,
                        const SbmOptions& opts) {
  out.push_back({"n", std::to_string(opts.n)});
  out.push_back({"k", std::to_string(opts.k)});
  out.push_back({"p", blockwalk::format_double(opts.p)});
  out.push_back({"q", blockwalk::format_double(opts.q)});
  out.push_back({"rho", blockwalk::format_double(opts.rho)});
}

void append_walk_entries(std::vector<std::pair<std::string, std::string>>& out,
                         const WalkOptions& opts) {
  out.push_back({"r", std::to_string(opts.num_walks)});
  out.push_back({"walk-length", std::to_string(opts.walk_length)});
  out.push_back({"window", std::to_string(opts.window)});
}

void append_train_entries(std::vector<std::pair<std::string, std::string>>& out,
                          const TrainOptions& opts) {
  out.push_back({"d", std::to_string(opts.dim)});
  out.push_back({"eta", blockwalk::format_double(opts.eta)});
  out.push_back({"epsilon", blockwalk::format_double(opts.epsilon)});
  out.push_back({"delta", blockwalk::format_double(opts.delta)});
  out.push_back({"init", opts.init});
  out.push_back({"inf-radius", blockwalk::format_double(opts.inf_radius)});
  out.push_back({"stop", opts.stop});
  out.push_back({"iters", std::to_string(opts.iters)});
  out.push_back({"max-iters", std::to_string(opts.max_iters)});
  push_flag(out, "record-objective", opts.record_objective);
}

void write_config_file(const fs::path& path,
                       const std::vector<std::pair<std::string, std::string>>&
                           entries) {
  std::ofstream out(path);
  if (!out)
    throw blockwalk::IoError("cli: cannot open for writing: " + path.string());
  for (const auto& [key, value] : entries) out << key << " = " << value << '\n';
  if (!out.good()) throw blockwalk::IoError("cli: write failed: " + path.string());
}

fs::path prepare_out_dir(const std::string& out_dir) {
  fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    throw blockwalk::IoError("cli: cannot create output directory: " + out_dir);
  return dir;
}

// A sparse draw can come back with an isolated vertex; retry with derived
// seeds (still a pure function of the original one) before giving up.
Graph generate_graph_retrying(const SbmParams& params, std::uint64_t seed) {
  for (int attempt = 0;; ++attempt) {
    const std::uint64_t attempt_seed =
        attempt == 0 ? seed : blockwalk::derive_seed(seed, 1000 + attempt);
    try {
      return blockwalk::generate_sbm(params, attempt_seed);
    } catch (const blockwalk::IsolatedNodeError& error) {
      if (attempt >= 9) throw;
      blockwalk::warn(std::string("cli: ") + error.what() +
                      "; retrying with a derived seed");
    }
  }
}

struct TrainRun {
  Trajectory trajectory;
  EmbeddingState state;
  blockwalk::ClusterReport report;
};

TrainRun train_on(const Eigen::MatrixXd& cooc, const Graph& graph,
                  const TrainConfig& cfg, bool with_projection) {
  LinearUpdate update =
      blockwalk::build_linear_update(cooc, cfg.eta, graph.k, with_projection);
  blockwalk::TrainObservers observers;
  if (with_projection) observers.top_basis = &update.basis;
  observers.labels = &graph.labels;
  observers.num_blocks = graph.k;
  auto [trajectory, state] = blockwalk::run_deepwalk(cooc, cfg, observers);
  TrainRun run{std::move(trajectory), std::move(state), {}};
  run.report = blockwalk::cluster_report(run.state.x, graph.labels, graph.k,
                                         run.trajectory.epsilon,
                                         run.trajectory.delta);
  return run;
}

int run_generate(const SbmOptions& sbm, std::uint64_t seed,
                 const std::string& out_file) {
  const Graph graph = generate_graph_retrying(sbm.params(), seed);
  blockwalk::write_graph(graph, out_file);
  std::cout << "wrote " << out_file << " (" << graph.n << " vertices, "
            << graph.total_degree() / 2 << " edges)\n";
  return 0;
}

int run_train(const SbmOptions& sbm, const WalkOptions& walks,
              const TrainOptions& train, const std::string& graph_file,
              bool use_expected, bool no_projection, std::uint64_t seed,
              const std::string& out_dir) {
  const fs::path dir = prepare_out_dir(out_dir);
  SbmParams params = sbm.params();

  Graph graph;
  if (!graph_file.empty()) {
    graph = blockwalk::read_graph(graph_file);
    params.n = graph.n;
    params.k = graph.k;
  } else {
    graph = generate_graph_retrying(params, blockwalk::derive_seed(seed, kGraphStream));
  }

  Eigen::MatrixXd cooc;
  if (use_expected) {
    cooc = blockwalk::expected_cooccurrence(params, walks.walk_length,
                                            walks.window);
  } else {
    const CoocMatrix built = blockwalk::build_cooccurrence(
        graph, walks.config(), blockwalk::derive_seed(seed, kWalkStream));
    cooc = built.values;
  }

  const TrainConfig cfg =
      train.config(blockwalk::derive_seed(seed, kInitStream));
  TrainRun run = train_on(cooc, graph, cfg, !no_projection);

  blockwalk::write_trajectory(run.trajectory, (dir / "trajectory.csv").string());
  blockwalk::write_embedding(run.state, graph.labels,
                             (dir / "embedding.csv").string());
  std::vector<blockwalk::ReportRow> rows(1);
  rows[0] = {seed,      params.n,   params.k,         params.p,
             params.q,  train.dim,  run.report,       run.trajectory.t_f};
  blockwalk::write_report(rows, (dir / "report.csv").string());

  std::vector<std::pair<std::string, std::string>> entries;
  entries.push_back({"command", "train"});
  entries.push_back({"seed", std::to_string(seed)});
  append_sbm_entries(entries, sbm);
  append_walk_entries(entries, walks);
  append_train_entries(entries, train);
  entries.push_back({"graph", graph_file});
  push_flag(entries, "use-expected", use_expected);
  push_flag(entries, "no-projection", no_projection);
  entries.push_back({"out", out_dir});
  write_config_file(dir / "config.txt", entries);

  std::cout << "stopped after " << run.trajectory.t_f << " iterations ("
            << run.trajectory.stop_reason << "), recovery "
            << run.report.recovery << '\n';
  return 0;
}

void write_strip_plot(const EmbeddingState& state, const Graph& graph,
                      const fs::path& path) {
  std::vector<blockwalk::PlotPoint> points;
  points.reserve(graph.n);
  for (int v = 0; v < graph.n; ++v) {
    const double jitter =
        0.6 * ((static_cast<std::uint64_t>(v) * 2654435761ull % 997) / 997.0 -
               0.5);
    points.push_back({state.x(v, 0), graph.labels[v] + jitter, graph.labels[v]});
  }
  std::vector<std::string> legend;
  for (int c = 0; c < graph.k; ++c) legend.push_back("block " + std::to_string(c));
  blockwalk::write_scatter_plot(points, legend, "1-D embedding by block",
                                "x_1", "block (jittered)", path.string());
}

void write_scatter_2d(const EmbeddingState& state, const Graph& graph,
                      const fs::path& path) {
  std::vector<blockwalk::PlotPoint> points;
  points.reserve(graph.n);
  for (int v = 0; v < graph.n; ++v)
    points.push_back({state.x(v, 0), state.x(v, 1), graph.labels[v]});
  std::vector<std::string> legend;
  for (int c = 0; c < graph.k; ++c) legend.push_back("block " + std::to_string(c));
  blockwalk::write_scatter_plot(points, legend, "2-D embedding by block",
                                "x_1", "x_2", path.string());
}

void write_scatter_3d(const EmbeddingState& state, const Graph& graph,
                      const fs::path& path) {
  std::vector<blockwalk::PlotPoint> points;
  points.reserve(graph.n);
  for (int v = 0; v < graph.n; ++v)
    points.push_back({state.x(v, 0) + 0.35 * state.x(v, 2),
                      state.x(v, 1) + 0.35 * state.x(v, 2), graph.labels[v]});
  std::vector<std::string> legend;
  for (int c = 0; c < graph.k; ++c) legend.push_back("block " + std::to_string(c));
  blockwalk::write_scatter_plot(points, legend,
                                "3-D embedding by block (cabinet projection)",
                                "x_1 + 0.35 x_3", "x_2 + 0.35 x_3",
                                path.string());
}

int run_exp_embeddings(const SbmOptions& sbm_in, const WalkOptions& walks,
                       double eta, double inf_radius, int iters,
                       std::vector<int> dims, bool use_expected,
                       std::uint64_t seed, const std::string& out_dir) {
  const fs::path dir = prepare_out_dir(out_dir);
  SbmOptions sbm = sbm_in;
  if (sbm.p <= 0.0) sbm.p = 4.0 * sbm.q;
  const SbmParams params = sbm.params();

  const Graph graph =
      generate_graph_retrying(params, blockwalk::derive_seed(seed, kGraphStream));
  Eigen::MatrixXd cooc;
  if (use_expected) {
    cooc = blockwalk::expected_cooccurrence(params, walks.walk_length,
                                            walks.window);
  } else {
    cooc = blockwalk::build_cooccurrence(
               graph, walks.config(), blockwalk::derive_seed(seed, kWalkStream))
               .values;
  }

  std::vector<blockwalk::ReportRow> rows;
  for (int d : dims) {
    TrainOptions train;
    train.dim = d;
    train.eta = eta;
    train.init = "inf";
    train.inf_radius = inf_radius;
    train.stop = "fixed";
    train.iters = iters;
    const TrainConfig cfg =
        train.config(blockwalk::derive_seed(seed, kInitStream + 10 + d));
    TrainRun run = train_on(cooc, graph, cfg, true);

    const std::string tag = "_d" + std::to_string(d);
    blockwalk::write_trajectory(run.trajectory,
                                (dir / ("trajectory" + tag + ".csv")).string());
    blockwalk::write_embedding(run.state, graph.labels,
                               (dir / ("embedding" + tag + ".csv")).string());
    if (d == 1)
      write_strip_plot(run.state, graph, dir / ("embedding" + tag + ".svg"));
    else if (d == 2)
      write_scatter_2d(run.state, graph, dir / ("embedding" + tag + ".svg"));
    else
      write_scatter_3d(run.state, graph, dir / ("embedding" + tag + ".svg"));

    rows.push_back({seed, params.n, params.k, params.p, params.q, d,
                    run.report, run.trajectory.t_f});
    std::cout << "d=" << d << ": recovery " << run.report.recovery << '\n';
  }
  blockwalk::write_report(rows, (dir / "report.csv").string());

  std::vector<std::pair<std::string, std::string>> entries;
  entries.push_back({"command", "exp-embeddings"});
  entries.push_back({"seed", std::to_string(seed)});
  append_sbm_entries(entries, sbm);
  append_walk_entries(entries, walks);
  entries.push_back({"eta", blockwalk::format_double(eta)});
  entries.push_back({"inf-radius", blockwalk::format_double(inf_radius)});
  entries.push_back({"iters", std::to_string(iters)});
  {
    std::string joined;
    for (int d : dims) joined += (joined.empty() ? "" : " ") + std::to_string(d);
    entries.push_back({"dims", joined});
  }
  push_flag(entries, "use-expected", use_expected);
  entries.push_back({"out", out_dir});
  write_config_file(dir / "config.txt", entries);
  return 0;
}

int run_exp_linear(std::vector<int> sizes, int k, double q, double p_in,
                   const WalkOptions& walks, int iters, bool use_expected,
                   std::uint64_t seed, const std::string& out_dir) {
  const fs::path dir = prepare_out_dir(out_dir);
  const double p = p_in > 0.0 ? p_in : 4.0 * q;

  std::vector<std::vector<double>> distances;
  std::vector<std::string> column_names;
  for (std::size_t idx = 0; idx < sizes.size(); ++idx) {
    const int n = sizes[idx];
    const SbmParams params{n, k, p, q, 0.75};
    const Graph graph = generate_graph_retrying(
        params, blockwalk::derive_seed(seed, 3 * idx + kGraphStream));
    Eigen::MatrixXd cooc;
    if (use_expected) {
      cooc = blockwalk::expected_cooccurrence(params, walks.walk_length,
                                              walks.window);
    } else {
      cooc = blockwalk::build_cooccurrence(
                 graph, walks.config(),
                 blockwalk::derive_seed(seed, 3 * idx + kWalkStream))
                 .values;
    }

    TrainConfig cfg;
    cfg.dim = 1;
    cfg.eta = 1.0 / n;
    cfg.stop = blockwalk::StopRule::fixed_iterations;
    cfg.fixed_iterations = iters;
    cfg.seed = blockwalk::derive_seed(seed, 3 * idx + kInitStream);
    cfg.store_states = true;

    const LinearUpdate update =
        blockwalk::build_linear_update(cooc, cfg.eta, k, false);
    auto nonlinear = blockwalk::run_deepwalk(cooc, cfg);
    auto linear = blockwalk::run_linearized(update, cooc, cfg);
    distances.push_back(
        blockwalk::trajectory_distance(nonlinear.first, linear.first));
    column_names.push_back("d_n" + std::to_string(n));
    std::cout << "n=" << n << ": final distance " << distances.back().back()
              << '\n';
  }

  const fs::path csv_path = dir / "distance.csv";
  {
    std::ofstream out(csv_path);
    if (!out)
      throw blockwalk::IoError("cli: cannot open for writing: " +
                               csv_path.string());
    out << "iter";
    for (const std::string& name : column_names) out << ',' << name;
    out << '\n';
    for (int t = 0; t <= iters; ++t) {
      out << t;
      for (const auto& series : distances)
        out << ',' << blockwalk::format_double(series[t]);
      out << '\n';
    }
    if (!out.good())
      throw blockwalk::IoError("cli: write failed: " + csv_path.string());
  }

  std::vector<blockwalk::PlotSeries> series;
  for (std::size_t idx = 0; idx < sizes.size(); ++idx) {
    blockwalk::PlotSeries s;
    s.label = "n=" + std::to_string(sizes[idx]);
    for (int t = 0; t <= iters; ++t) {
      s.xs.push_back(t);
      s.ys.push_back(distances[idx][t]);
    }
    series.push_back(std::move(s));
  }
  blockwalk::write_line_plot(series, "distance between nonlinear and linear runs",
                             "iteration", "||x_t - l_t||",
                             (dir / "distance.svg").string());

  std::vector<std::pair<std::string, std::string>> entries;
  entries.push_back({"command", "exp-linear"});
  entries.push_back({"seed", std::to_string(seed)});
  {
    std::string joined;
    for (int n : sizes) joined += (joined.empty() ? "" : " ") + std::to_string(n);
    entries.push_back({"sizes", joined});
  }
  entries.push_back({"k", std::to_string(k)});
  entries.push_back({"p", blockwalk::format_double(p)});
  entries.push_back({"q", blockwalk::format_double(q)});
  append_walk_entries(entries, walks);
  entries.push_back({"iters", std::to_string(iters)});
  push_flag(entries, "use-expected", use_expected);
  entries.push_back({"out", out_dir});
  write_config_file(dir / "config.txt", entries);
  return 0;
}

int run_diagnostics(std::vector<int> sizes, int k, double p, double q,
                    double rho, const WalkOptions& walks, int num_seeds,
                    bool use_expected, std::uint64_t seed,
                    const std::string& out_dir) {
  const fs::path dir = prepare_out_dir(out_dir);
  if (num_seeds < 1)
    throw blockwalk::ValidationError("cli: --num-seeds must be >= 1");

  struct Row {
    std::string name;
    int n;
    double value;
  };
  std::vector<Row> rows;
  const std::vector<std::string> names = {"concentration_ratio",
                                          "cooc_rel_deviation",
                                          "transition_deviation_t1",
                                          "spectrum_max_dev"};

  for (std::size_t idx = 0; idx < sizes.size(); ++idx) {
    const int n = sizes[idx];
    const SbmParams params{n, k, p, q, rho};
    const Eigen::MatrixXd expected = blockwalk::expected_cooccurrence(
        params, walks.walk_length, walks.window);
    const Eigen::VectorXd closed_spectrum =
        blockwalk::cbar_spectrum(params, walks.walk_length, walks.window);
    const double expected_norm = blockwalk::spectral_norm(expected);

    std::vector<std::vector<double>> samples(names.size());
    for (int s = 0; s < num_seeds; ++s) {
      const std::uint64_t base = 1000 * idx + 2 * static_cast<std::uint64_t>(s);
      Eigen::MatrixXd cooc;
      Eigen::MatrixXd adjacency;
      if (use_expected) {
        cooc = expected;
        adjacency = blockwalk::expected_adjacency(params);
      } else {
        const Graph graph = generate_graph_retrying(
            params, blockwalk::derive_seed(seed, base));
        cooc = blockwalk::build_cooccurrence(
                   graph, walks.config(),
                   blockwalk::derive_seed(seed, base + 1))
                   .values;
        adjacency = blockwalk::adjacency_matrix(graph);
      }
      const double deviation = blockwalk::spectral_norm(cooc - expected);
      samples[0].push_back(blockwalk::concentration_ratio(cooc, expected, rho));
      samples[1].push_back(deviation / expected_norm);
      samples[2].push_back(blockwalk::transition_deviation(
          adjacency, blockwalk::expected_adjacency(params), 1));
      const Eigen::VectorXd spectrum = blockwalk::symmetric_eigen(cooc).values;
      double max_dev = 0.0;
      for (int i = 0; i < k; ++i)
        max_dev = std::max(max_dev,
                           std::abs(spectrum(i) - closed_spectrum(i)));
      samples[3].push_back(max_dev);
    }
    for (std::size_t which = 0; which < names.size(); ++which) {
      std::vector<double>& values = samples[which];
      std::sort(values.begin(), values.end());
      const std::size_t mid = values.size() / 2;
      const double median =
          values.size() % 2 == 1
              ? values[mid]
              : 0.5 * (values[mid - 1] + values[mid]);
      rows.push_back({names[which], n, median});
    }
  }

  const fs::path csv_path = dir / "diagnostics.csv";
  {
    std::ofstream out(csv_path);
    if (!out)
      throw blockwalk::IoError("cli: cannot open for writing: " +
                               csv_path.string());
    out << "name,n,K,p,q,value\n";
    for (const std::string& name : names)
      for (const Row& row : rows)
        if (row.name == name)
          out << row.name << ',' << row.n << ',' << k << ','
              << blockwalk::format_double(p) << ','
              << blockwalk::format_double(q) << ','
              << blockwalk::format_double(row.value) << '\n';
    if (!out.good())
      throw blockwalk::IoError("cli: write failed: " + csv_path.string());
  }

  std::vector<std::pair<std::string, std::string>> entries;
  entries.push_back({"command", "diagnostics"});
  entries.push_back({"seed", std::to_string(seed)});
  {
    std::string joined;
    for (int n : sizes) joined += (joined.empty() ? "" : " ") + std::to_string(n);
    entries.push_back({"sizes", joined});
  }
  entries.push_back({"k", std::to_string(k)});
  entries.push_back({"p", blockwalk::format_double(p)});
  entries.push_back({"q", blockwalk::format_double(q)});
  entries.push_back({"rho", blockwalk::format_double(rho)});
  append_walk_entries(entries, walks);
  entries.push_back({"num-seeds", std::to_string(num_seeds)});
  push_flag(entries, "use-expected", use_expected);
  entries.push_back({"out", out_dir});
  write_config_file(dir / "config.txt", entries);

  std::cout << "wrote " << csv_path.string() << " (" << rows.size()
            << " rows)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stochastic block model embedding pipeline"};
  app.require_subcommand(1);

  int exit_code = 0;

  // generate
  SbmOptions gen_sbm;
  std::uint64_t gen_seed = 0;
  std::string gen_out = "graph.txt";
  CLI::App* generate = app.add_subcommand("generate", "sample a graph and write it");
  add_config_flag(generate);
  add_sbm_flags(generate, gen_sbm, true);
  generate->add_option("--seed", gen_seed, "master seed")->capture_default_str();
  generate->add_option("--out", gen_out, "output graph file")
      ->capture_default_str();
  generate->callback(
      [&] { exit_code = run_generate(gen_sbm, gen_seed, gen_out); });

  // train
  SbmOptions train_sbm;
  WalkOptions train_walks;
  TrainOptions train_train;
  train_train.stop = "norm";
  std::string train_graph_file;
  bool train_use_expected = false;
  bool train_no_projection = false;
  std::uint64_t train_seed = 0;
  std::string train_out = "out";
  CLI::App* train = app.add_subcommand("train", "build a co-occurrence matrix and train embeddings");
  add_config_flag(train);
  add_sbm_flags(train, train_sbm, false);
  add_walk_flags(train, train_walks);
  add_train_flags(train, train_train);
  CLI::Option* graph_opt =
      train->add_option("--graph", train_graph_file, "load this graph file instead of sampling");
  train->add_flag("--use-expected", train_use_expected,
                  "train on the expected co-occurrence matrix")
      ->excludes(graph_opt);
  train->add_flag("--no-projection", train_no_projection,
                  "skip the top-eigenspace projection columns");
  train->add_option("--seed", train_seed, "master seed")->capture_default_str();
  train->add_option("--out", train_out, "output directory")
      ->capture_default_str();
  train->callback([&] {
    exit_code = run_train(train_sbm, train_walks, train_train, train_graph_file,
                          train_use_expected, train_no_projection, train_seed,
                          train_out);
  });

  // exp-embeddings
  SbmOptions emb_sbm;
  emb_sbm.p = 0.0;  // resolves to 4q
  WalkOptions emb_walks;
  double emb_eta = 0.01;
  double emb_inf_radius = 0.01;
  int emb_iters = 100;
  std::vector<int> emb_dims = {1, 2, 3};
  bool emb_use_expected = false;
  std::uint64_t emb_seed = 0;
  std::string emb_out = "exp_embeddings";
  CLI::App* exp_emb = app.add_subcommand(
      "exp-embeddings", "train d=1,2,3 embeddings on one graph and plot them");
  add_config_flag(exp_emb);
  add_sbm_flags(exp_emb, emb_sbm, false);
  add_walk_flags(exp_emb, emb_walks);
  exp_emb->add_option("--eta", emb_eta, "learning rate")->capture_default_str();
  exp_emb->add_option("--inf-radius", emb_inf_radius, "init entry bound")
      ->capture_default_str();
  exp_emb->add_option("--iters", emb_iters, "fixed iteration count")
      ->capture_default_str();
  exp_emb->add_option("--dims", emb_dims, "embedding dimensions to run")
      ->capture_default_str();
  exp_emb->add_flag("--use-expected", emb_use_expected,
                    "train on the expected co-occurrence matrix");
  exp_emb->add_option("--seed", emb_seed, "master seed")->capture_default_str();
  exp_emb->add_option("--out", emb_out, "output directory")
      ->capture_default_str();
  exp_emb->callback([&] {
    exit_code = run_exp_embeddings(emb_sbm, emb_walks, emb_eta, emb_inf_radius,
                                   emb_iters, emb_dims, emb_use_expected,
                                   emb_seed, emb_out);
  });

  // exp-linear
  std::vector<int> lin_sizes = {200, 500, 1000};
  int lin_k = 2;
  double lin_q = 0.1;
  double lin_p = 0.0;  // resolves to 4q
  WalkOptions lin_walks;
  int lin_iters = 75;
  bool lin_use_expected = false;
  std::uint64_t lin_seed = 0;
  std::string lin_out = "exp_linear";
  CLI::App* exp_lin = app.add_subcommand(
      "exp-linear", "track the distance between nonlinear and linearized runs");
  add_config_flag(exp_lin);
  exp_lin->add_option("--sizes", lin_sizes, "graph sizes")->capture_default_str();
  exp_lin->add_option("--k", lin_k, "number of blocks")->capture_default_str();
  exp_lin->add_option("--q", lin_q, "across-block edge probability")
      ->capture_default_str();
  exp_lin->add_option("--p", lin_p, "within-block edge probability (0 resolves to 4q)")
      ->capture_default_str();
  add_walk_flags(exp_lin, lin_walks);
  exp_lin->add_option("--iters", lin_iters, "fixed iteration count")
      ->capture_default_str();
  exp_lin->add_flag("--use-expected", lin_use_expected,
                    "train on the expected co-occurrence matrix");
  exp_lin->add_option("--seed", lin_seed, "master seed")->capture_default_str();
  exp_lin->add_option("--out", lin_out, "output directory")
      ->capture_default_str();
  exp_lin->callback([&] {
    exit_code = run_exp_linear(lin_sizes, lin_k, lin_q, lin_p, lin_walks,
                               lin_iters, lin_use_expected, lin_seed, lin_out);
  });

  // diagnostics
  std::vector<int> diag_sizes = {200, 400, 800};
  int diag_k = 2;
  double diag_p = 0.4;
  double diag_q = 0.1;
  double diag_rho = 0.75;
  WalkOptions diag_walks;
  int diag_num_seeds = 5;
  bool diag_use_expected = false;
  std::uint64_t diag_seed = 0;
  std::string diag_out = "diagnostics";
  CLI::App* diag = app.add_subcommand(
      "diagnostics", "measure concentration and spectrum deviations over a size sweep");
  add_config_flag(diag);
  diag->add_option("--sizes", diag_sizes, "graph sizes")->capture_default_str();
  diag->add_option("--k", diag_k, "number of blocks")->capture_default_str();
  diag->add_option("--p", diag_p, "within-block edge probability")
      ->capture_default_str();
  diag->add_option("--q", diag_q, "across-block edge probability")
      ->capture_default_str();
  diag->add_option("--rho", diag_rho, "sparsity exponent")->capture_default_str();
  add_walk_flags(diag, diag_walks);
  diag->add_option("--num-seeds", diag_num_seeds, "seeds per size (median reported)")
      ->capture_default_str();
  diag->add_flag("--use-expected", diag_use_expected,
                 "replace sampled inputs with their expectations");
  diag->add_option("--seed", diag_seed, "master seed")->capture_default_str();
  diag->add_option("--out", diag_out, "output directory")->capture_default_str();
  diag->callback([&] {
    exit_code = run_diagnostics(diag_sizes, diag_k, diag_p, diag_q, diag_rho,
                                diag_walks, diag_num_seeds, diag_use_expected,
                                diag_seed, diag_out);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& error) {
    return app.exit(error);
  } catch (const blockwalk::NumericError& error) {
    std::cerr << "error: " << error.what() << '\n';
    return 2;
  } catch (const blockwalk::IoError& error) {
    std::cerr << "error: " << error.what() << '\n';
    return 3;
  } catch (const blockwalk::ValidationError& error) {
    std::cerr << "error: " << error.what() << '\n';
    return 1;
  }
  return exit_code;
}
