#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "blockwalk/metrics.hpp"
#include "blockwalk/rng.hpp"

using blockwalk::ClusterReport;
using blockwalk::RecoveryMode;

namespace {

Eigen::MatrixXd column(const std::vector<double>& values) {
  Eigen::MatrixXd m(static_cast<int>(values.size()), 1);
  for (std::size_t i = 0; i < values.size(); ++i) m(static_cast<int>(i), 0) = values[i];
  return m;
}

}  // namespace

TEST_CASE("separated two-block values give the obvious report") {
  const Eigen::MatrixXd x = column({1.0, 1.0, -1.0, -1.0});
  const std::vector<int> labels = {0, 0, 1, 1};
  const ClusterReport report = blockwalk::cluster_report(x, labels, 2, 0.1, 2.0);
  CHECK(report.means(0, 0) == Catch::Approx(1.0).margin(1e-15));
  CHECK(report.means(1, 0) == Catch::Approx(-1.0).margin(1e-15));
  CHECK(report.spread == Catch::Approx(0.0).margin(1e-15));
  CHECK(report.min_gap == Catch::Approx(2.0).margin(1e-15));
  CHECK(report.recovery == 1.0);
  CHECK(report.bound_spread == Catch::Approx(5.0 * 2.0 / 2.0).margin(1e-12));
  CHECK(report.bound_gap ==
        Catch::Approx(0.1 * 2.0 / (20.0 * 4.0 * 2.0)).margin(1e-15));
  CHECK(report.spread_ok);
  CHECK(report.gap_ok);
}

TEST_CASE("a constant embedding has zero spread and gap") {
  const Eigen::MatrixXd x = Eigen::MatrixXd::Constant(8, 1, 0.7);
  const std::vector<int> labels = {0, 0, 0, 0, 1, 1, 1, 1};
  const ClusterReport report = blockwalk::cluster_report(x, labels, 2, 0.1, 2.0);
  CHECK(report.spread == Catch::Approx(0.0).margin(1e-15));
  CHECK(report.min_gap == Catch::Approx(0.0).margin(1e-15));
  CHECK(report.recovery == 0.5);
  CHECK_FALSE(report.gap_ok);
}

TEST_CASE("recovery is exact for separated one-dimensional values") {
  const Eigen::MatrixXd x = column({5.0, 5.1, -3.0, -3.1, 0.0, 0.2});
  const std::vector<int> labels = {2, 2, 0, 0, 1, 1};
  CHECK(blockwalk::recovery_fraction(x, labels, 3) == 1.0);
}

TEST_CASE("recovery is invariant under monotone transforms in one dimension") {
  blockwalk::Rng rng(3);
  Eigen::MatrixXd x(30, 1);
  for (int i = 0; i < 30; ++i) x(i, 0) = rng.normal();
  std::vector<int> labels(30);
  for (int i = 0; i < 30; ++i) labels[i] = i / 10;
  const double base = blockwalk::recovery_fraction(x, labels, 3);

  Eigen::MatrixXd scaled = 2.0 * x;
  scaled.array() += 3.0;
  CHECK(blockwalk::recovery_fraction(scaled, labels, 3) == base);

  Eigen::MatrixXd curved = x.array().tanh().matrix();
  CHECK(blockwalk::recovery_fraction(curved, labels, 3) == base);
}

TEST_CASE("recovery is invariant under renaming the true blocks") {
  blockwalk::Rng rng(4);
  Eigen::MatrixXd x(20, 1);
  for (int i = 0; i < 20; ++i) x(i, 0) = rng.normal();
  std::vector<int> labels(20), renamed(20);
  for (int i = 0; i < 20; ++i) {
    labels[i] = i / 10;
    renamed[i] = 1 - labels[i];
  }
  CHECK(blockwalk::recovery_fraction(x, labels, 2) ==
        blockwalk::recovery_fraction(x, renamed, 2));
}

TEST_CASE("k-means recovers well-separated planar clusters") {
  blockwalk::Rng rng(5);
  Eigen::MatrixXd x(30, 2);
  std::vector<int> labels(30);
  for (int i = 0; i < 30; ++i) {
    const int block = i / 10;
    labels[i] = block;
    x(i, 0) = 10.0 * block + 0.1 * rng.normal();
    x(i, 1) = -5.0 * block + 0.1 * rng.normal();
  }
  CHECK(blockwalk::recovery_fraction(x, labels, 3) == 1.0);
  CHECK(blockwalk::recovery_fraction(x, labels, 3, RecoveryMode::cluster, 1) ==
        blockwalk::recovery_fraction(x, labels, 3, RecoveryMode::cluster, 1));
}

TEST_CASE("threshold mode assigns to the nearest true centroid") {
  const Eigen::MatrixXd tight = column({0.0, 0.4, 1.0, 1.4});
  const std::vector<int> labels = {0, 0, 1, 1};
  CHECK(blockwalk::recovery_fraction(tight, labels, 2,
                                     RecoveryMode::threshold) == 1.0);

  const Eigen::MatrixXd loose = column({0.0, 0.9, 1.0, 1.4});
  CHECK(blockwalk::recovery_fraction(loose, labels, 2,
                                     RecoveryMode::threshold) == 0.75);
}

TEST_CASE("cluster means are the orthogonal projection of the embedding") {
  blockwalk::Rng rng(6);
  Eigen::MatrixXd x(30, 2);
  for (int i = 0; i < 30; ++i)
    for (int c = 0; c < 2; ++c) x(i, c) = rng.normal();
  std::vector<int> labels(30);
  for (int i = 0; i < 30; ++i) labels[i] = i / 10;
  const ClusterReport report = blockwalk::cluster_report(x, labels, 3, 0.1, 2.0);

  double mean_energy = 0.0;
  for (int c = 0; c < 3; ++c)
    mean_energy += 10.0 * report.means.row(c).squaredNorm();
  CHECK(x.squaredNorm() ==
        Catch::Approx(report.spread * report.spread + mean_energy).margin(1e-10));

  for (int trial = 0; trial < 100; ++trial) {
    Eigen::MatrixXd competitor(3, 2);
    for (int c = 0; c < 3; ++c)
      for (int d = 0; d < 2; ++d) competitor(c, d) = rng.normal();
    Eigen::MatrixXd deviation = x;
    for (int i = 0; i < 30; ++i) deviation.row(i) -= competitor.row(labels[i]);
    CHECK(report.spread <= deviation.norm() + 1e-12);
  }
}

TEST_CASE("degenerate and invalid metric inputs are rejected") {
  const Eigen::MatrixXd x = column({1.0, 2.0, 3.0, 4.0});
  CHECK_THROWS_AS(blockwalk::cluster_report(x, {0, 0, 0, 0}, 2, 0.1, 2.0),
                  blockwalk::ValidationError);
  CHECK_THROWS_AS(blockwalk::recovery_fraction(x, {0, 1, 2, 0}, 9),
                  blockwalk::ValidationError);
  CHECK_THROWS_AS(blockwalk::recovery_fraction(x, {0, 1}, 2),
                  blockwalk::ValidationError);
  CHECK_THROWS_AS(blockwalk::cluster_report(x, {0, 0, 1, 1}, 2, 0.0, 2.0),
                  blockwalk::ValidationError);
}

TEST_CASE("trajectory distances compare the node halves per iteration") {
  blockwalk::Trajectory run_a, run_b;
  for (int t = 0; t < 3; ++t) {
    run_a.states.push_back(Eigen::MatrixXd::Constant(8, 1, 1.0 * t));
    Eigen::MatrixXd shifted = Eigen::MatrixXd::Constant(8, 1, 1.0 * t);
    shifted.topRows(4).array() += 2.0;
    run_b.states.push_back(shifted);
  }
  const std::vector<double> same = blockwalk::trajectory_distance(run_a, run_a);
  for (double d : same) CHECK(d == 0.0);
  const std::vector<double> apart = blockwalk::trajectory_distance(run_a, run_b);
  REQUIRE(apart.size() == 3);
  for (double d : apart) CHECK(d == Catch::Approx(4.0).margin(1e-15));

  blockwalk::Trajectory empty;
  CHECK_THROWS_AS(blockwalk::trajectory_distance(run_a, empty),
                  blockwalk::ValidationError);
  blockwalk::Trajectory shorter;
  shorter.states.push_back(run_a.states[0]);
  CHECK_THROWS_AS(blockwalk::trajectory_distance(run_a, shorter),
                  blockwalk::ValidationError);
}

TEST_CASE("report rows serialize with the documented header") {
  blockwalk::ReportRow row;
  row.seed = 9;
  row.n = 12;
  row.k = 2;
  row.p = 0.5;
  row.q = 0.125;
  row.dim = 1;
  row.report.spread = 0.25;
  row.report.bound_spread = 1.5;
  row.report.min_gap = 0.75;
  row.report.bound_gap = 0.001953125;
  row.report.recovery = 1.0;
  row.t_f = 42;

  const std::string path =
      (std::filesystem::temp_directory_path() / "blockwalk_report.csv").string();
  blockwalk::write_report({row}, path);
  std::ifstream in(path);
  std::string header, body;
  REQUIRE(std::getline(in, header));
  REQUIRE(std::getline(in, body));
  CHECK(header ==
        "seed,n,K,p,q,d,spread,bound_spread,min_gap,bound_gap,recovery,t_f");
  CHECK(body == "9,12,2,0.5,0.125,1,0.25,1.5,0.75,0.001953125,1,42");
  std::remove(path.c_str());
}
