#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "blockwalk/rng.hpp"
#include "blockwalk/sbm.hpp"
#include "blockwalk/spectral.hpp"
#include "blockwalk/theory.hpp"
#include "blockwalk/walks.hpp"

using blockwalk::BlockValues;
using blockwalk::LinearUpdate;
using blockwalk::SbmParams;

namespace {

Eigen::MatrixXd random_symmetric(int n, std::uint64_t seed, double scale = 1.0) {
  blockwalk::Rng rng(seed);
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = scale * rng.normal();
  return 0.5 * (m + m.transpose());
}

}  // namespace

TEST_CASE("block values match a hand-computed case") {
  const BlockValues values = blockwalk::block_values({10, 2, 0.4, 0.1, 0.75}, 2, 1);
  CHECK(values.a == Catch::Approx(0.032).margin(1e-15));
  CHECK(values.b == Catch::Approx(0.008).margin(1e-15));
  CHECK(values.theta == Catch::Approx(0.12).margin(1e-15));
  CHECK(values.gamma == Catch::Approx(0.06).margin(1e-15));
}

TEST_CASE("closed-form spectrum matches a hand-computed case") {
  const Eigen::VectorXd spectrum =
      blockwalk::cbar_spectrum({10, 2, 0.4, 0.1, 0.75}, 2, 1);
  REQUIRE(spectrum.size() == 10);
  CHECK(spectrum(0) == Catch::Approx(0.2).margin(1e-15));
  CHECK(spectrum(1) == Catch::Approx(0.12).margin(1e-15));
  for (int i = 2; i < 10; ++i)
    CHECK(spectrum(i) == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("expected co-occurrence is the two-value block matrix") {
  const SbmParams params{12, 3, 0.7, 0.2, 0.75};
  const BlockValues values = blockwalk::block_values(params, 4, 2);
  const Eigen::MatrixXd expected = blockwalk::expected_cooccurrence(params, 4, 2);
  for (int u = 0; u < params.n; ++u)
    for (int v = 0; v < params.n; ++v) {
      const double want = (u / 4 == v / 4) ? values.a : values.b;
      CHECK(std::abs(expected(u, v) - want) < 1e-10);
    }
}

TEST_CASE("expected co-occurrence row sums are flat and equal the top eigenvalue") {
  const SbmParams params{20, 4, 0.6, 0.1, 0.75};
  const Eigen::MatrixXd expected = blockwalk::expected_cooccurrence(params, 5, 3);
  const Eigen::VectorXd spectrum = blockwalk::cbar_spectrum(params, 5, 3);
  for (int v = 0; v < params.n; ++v)
    CHECK(expected.row(v).sum() == Catch::Approx(spectrum(0)).margin(1e-10));
}

TEST_CASE("dense eigensolver agrees with the closed-form spectrum") {
  blockwalk::Rng rng(99);
  for (int trial = 0; trial < 8; ++trial) {
    const int k = 2 + static_cast<int>(rng.below(3));
    const int block = 2 + static_cast<int>(rng.below(6));
    const int n = k * block;
    const double q = 0.05 + 0.3 * rng.uniform();
    const double p = q + 0.1 + (1.0 - q - 0.1) * rng.uniform();
    const int length = 3 + static_cast<int>(rng.below(4));
    const int window = 1 + static_cast<int>(rng.below(length - 1));
    const SbmParams params{n, k, p, q, 0.75};
    const Eigen::MatrixXd expected =
        blockwalk::expected_cooccurrence(params, length, window);
    const Eigen::VectorXd dense = blockwalk::symmetric_eigen(expected).values;
    const Eigen::VectorXd closed =
        blockwalk::cbar_spectrum(params, length, window);
    REQUIRE(dense.size() == closed.size());
    CHECK((dense - closed).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("row-sum centering matrix annihilates the all-ones vector") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    Eigen::MatrixXd cooc = random_symmetric(15, seed).cwiseAbs();
    const LinearUpdate update = blockwalk::build_linear_update(cooc, 0.01, 2, false);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(15);
    CHECK((update.m * ones).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("centering difference equals the centered sampling error") {
  const int n = 12;
  const Eigen::MatrixXd cooc = random_symmetric(n, 4).cwiseAbs();
  const Eigen::MatrixXd expected = random_symmetric(n, 5).cwiseAbs();
  const Eigen::MatrixXd m_sample =
      blockwalk::build_linear_update(cooc, 0.01, 2, false).m;
  const Eigen::MatrixXd m_expected =
      blockwalk::build_linear_update(expected, 0.01, 2, false).m;
  const Eigen::MatrixXd noise = cooc - expected;
  const Eigen::MatrixXd centering =
      Eigen::MatrixXd::Identity(n, n) -
      Eigen::MatrixXd::Constant(n, n, 1.0 / n);
  CHECK(((m_sample - m_expected) + noise * centering).cwiseAbs().maxCoeff() <
        1e-12);
}

TEST_CASE("linear update is symmetric with the prescribed blocks") {
  const Eigen::MatrixXd cooc = random_symmetric(10, 6).cwiseAbs();
  const LinearUpdate update = blockwalk::build_linear_update(cooc, 0.05, 2, false);
  REQUIRE(update.lmat.rows() == 20);
  CHECK((update.lmat - update.lmat.transpose()).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((update.lmat.topLeftCorner(10, 10) -
         Eigen::MatrixXd::Identity(10, 10))
            .norm() == 0.0);
  CHECK((update.lmat.topRightCorner(10, 10) + 0.05 * update.m).norm() == 0.0);
}

TEST_CASE("population linear update has the three-level eigenvalue layout") {
  const SbmParams params{60, 3, 0.4, 0.1, 0.75};
  const double eta = 0.01;
  const Eigen::MatrixXd expected = blockwalk::expected_cooccurrence(params, 10, 5);
  const BlockValues values = blockwalk::block_values(params, 10, 5);
  const LinearUpdate update = blockwalk::build_linear_update(expected, eta, 3);

  REQUIRE(update.spectrum.size() == 120);
  CHECK_FALSE(update.degenerate);
  for (int i = 0; i < 2; ++i)
    CHECK(update.spectrum(i) ==
          Catch::Approx(1.0 + eta * values.theta).margin(1e-10));
  for (int i = 2; i < 118; ++i)
    CHECK(update.spectrum(i) == Catch::Approx(1.0).margin(1e-10));
  for (int i = 118; i < 120; ++i)
    CHECK(update.spectrum(i) ==
          Catch::Approx(1.0 - eta * values.theta).margin(1e-10));
}

TEST_CASE("top eigenvectors stack the same block-difference vector twice") {
  const SbmParams params{30, 3, 0.6, 0.1, 0.75};
  const Eigen::MatrixXd expected = blockwalk::expected_cooccurrence(params, 6, 3);
  const LinearUpdate update = blockwalk::build_linear_update(expected, 0.02, 3);
  REQUIRE(update.basis.cols() == 2);
  for (int c = 0; c < 2; ++c) {
    const Eigen::VectorXd column = update.basis.col(c);
    CHECK((column.head(30) - column.tail(30)).norm() < 1e-8);
    CHECK(std::abs(column.head(30).sum()) < 1e-8);
  }
}

TEST_CASE("projector is an orthogonal projection onto the basis span") {
  const SbmParams params{20, 2, 0.8, 0.2, 0.75};
  const Eigen::MatrixXd expected = blockwalk::expected_cooccurrence(params, 5, 2);
  const LinearUpdate update = blockwalk::build_linear_update(expected, 0.05, 2);
  const Eigen::MatrixXd& projector = update.projector;
  CHECK((projector - projector.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((projector * projector - projector).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(projector.trace() == Catch::Approx(1.0).margin(1e-10));
  CHECK((update.basis.transpose() * update.basis -
         Eigen::MatrixXd::Identity(1, 1))
            .cwiseAbs()
            .maxCoeff() < 1e-12);
}

TEST_CASE("a flat matrix degenerates to the zero projector with a warning") {
  const int n = 8;
  const Eigen::MatrixXd flat = Eigen::MatrixXd::Constant(n, n, 1.0 / n);
  const LinearUpdate update = blockwalk::build_linear_update(flat, 0.01, 2);
  CHECK(update.degenerate);
  CHECK(update.projector.norm() == 0.0);
  CHECK(update.basis.norm() == 0.0);
}

TEST_CASE("concentration ratio vanishes when the sample equals the mean") {
  const SbmParams params{12, 2, 0.7, 0.2, 0.75};
  const Eigen::MatrixXd expected = blockwalk::expected_cooccurrence(params, 4, 2);
  CHECK(blockwalk::concentration_ratio(expected, expected, 0.75) == 0.0);
}

TEST_CASE("spectral norm matches a dense SVD oracle") {
  blockwalk::Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const int rows = 2 + static_cast<int>(rng.below(20));
    const int cols = 2 + static_cast<int>(rng.below(20));
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) m(i, j) = rng.normal();
    const double oracle = m.jacobiSvd().singularValues()(0);
    CHECK(blockwalk::spectral_norm(m, 1e-12) ==
          Catch::Approx(oracle).epsilon(1e-6));
  }
  CHECK(blockwalk::spectral_norm(Eigen::MatrixXd::Zero(5, 5)) == 0.0);
  const Eigen::MatrixXd rank1 =
      Eigen::VectorXd::Ones(4) * Eigen::RowVectorXd::Ones(4);
  CHECK(blockwalk::spectral_norm(rank1) == Catch::Approx(4.0).epsilon(1e-8));
}

TEST_CASE("symmetric eigendecomposition reconstructs and orders") {
  const Eigen::MatrixXd m = random_symmetric(14, 13);
  const blockwalk::SymmetricEigen eigen = blockwalk::symmetric_eigen(m);
  const Eigen::MatrixXd reconstructed =
      eigen.vectors * eigen.values.asDiagonal() * eigen.vectors.transpose();
  CHECK((reconstructed - m).cwiseAbs().maxCoeff() < 1e-10);
  for (int i = 0; i + 1 < eigen.values.size(); ++i)
    CHECK(eigen.values(i) >= eigen.values(i + 1));
}

TEST_CASE("transition deviation is zero for the mean and positive off it") {
  const SbmParams params{16, 2, 0.8, 0.2, 0.75};
  const Eigen::MatrixXd mean = blockwalk::expected_adjacency(params);
  CHECK(blockwalk::transition_deviation(mean, mean, 1) == 0.0);
  CHECK(blockwalk::transition_deviation(mean, mean, 3) == 0.0);

  const blockwalk::Graph graph = blockwalk::generate_sbm(params, 41);
  const double deviation = blockwalk::transition_deviation(graph, params, 1);
  CHECK(deviation > 0.0);

  const Eigen::MatrixXd adjacency = blockwalk::adjacency_matrix(graph);
  const Eigen::MatrixXd p_sample =
      adjacency.rowwise().sum().cwiseInverse().asDiagonal() * adjacency;
  const Eigen::MatrixXd p_mean =
      mean.rowwise().sum().cwiseInverse().asDiagonal() * mean;
  const double oracle = (p_sample - p_mean).jacobiSvd().singularValues()(0);
  CHECK(deviation == Catch::Approx(oracle).epsilon(1e-6));
}

TEST_CASE("block value inputs are validated") {
  CHECK_THROWS_AS(blockwalk::block_values({10, 2, 0.4, 0.1, 0.75}, 1, 1),
                  blockwalk::ValidationError);
  CHECK_THROWS_AS(blockwalk::block_values({10, 2, 0.4, 0.1, 0.75}, 5, 5),
                  blockwalk::ValidationError);
  CHECK_THROWS_AS(blockwalk::build_linear_update(Eigen::MatrixXd::Zero(3, 4),
                                                 0.01, 2),
                  blockwalk::ValidationError);
  CHECK_THROWS_AS(blockwalk::build_linear_update(Eigen::MatrixXd::Zero(4, 4),
                                                 -0.01, 2),
                  blockwalk::ValidationError);
}
