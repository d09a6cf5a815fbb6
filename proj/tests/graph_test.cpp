#include "dacsim/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "dacsim/error.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace dacsim;

namespace {

ErrorKind kindOf(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected dacsim::Error");
  return ErrorKind::Io;
}

}  // namespace

TEST_CASE("ring of six has the expected topology") {
  const Graph g = buildGraph({TopologyKind::Ring, 6, {}});
  const std::vector<Edge> expected{{0, 1}, {0, 5}, {1, 2}, {2, 3}, {3, 4}, {4, 5}};
  CHECK(g.edges() == expected);
  const auto n0 = g.neighbors(0);
  CHECK(std::vector<std::size_t>(n0.begin(), n0.end()) == std::vector<std::size_t>{1, 5});
}

TEST_CASE("complete graph and neighbor queries") {
  const Graph k3 = buildGraph({TopologyKind::Complete, 3, {}});
  CHECK(k3.edges() == std::vector<Edge>{{0, 1}, {0, 2}, {1, 2}});
  const auto n1 = k3.neighbors(1);
  CHECK(std::vector<std::size_t>(n1.begin(), n1.end()) == std::vector<std::size_t>{0, 2});
  const Graph ring = buildGraph({TopologyKind::Ring, 6, {}});
  CHECK(kindOf([&] { (void)ring.neighbors(6); }) == ErrorKind::IndexOutOfRange);
}

TEST_CASE("topology validation") {
  CHECK(kindOf([] { buildGraph({TopologyKind::Custom, 3, {{0, 1}}}); }) ==
        ErrorKind::DisconnectedGraph);
  CHECK(kindOf([] { buildGraph({TopologyKind::Ring, 2, {}}); }) == ErrorKind::TooFewAgents);
  CHECK(kindOf([] { buildGraph({TopologyKind::Custom, 3, {{0, 0}, {0, 1}, {1, 2}}}); }) ==
        ErrorKind::MalformedEdge);
  CHECK(kindOf([] { buildGraph({TopologyKind::Custom, 3, {{0, 1}, {1, 0}, {1, 2}}}); }) ==
        ErrorKind::MalformedEdge);
  CHECK(kindOf([] { buildGraph({TopologyKind::Custom, 3, {{0, 1}, {1, 3}}}); }) ==
        ErrorKind::MalformedEdge);
}

TEST_CASE("ring spectrum matches the circulant closed form") {
  const Spectrum s = spectrum(buildGraph({TopologyKind::Ring, 6, {}}));
  for (Eigen::Index i = 0; i < 6; ++i) CHECK(s.laplacian(i, i) == 2.0);
  std::vector<double> oracle;
  for (int k = 0; k < 6; ++k) oracle.push_back(2.0 - 2.0 * std::cos(2.0 * std::numbers::pi * k / 6.0));
  std::sort(oracle.begin(), oracle.end());
  for (int k = 0; k < 6; ++k) CHECK(s.eigenvalues(k) == doctest::Approx(oracle[k]).epsilon(1e-12));
  CHECK(std::fabs(s.lambda2 - 1.0) < 1e-12);
  CHECK(std::fabs(s.lambdaMax - 4.0) < 1e-12);
}

TEST_CASE("K3 spectrum and the all-ones null vector") {
  const Graph k3 = buildGraph({TopologyKind::Complete, 3, {}});
  const Spectrum s = spectrum(k3);
  CHECK(std::fabs(s.eigenvalues(0)) < 1e-10);
  CHECK(s.eigenvalues(1) == doctest::Approx(3.0));
  CHECK(s.eigenvalues(2) == doctest::Approx(3.0));
  CHECK((s.laplacian * Eigen::VectorXd::Ones(3)).norm() == 0.0);
}

TEST_CASE("random connected graphs: Laplacian and spectrum properties") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> size(3, 12);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = size(rng);
    const auto edges = testing::randomConnectedEdges(n, rng);
    const Graph g(n, edges);
    const Eigen::MatrixXi l = g.laplacian();
    CHECK(l.rowwise().sum().isZero());
    CHECK(l.colwise().sum().isZero());
    CHECK(l == l.transpose());

    const Spectrum s = spectrum(g);
    CHECK(std::fabs(s.eigenvalues(0)) < 1e-10);
    CHECK(s.lambda2 > 0.0);
    const double oracle = testing::bisectEigenvalue(testing::explicitLaplacian(n, edges), 1);
    CHECK(std::fabs(s.lambda2 - oracle) < 1e-8);

    // Relabeling agents is a permutation similarity.
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Edge> relabeled;
    for (auto [a, b] : edges) relabeled.emplace_back(perm[a], perm[b]);
    const Spectrum p = spectrum(Graph(n, relabeled));
    CHECK((p.eigenvalues - s.eigenvalues).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("neighbor lists are sorted and symmetric") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 3 + trial % 9;
    const Graph g(n, testing::randomConnectedEdges(n, rng));
    for (std::size_t i = 0; i < n; ++i) {
      const auto nb = g.neighbors(i);
      CHECK(std::is_sorted(nb.begin(), nb.end()));
      for (std::size_t j : nb) CHECK(g.hasEdge(j, i));
    }
  }
}
