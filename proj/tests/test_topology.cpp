#include <cmath>
#include <numbers>
#include <sstream>

#include "chemcons/error.hpp"
#include "chemcons/topology.hpp"
#include "doctest.h"

using namespace chemcons;

namespace {

// Circulant closed forms for the mirror Laplacian spectrum.
double ring_lambda2(std::size_t m) { return 1.0 - std::cos(2.0 * std::numbers::pi / static_cast<double>(m)); }

double lattice_lambda2(std::size_t m, std::size_t k) {
  double sum = 0.0;
  for (std::size_t j = 1; j <= k; ++j) sum += std::cos(2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(m));
  return 2.0 * static_cast<double>(k) - 2.0 * sum;
}

void check_generator_invariants(const NetworkGraph& g) {
  CHECK(is_balanced(g));
  CHECK(is_strongly_connected(g));
  for (std::size_t i = 0; i < g.size(); ++i) CHECK_FALSE(g.has_edge(i, i));
  const Eigen::MatrixXd l = laplacian(g);
  CHECK(l.rowwise().sum().cwiseAbs().maxCoeff() == 0.0);
  CHECK(l.colwise().sum().cwiseAbs().maxCoeff() == 0.0);
}

}  // namespace

TEST_CASE("ring") {
  const auto g = make_ring(3);
  Eigen::MatrixXd expected(3, 3);
  expected << 0, 1, 0, 0, 0, 1, 1, 0, 0;
  CHECK(g.adjacency() == expected);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(g.in_degree(i) == 1);
    CHECK(g.out_degree(i) == 1);
  }
  CHECK(algebraic_connectivity(make_ring(25)) == doctest::Approx(0.0314).epsilon(0.0005 / 0.0314));
  CHECK_THROWS_AS(make_ring(1), ConfigError);
}

TEST_CASE("complete") {
  CHECK(make_complete(25).edge_count() == 25 * 24);
  CHECK(algebraic_connectivity(make_complete(25)) == doctest::Approx(25.0).epsilon(1e-12));
  const auto pair = make_complete(2);
  CHECK(pair.has_edge(0, 1));
  CHECK(pair.has_edge(1, 0));
  CHECK(pair.edge_count() == 2);
}

TEST_CASE("regular lattice") {
  const auto g = make_regular_lattice(25, 3);
  CHECK(g.edge_count() == 2 * 3 * 25);
  for (std::size_t i = 0; i < 25; ++i) {
    CHECK(g.out_degree(i) == 6);
    CHECK(g.in_degree(i) == 6);
  }
  CHECK(algebraic_connectivity(g) == doctest::Approx(0.8523).epsilon(0.0005 / 0.8523));
  CHECK_THROWS_AS(make_regular_lattice(6, 3), ConfigError);
  CHECK_THROWS_AS(make_regular_lattice(10, 0), ConfigError);
}

TEST_CASE("circulant closed forms match the eigensolver") {
  for (std::size_t m : {5u, 12u, 25u, 40u, 100u}) {
    CHECK(std::abs(algebraic_connectivity(make_ring(m)) - ring_lambda2(m)) < 1e-9);
    CHECK(std::abs(algebraic_connectivity(make_regular_lattice(m, 1)) - 2.0 * (1.0 - std::cos(2.0 * std::numbers::pi / m))) < 1e-9);
    for (std::size_t k = 1; 2 * k < m && k <= 4; ++k) {
      CHECK(std::abs(algebraic_connectivity(make_regular_lattice(m, k)) - lattice_lambda2(m, k)) < 1e-9);
    }
  }
}

TEST_CASE("small world") {
  SUBCASE("edge count, balance, connectivity") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto g = make_small_world(100, 300, 0.2, seed);
      CHECK(g.edge_count() == 600);
      check_generator_invariants(g);
    }
  }
  SUBCASE("no rewiring reproduces the lattice") {
    CHECK(make_small_world(25, 75, 0.0, 3) == make_regular_lattice(25, 3));
  }
  SUBCASE("same seed, same graph") {
    CHECK(make_small_world(40, 120, 0.5, 11) == make_small_world(40, 120, 0.5, 11));
  }
  SUBCASE("p = 0.2 spectral band over 200 seeds") {
    // Band measured by a 200-seed sweep of this generator: [0.794, 2.006].
    double lo = 1e9;
    double hi = 0.0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      const double l2 = algebraic_connectivity(make_small_world(25, 75, 0.2, seed));
      lo = std::min(lo, l2);
      hi = std::max(hi, l2);
    }
    CHECK(lo >= 0.75);
    CHECK(hi <= 2.1);
  }
  SUBCASE("infeasible parameters") {
    CHECK_THROWS_AS(make_small_world(25, 70, 0.2, 1), ConfigError);
    CHECK_THROWS_AS(make_small_world(5, 15, 0.2, 1), ConfigError);
    CHECK_THROWS_AS(make_small_world(25, 75, 1.5, 1), ConfigError);
  }
}

TEST_CASE("generator outputs satisfy the graph invariants") {
  check_generator_invariants(make_ring(25));
  check_generator_invariants(make_complete(7));
  check_generator_invariants(make_regular_lattice(25, 3));
  check_generator_invariants(make_small_world(25, 75, 0.5, 4));
}

TEST_CASE("laplacian") {
  Eigen::MatrixXd pair(2, 2);
  pair << 1, -1, -1, 1;
  CHECK(laplacian(make_complete(2)) == pair);
  Eigen::MatrixXd cycle(3, 3);
  cycle << 1, -1, 0, 0, 1, -1, -1, 0, 1;
  CHECK(laplacian(make_ring(3)) == cycle);

  SUBCASE("inactive nodes are cut out") {
    const auto l = laplacian(make_complete(3), {true, false, true});
    Eigen::MatrixXd expected(3, 3);
    expected << 1, 0, -1, 0, 0, 0, -1, 0, 1;
    CHECK(l == expected);
  }
}

TEST_CASE("balance and connectivity checks") {
  CHECK(is_balanced(make_ring(6)));
  NetworkGraph path(3);
  path.add_edge(0, 1);
  path.add_edge(1, 2);
  CHECK_FALSE(is_balanced(path));
  CHECK_THROWS_AS(algebraic_connectivity(path), std::invalid_argument);

  NetworkGraph two_cycles(6);
  for (NodeIndex i = 0; i < 3; ++i) {
    two_cycles.add_edge(i, (i + 1) % 3);
    two_cycles.add_edge(3 + i, 3 + (i + 1) % 3);
  }
  CHECK(is_balanced(two_cycles));
  CHECK_FALSE(is_strongly_connected(two_cycles));
  CHECK(algebraic_connectivity(two_cycles) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(algebraic_connectivity(make_ring(6)) > 1e-3);

  NetworkGraph g(2);
  CHECK_THROWS_AS(g.add_edge(1, 1), std::invalid_argument);
  CHECK_THROWS_AS(g.add_edge(0, 2), std::invalid_argument);
}

TEST_CASE("edge list round trip") {
  const auto g = make_small_world(20, 60, 0.5, 9);
  std::stringstream buffer;
  write_edge_list(buffer, g);
  const auto back = read_edge_list(buffer);
  CHECK(back.adjacency() == g.adjacency());
  CHECK(buffer.str().rfind("nodes 20\n", 0) == 0);

  std::istringstream bad("0 1\n");
  CHECK_THROWS_AS(read_edge_list(bad), ConfigError);
  std::istringstream loop("nodes 2\n1 1\n");
  CHECK_THROWS_AS(read_edge_list(loop), ConfigError);
  std::istringstream commented("# demo\nnodes 2\n0 1  # forward\n1 0\n");
  CHECK(read_edge_list(commented).edge_count() == 2);
}

TEST_CASE("topology spec") {
  CHECK(parse_topology_kind("small_world") == TopologyKind::small_world);
  CHECK_THROWS_AS(parse_topology_kind("torus"), ConfigError);
  TopologySpec spec;
  spec.kind = TopologyKind::small_world;
  spec.nodes = 25;
  CHECK(make_topology(spec).edge_count() == 150);
}
