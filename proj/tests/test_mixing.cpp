#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ppds/engine.hpp"
#include "ppds/mixing.hpp"
#include "ppds/rng.hpp"

using namespace ppds;

namespace {

DirectedGraph path3() {
  DirectedGraph g(3);
  g.add_edge(0, 1);
  g.add_edge(1, 0);
  g.add_edge(1, 2);
  g.add_edge(2, 1);
  return g;
}

DirectedGraph pair2() {
  DirectedGraph g(2);
  g.add_edge(0, 1);
  g.add_edge(1, 0);
  return g;
}

}  // namespace

TEST_CASE("metropolis with empty active set is the identity") {
  const MixingPair p = metropolis(path3(), {});
  CHECK(p.A == DenseMatrix::identity(3));
  CHECK(p.B == DenseMatrix::identity(3));
}

TEST_CASE("metropolis on two connected active nodes swaps them") {
  const MixingPair p = metropolis(pair2(), {0, 1});
  CHECK(p.A(0, 0) == 0.0);
  CHECK(p.A(0, 1) == 1.0);
  CHECK(p.A(1, 0) == 1.0);
  CHECK(p.A(1, 1) == 0.0);
}

TEST_CASE("metropolis on the 3-path matches the degree formula") {
  const MixingPair p = metropolis(path3(), {0, 1, 2});
  const double expected[3][3] = {{0.5, 0.5, 0.0}, {0.5, 0.0, 0.5}, {0.0, 0.5, 0.5}};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) CHECK(p.A(i, j) == expected[i][j]);
  }
  CHECK(p.A == p.B);
}

TEST_CASE("metropolis rejects asymmetric graphs") {
  DirectedGraph g(2);
  g.add_edge(0, 1);
  CHECK_THROWS_AS(metropolis(g, {0, 1}), std::invalid_argument);
}

TEST_CASE("broadcast pair for one active sender") {
  std::map<int, std::vector<int>> targets{{0, {0, 1}}};
  const MixingPair p = broadcast_matrices(pair2(), {0}, targets, 2);
  CHECK(p.A(0, 0) == 1.0);
  CHECK(p.A(0, 1) == 0.0);
  CHECK(p.A(1, 0) == 0.5);
  CHECK(p.A(1, 1) == 0.5);
  CHECK(p.B(0, 0) == 0.5);
  CHECK(p.B(0, 1) == 0.0);
  CHECK(p.B(1, 0) == 0.5);
  CHECK(p.B(1, 1) == 1.0);
  // hand column-sum of A shows it is not doubly stochastic
  const MixingReport rep = validate_mixing(p, pair2(), 0.0);
  CHECK(rep.row_stochastic_A);
  CHECK(rep.col_stochastic_B);
  CHECK_FALSE(rep.doubly_stochastic_A);
}

TEST_CASE("broadcast rejects bad target sets") {
  DirectedGraph g(3);
  g.add_edge(0, 1);
  g.add_edge(1, 0);
  std::map<int, std::vector<int>> not_neighbor{{0, {0, 2}}};
  CHECK_THROWS_AS(broadcast_matrices(g, {0}, not_neighbor, 3), std::invalid_argument);
  std::map<int, std::vector<int>> no_self{{0, {1}}};
  CHECK_THROWS_AS(broadcast_matrices(g, {0}, no_self, 3), std::invalid_argument);
}

TEST_CASE("mean matrix") {
  CHECK(mean_matrix(1).A(0, 0) == 1.0);
  const MixingPair p2 = mean_matrix(2);
  for (double v : p2.A.data) CHECK(v == 0.5);
  const MixingPair p4 = mean_matrix(4);
  for (double v : p4.A.data) CHECK(v == 0.25);
  const MixingReport rep = validate_mixing(p4, DirectedGraph(4), 0.25);
  CHECK(rep.doubly_stochastic_A);
  CHECK(rep.doubly_stochastic_B);
  CHECK(rep.diag_ge_beta);
  CHECK_FALSE(rep.graph_compatible);  // edgeless graph cannot carry J
}

TEST_CASE("validate_mixing on the identity pair") {
  const MixingPair p{DenseMatrix::identity(4), DenseMatrix::identity(4)};
  const MixingReport rep = validate_mixing(p, DirectedGraph(4), 1.0);
  CHECK(rep.row_stochastic_A);
  CHECK(rep.col_stochastic_B);
  CHECK(rep.graph_compatible);
  CHECK(rep.diag_ge_beta);
  CHECK(rep.doubly_stochastic_A);
  CHECK(rep.doubly_stochastic_B);
}

TEST_CASE("every constructor output satisfies the pair invariants") {
  const DirectedGraph g = build_rgg(25, 0.35, 3);
  Rng rng(17);
  // the full-averaging pair needs every link, so it validates on a clique
  DirectedGraph clique(25);
  for (int i = 0; i < 25; ++i) {
    for (int j = 0; j < 25; ++j) {
      if (i != j) clique.add_edge(i, j);
    }
  }
  {
    const MixingStrategy mean = MixingStrategy::make_mean(25);
    const MixingPair p = sample_mixing(mean, {0, 3, 9}, rng);
    CHECK(validate_mixing(p, clique, 1.0 / 25).pair_valid());
  }
  const std::vector<MixingStrategy> strategies{
      MixingStrategy::make_metropolis_on_active(g, 1),
      MixingStrategy::make_metropolis_on_active(g, 3),
      MixingStrategy::make_broadcast(g, 1),
      MixingStrategy::make_broadcast(g, 2),
      MixingStrategy::make_independent_gossip(g, 5, 1),
  };
  for (const auto& strategy : strategies) {
    for (int rep = 0; rep < 25; ++rep) {
      const auto active = rng.sample_without_replacement(
          25, 1 + static_cast<int>(rng.uniform_int(25)));
      const MixingPair p = sample_mixing(strategy, active, rng);
      const MixingReport r = validate_mixing(p, g, 0.0);
      CHECK(r.pair_valid());
      CHECK(p.A.all_finite());
      CHECK(p.B.all_finite());
    }
  }
}

TEST_CASE("metropolis output is symmetric and doubly stochastic") {
  const DirectedGraph g = build_rgg(20, 0.4, 5);
  Rng rng(23);
  for (int rep = 0; rep < 30; ++rep) {
    const auto active = rng.sample_without_replacement(
        20, 1 + static_cast<int>(rng.uniform_int(20)));
    const MixingPair p = metropolis(g, active);
    const MixingReport r = validate_mixing(p, g, 0.0);
    CHECK(r.doubly_stochastic_A);
    CHECK(r.doubly_stochastic_B);
    for (int i = 0; i < 20; ++i) {
      for (int j = 0; j < i; ++j) CHECK(p.A(i, j) == p.A(j, i));
    }
  }
}

TEST_CASE("broadcast push matrix preserves total mass") {
  const DirectedGraph g = build_rgg(15, 0.45, 8);
  const MixingStrategy strategy = MixingStrategy::make_broadcast(g, 2);
  Rng rng(31);
  for (int rep = 0; rep < 30; ++rep) {
    const auto active = rng.sample_without_replacement(
        15, 1 + static_cast<int>(rng.uniform_int(15)));
    const MixingPair p = sample_mixing(strategy, active, rng);
    DenseVector v(15);
    for (auto& x : v) x = rng.normal();
    const DenseVector bv = matvec(p.B, v);
    double sum_v = 0.0, sum_bv = 0.0;
    for (double x : v) sum_v += x;
    for (double x : bv) sum_bv += x;
    CHECK(std::fabs(sum_v - sum_bv) <= 1e-12 * (1.0 + std::fabs(sum_v)));
  }
}

TEST_CASE("sample_mixing is deterministic for a fixed stream state") {
  const DirectedGraph g = build_rgg(12, 0.5, 2);
  const MixingStrategy strategy = MixingStrategy::make_broadcast(g, 1);
  Rng rng_a(99), rng_b(99);
  const MixingPair pa = sample_mixing(strategy, {1, 4, 7}, rng_a);
  const MixingPair pb = sample_mixing(strategy, {1, 4, 7}, rng_b);
  CHECK(pa.A == pb.A);
  CHECK(pa.B == pb.B);
}

TEST_CASE("benchmark-scale broadcast round validates") {
  const DirectedGraph g = build_rgg(100, 0.2, 123);
  const MixingStrategy strategy = MixingStrategy::make_broadcast(g, 1);
  Rng rng(1);
  const SamplingPlan plan = SamplingPlan::uniform(100, 20);
  const auto active = sample_devices(plan, rng);
  CHECK(active.size() == 20);
  const MixingPair p = sample_mixing(strategy, active, rng);
  CHECK(validate_mixing(p, g, 0.0).pair_valid());
}
