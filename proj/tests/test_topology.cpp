#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "ppds/graph.hpp"
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

}  // namespace

TEST_CASE("single node graph") {
  const DirectedGraph g = build_rgg(1, 0.1, 42);
  CHECK(g.node_count() == 1);
  CHECK(g.edge_count() == 0);
  CHECK(is_strongly_connected(g));
}

TEST_CASE("two nodes within radius sqrt(2) always connect") {
  const DirectedGraph g = build_rgg(2, 1.5, 9);
  CHECK(g.has_edge(0, 1));
  CHECK(g.has_edge(1, 0));
}

TEST_CASE("benchmark-scale geometric graph is symmetric and connected") {
  const DirectedGraph g = build_rgg(100, 0.2, 123);
  CHECK(g.node_count() == 100);
  CHECK(g.is_symmetric());
  CHECK(is_strongly_connected(g));
}

TEST_CASE("rgg generation is deterministic in the seed") {
  const DirectedGraph a = build_rgg(40, 0.3, 7);
  const DirectedGraph b = build_rgg(40, 0.3, 7);
  CHECK(a == b);
  const DirectedGraph c = build_rgg(40, 0.3, 8);
  CHECK(a != c);
}

TEST_CASE("rgg gives up after 1000 attempts when the radius is hopeless") {
  CHECK_THROWS_AS(build_rgg(30, 1e-3, 1), std::runtime_error);
}

TEST_CASE("induced subgraph keeps the full index space") {
  const DirectedGraph g = path3();
  const DirectedGraph all = induced_subgraph(g, {0, 1, 2});
  CHECK(all == g);
  const DirectedGraph none = induced_subgraph(g, {});
  CHECK(none.edge_count() == 0);
  CHECK(none.node_count() == 3);
  const DirectedGraph pair = induced_subgraph(g, {0, 1});
  CHECK(pair.has_edge(0, 1));
  CHECK(pair.has_edge(1, 0));
  CHECK(pair.edge_count() == 2);
  CHECK_THROWS_AS(induced_subgraph(g, {3}), std::out_of_range);
}

TEST_CASE("induced edges are a subset of the original") {
  Rng rng(6);
  const DirectedGraph g = build_rgg(30, 0.35, 11);
  for (int rep = 0; rep < 25; ++rep) {
    const auto verts = rng.sample_without_replacement(
        30, 1 + static_cast<int>(rng.uniform_int(29)));
    const DirectedGraph sub = induced_subgraph(g, verts);
    for (int i = 0; i < 30; ++i) {
      for (int j : sub.out_neighbors(i)) CHECK(g.has_edge(i, j));
    }
  }
}

TEST_CASE("strong connectivity") {
  DirectedGraph one_way(2);
  one_way.add_edge(0, 1);
  CHECK_FALSE(is_strongly_connected(one_way));

  DirectedGraph cycle(3);
  cycle.add_edge(0, 1);
  cycle.add_edge(1, 2);
  cycle.add_edge(2, 0);
  CHECK(is_strongly_connected(cycle));

  DirectedGraph single(1);
  CHECK(is_strongly_connected(single));
}

TEST_CASE("edge list export format") {
  const std::string path = "test_graph_export.tmp";
  save_edge_list(path, path3());
  std::ifstream in(path);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "M=3");
  int edges = 0;
  while (std::getline(in, line)) {
    if (!line.empty()) ++edges;
  }
  CHECK(edges == 4);
  std::remove(path.c_str());
}
