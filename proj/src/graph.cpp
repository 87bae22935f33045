#include "ppds/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "ppds/rng.hpp"

namespace ppds {

DirectedGraph::DirectedGraph(int node_count) : m_(node_count) {
  if (node_count < 0) throw std::invalid_argument("negative node count");
  out_.resize(static_cast<std::size_t>(node_count));
  in_.resize(static_cast<std::size_t>(node_count));
}

void DirectedGraph::check_node(int i) const {
  if (i < 0 || i >= m_) {
    throw std::out_of_range("node index " + std::to_string(i) +
                            " outside [0, " + std::to_string(m_) + ")");
  }
}

void DirectedGraph::add_edge(int from, int to) {
  check_node(from);
  check_node(to);
  if (from == to) return;
  auto& o = out_[static_cast<std::size_t>(from)];
  const auto it = std::lower_bound(o.begin(), o.end(), to);
  if (it != o.end() && *it == to) return;
  o.insert(it, to);
  auto& in = in_[static_cast<std::size_t>(to)];
  in.insert(std::lower_bound(in.begin(), in.end(), from), from);
}

bool DirectedGraph::has_edge(int from, int to) const {
  check_node(from);
  check_node(to);
  const auto& o = out_[static_cast<std::size_t>(from)];
  return std::binary_search(o.begin(), o.end(), to);
}

std::size_t DirectedGraph::edge_count() const {
  std::size_t n = 0;
  for (const auto& o : out_) n += o.size();
  return n;
}

bool DirectedGraph::is_symmetric() const {
  for (int i = 0; i < m_; ++i) {
    for (int j : out_[static_cast<std::size_t>(i)]) {
      if (!has_edge(j, i)) return false;
    }
  }
  return true;
}

namespace {

DirectedGraph rgg_attempt(int m, double radius, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> xs(static_cast<std::size_t>(m)), ys(xs);
  for (int i = 0; i < m; ++i) {
    xs[static_cast<std::size_t>(i)] = rng.uniform();
    ys[static_cast<std::size_t>(i)] = rng.uniform();
  }
  DirectedGraph g(m);
  const double r2 = radius * radius;
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      const double dx = xs[static_cast<std::size_t>(i)] - xs[static_cast<std::size_t>(j)];
      const double dy = ys[static_cast<std::size_t>(i)] - ys[static_cast<std::size_t>(j)];
      if (dx * dx + dy * dy <= r2) {
        g.add_edge(i, j);
        g.add_edge(j, i);
      }
    }
  }
  return g;
}

}  // namespace

DirectedGraph build_rgg(int node_count, double radius, std::uint64_t seed) {
  if (node_count < 1) throw std::invalid_argument("build_rgg: need at least one node");
  if (!(radius > 0.0)) throw std::invalid_argument("build_rgg: radius must be positive");
  constexpr int kMaxAttempts = 1000;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    DirectedGraph g = rgg_attempt(node_count, radius, seed + static_cast<std::uint64_t>(attempt));
    if (is_strongly_connected(g)) return g;
  }
  throw std::runtime_error(
      "build_rgg: no strongly connected graph in 1000 attempts; radius " +
      std::to_string(radius) + " is too small for " +
      std::to_string(node_count) + " nodes");
}

DirectedGraph induced_subgraph(const DirectedGraph& g,
                               const std::vector<int>& vertices) {
  std::vector<char> keep(static_cast<std::size_t>(g.node_count()), 0);
  for (int v : vertices) {
    if (v < 0 || v >= g.node_count()) {
      throw std::out_of_range("induced_subgraph: vertex " + std::to_string(v) +
                              " out of range");
    }
    keep[static_cast<std::size_t>(v)] = 1;
  }
  DirectedGraph sub(g.node_count());
  for (int i = 0; i < g.node_count(); ++i) {
    if (!keep[static_cast<std::size_t>(i)]) continue;
    for (int j : g.out_neighbors(i)) {
      if (keep[static_cast<std::size_t>(j)]) sub.add_edge(i, j);
    }
  }
  return sub;
}

namespace {

// iterative DFS marking everything reachable from node 0
std::size_t count_reachable(const DirectedGraph& g, bool reversed) {
  const int m = g.node_count();
  std::vector<char> seen(static_cast<std::size_t>(m), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  std::size_t count = 1;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    const auto& next = reversed ? g.in_neighbors(u) : g.out_neighbors(u);
    for (int v : next) {
      if (!seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = 1;
        ++count;
        stack.push_back(v);
      }
    }
  }
  return count;
}

}  // namespace

bool is_strongly_connected(const DirectedGraph& g) {
  if (g.node_count() == 0) return true;
  const auto m = static_cast<std::size_t>(g.node_count());
  return count_reachable(g, false) == m && count_reachable(g, true) == m;
}

void save_edge_list(const std::string& path, const DirectedGraph& g) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  std::fprintf(f, "M=%d\n", g.node_count());
  for (int i = 0; i < g.node_count(); ++i) {
    for (int j : g.out_neighbors(i)) std::fprintf(f, "%d %d\n", i, j);
  }
  std::fclose(f);
}

}  // namespace ppds
