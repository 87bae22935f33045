#include "ppds/mixing.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace ppds {

MixingPair metropolis(const DirectedGraph& g, const std::vector<int>& active) {
  if (!g.is_symmetric()) {
    throw std::invalid_argument("metropolis: graph must be symmetric");
  }
  const int m = g.node_count();
  const DirectedGraph sub = induced_subgraph(g, active);
  DenseMatrix w = DenseMatrix::identity(m);
  for (int i : active) {
    const auto& nbrs = sub.out_neighbors(i);
    if (nbrs.empty()) continue;  // isolated in the induced graph: identity row
    const auto deg_i = nbrs.size();
    double off_sum = 0.0;
    for (int j : nbrs) {
      const auto deg_j = sub.out_neighbors(j).size();
      const double v = 1.0 / static_cast<double>(std::max(deg_i, deg_j));
      w(i, j) = v;
      off_sum += v;
    }
    w(i, i) = 1.0 - off_sum;
  }
  return {w, w};
}

MixingPair broadcast_matrices(const DirectedGraph& g,
                              const std::vector<int>& active,
                              const std::map<int, std::vector<int>>& targets,
                              int node_count) {
  const int m = node_count;
  std::vector<char> is_active(static_cast<std::size_t>(m), 0);
  for (int i : active) is_active[static_cast<std::size_t>(i)] = 1;

  for (const auto& [j, t] : targets) {
    if (!is_active[static_cast<std::size_t>(j)]) {
      throw std::invalid_argument("broadcast_matrices: targets given for inactive node " +
                                  std::to_string(j));
    }
  }
  // senders[i] = active nodes that transmit to i this round
  std::vector<std::vector<int>> senders(static_cast<std::size_t>(m));
  std::vector<std::size_t> fanout(static_cast<std::size_t>(m), 0);
  for (int j : active) {
    const auto it = targets.find(j);
    if (it == targets.end() ||
        std::find(it->second.begin(), it->second.end(), j) == it->second.end()) {
      throw std::invalid_argument("broadcast_matrices: active node " +
                                  std::to_string(j) +
                                  " must include itself in its targets");
    }
    for (int t : it->second) {
      if (t != j && !g.has_edge(j, t)) {
        throw std::invalid_argument("broadcast_matrices: " + std::to_string(t) +
                                    " is not an out-neighbor of " +
                                    std::to_string(j));
      }
      senders[static_cast<std::size_t>(t)].push_back(j);
    }
    fanout[static_cast<std::size_t>(j)] = it->second.size();
  }

  DenseMatrix a(m, m, 0.0), b(m, m, 0.0);
  for (int i = 0; i < m; ++i) {
    const auto& in = senders[static_cast<std::size_t>(i)];
    const bool self_included = std::find(in.begin(), in.end(), i) != in.end();
    const auto card = in.size() + (self_included ? 0 : 1);
    const double wa = 1.0 / static_cast<double>(card);
    a(i, i) = wa;
    for (int j : in) {
      a(i, j) = wa;
      b(i, j) = 1.0 / static_cast<double>(fanout[static_cast<std::size_t>(j)]);
    }
    if (!is_active[static_cast<std::size_t>(i)]) b(i, i) = 1.0;
  }
  return {a, b};
}

MixingPair mean_matrix(int node_count) {
  if (node_count < 1) throw std::invalid_argument("mean_matrix: node_count must be >= 1");
  DenseMatrix j(node_count, node_count, 1.0 / node_count);
  return {j, j};
}

MixingStrategy MixingStrategy::make_fixed(MixingPair pair) {
  MixingStrategy s;
  s.kind = Kind::Fixed;
  s.node_count = pair.A.rows;
  s.fixed = std::move(pair);
  return s;
}

MixingStrategy MixingStrategy::make_mean(int node_count) {
  MixingStrategy s;
  s.kind = Kind::Mean;
  s.node_count = node_count;
  return s;
}

MixingStrategy MixingStrategy::make_metropolis_on_active(const DirectedGraph& g,
                                                         int neighbors_per_active) {
  MixingStrategy s;
  s.kind = Kind::MetropolisOnActive;
  s.graph = &g;
  s.node_count = g.node_count();
  s.neighbors_per_active = neighbors_per_active;
  return s;
}

MixingStrategy MixingStrategy::make_broadcast(const DirectedGraph& g,
                                              int targets_per_active) {
  MixingStrategy s;
  s.kind = Kind::Broadcast;
  s.graph = &g;
  s.node_count = g.node_count();
  s.targets_per_active = targets_per_active;
  return s;
}

MixingStrategy MixingStrategy::make_independent_gossip(const DirectedGraph& g,
                                                       int comm_nodes,
                                                       int neighbors_per_comm) {
  MixingStrategy s;
  s.kind = Kind::IndependentGossip;
  s.graph = &g;
  s.node_count = g.node_count();
  s.comm_nodes = comm_nodes;
  s.neighbors_per_comm = neighbors_per_comm;
  return s;
}

namespace {

// Up to k neighbors of node i sampled without replacement; all of them when
// the node has fewer than k.
std::vector<int> sampled_neighbors(const DirectedGraph& g, int i, int k, Rng& rng) {
  const auto& nbrs = g.out_neighbors(i);
  const int n = static_cast<int>(nbrs.size());
  if (k >= n) return nbrs;
  std::vector<int> picked;
  picked.reserve(static_cast<std::size_t>(k));
  for (int idx : rng.sample_without_replacement(n, k)) {
    picked.push_back(nbrs[static_cast<std::size_t>(idx)]);
  }
  return picked;
}

std::vector<int> sorted_union(std::set<int>&& s) {
  return {s.begin(), s.end()};
}

}  // namespace

MixingPair sample_mixing(const MixingStrategy& strategy,
                         const std::vector<int>& active, Rng& rng) {
  using Kind = MixingStrategy::Kind;
  switch (strategy.kind) {
    case Kind::Fixed:
      return strategy.fixed;
    case Kind::Mean:
      return mean_matrix(strategy.node_count);
    case Kind::MetropolisOnActive: {
      std::set<int> comm(active.begin(), active.end());
      for (int i : active) {
        for (int j : sampled_neighbors(*strategy.graph, i,
                                       strategy.neighbors_per_active, rng)) {
          comm.insert(j);
        }
      }
      return metropolis(*strategy.graph, sorted_union(std::move(comm)));
    }
    case Kind::Broadcast: {
      std::map<int, std::vector<int>> targets;
      for (int j : active) {
        std::vector<int> t{j};
        for (int v : sampled_neighbors(*strategy.graph, j,
                                       strategy.targets_per_active, rng)) {
          t.push_back(v);
        }
        targets.emplace(j, std::move(t));
      }
      return broadcast_matrices(*strategy.graph, active, targets,
                                strategy.node_count);
    }
    case Kind::IndependentGossip: {
      const int m = strategy.node_count;
      const int c = std::min(strategy.comm_nodes, m);
      std::set<int> comm;
      for (int i : rng.sample_without_replacement(m, c)) {
        comm.insert(i);
        for (int j : sampled_neighbors(*strategy.graph, i,
                                       strategy.neighbors_per_comm, rng)) {
          comm.insert(j);
        }
      }
      return metropolis(*strategy.graph, sorted_union(std::move(comm)));
    }
  }
  throw std::logic_error("sample_mixing: unknown strategy kind");
}

namespace {

constexpr double kTol = 1e-12;

bool stochastic_rows(const DenseMatrix& m) {
  for (int i = 0; i < m.rows; ++i) {
    double sum = 0.0;
    for (int j = 0; j < m.cols; ++j) {
      if (m(i, j) < -kTol) return false;
      sum += m(i, j);
    }
    if (std::fabs(sum - 1.0) > kTol) return false;
  }
  return true;
}

bool stochastic_cols(const DenseMatrix& m) {
  for (int j = 0; j < m.cols; ++j) {
    double sum = 0.0;
    for (int i = 0; i < m.rows; ++i) {
      if (m(i, j) < -kTol) return false;
      sum += m(i, j);
    }
    if (std::fabs(sum - 1.0) > kTol) return false;
  }
  return true;
}

bool compatible(const DenseMatrix& m, const DirectedGraph& g) {
  for (int i = 0; i < m.rows; ++i) {
    for (int j = 0; j < m.cols; ++j) {
      if (i != j && m(i, j) != 0.0 && !g.has_edge(j, i)) return false;
    }
  }
  return true;
}

double min_diag(const DenseMatrix& m) {
  double v = m(0, 0);
  for (int i = 1; i < m.rows; ++i) v = std::min(v, m(i, i));
  return v;
}

}  // namespace

MixingReport validate_mixing(const MixingPair& pair, const DirectedGraph& g,
                             double beta) {
  MixingReport r;
  r.row_stochastic_A = stochastic_rows(pair.A);
  r.col_stochastic_B = stochastic_cols(pair.B);
  r.graph_compatible = compatible(pair.A, g) && compatible(pair.B, g);
  r.min_diag_A = min_diag(pair.A);
  r.min_diag_B = min_diag(pair.B);
  r.diag_ge_beta = r.min_diag_A >= beta - kTol && r.min_diag_B >= beta - kTol;
  r.doubly_stochastic_A = r.row_stochastic_A && stochastic_cols(pair.A);
  r.doubly_stochastic_B = r.col_stochastic_B && stochastic_rows(pair.B);
  return r;
}

}  // namespace ppds
