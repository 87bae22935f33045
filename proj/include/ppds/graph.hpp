#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ppds {

/// Directed communication topology over nodes 0..M-1. Self-loops are never
/// stored; a node's communication with itself is implicit in the mixing
/// matrices. Adjacency lists are kept sorted and mutually consistent.
class DirectedGraph {
 public:
  DirectedGraph() = default;
  explicit DirectedGraph(int node_count);

  int node_count() const { return m_; }
  /// Adds edge i -> j (i can send to j). Ignores duplicates and self-loops.
  void add_edge(int from, int to);
  bool has_edge(int from, int to) const;
  std::size_t edge_count() const;

  const std::vector<int>& out_neighbors(int i) const { return out_[i]; }
  const std::vector<int>& in_neighbors(int i) const { return in_[i]; }

  /// True when i -> j implies j -> i.
  bool is_symmetric() const;

  bool operator==(const DirectedGraph&) const = default;

 private:
  void check_node(int i) const;
  int m_ = 0;
  std::vector<std::vector<int>> out_, in_;
};

/// Random geometric graph on the unit square: M points drawn i.i.d. uniform
/// from the seeded stream, i <-> j connected iff their Euclidean distance is
/// at most radius. If the draw is not strongly connected, positions are
/// redrawn with seed+1, seed+2, ... for up to 1000 attempts, after which an
/// error reports the radius as too small.
DirectedGraph build_rgg(int node_count, double radius, std::uint64_t seed);

/// Subgraph over the same index space keeping only edges with both endpoints
/// in `vertices`; other nodes become isolated. Throws on out-of-range vertex.
DirectedGraph induced_subgraph(const DirectedGraph& g,
                               const std::vector<int>& vertices);

bool is_strongly_connected(const DirectedGraph& g);

/// Edge-list export: header line "M=<count>", then one "i j" pair per line.
void save_edge_list(const std::string& path, const DirectedGraph& g);

}  // namespace ppds
