#pragma once

#include <map>
#include <vector>

#include "ppds/dense.hpp"
#include "ppds/graph.hpp"
#include "ppds/rng.hpp"

namespace ppds {

/// One round's pair of mixing matrices: A is row-stochastic (pull / consensus
/// side), B is column-stochastic (push / mass-preserving side). Both must be
/// compatible with the communication graph: entry (i,j) may be non-zero only
/// if j can send to i, or i == j.
struct MixingPair {
  DenseMatrix A;
  DenseMatrix B;
};

/// Metropolis matrix of the subgraph induced by `active`: for distinct
/// connected active nodes the weight is 1/max(deg(i), deg(j)) with degrees
/// counted inside the active set; diagonals absorb the remaining mass; nodes
/// outside the active set get identity rows. Requires a symmetric graph.
/// Returns A = B = that matrix (doubly stochastic).
MixingPair metropolis(const DirectedGraph& g, const std::vector<int>& active);

/// Broadcast-style pair: each active node j pushes its state to targets[j]
/// (a subset of its out-neighbors, always including j itself); receivers
/// average what they got. A_ij = 1/|N_in(i) u {i}| for senders j of i (and
/// j = i), B_ij = 1/|targets[j]|, and inactive nodes keep their own B mass.
/// Throws if a target is not an out-neighbor or a node omits itself.
MixingPair broadcast_matrices(const DirectedGraph& g,
                              const std::vector<int>& active,
                              const std::map<int, std::vector<int>>& targets,
                              int node_count);

/// A = B = (1/M) * ones. The full-averaging pair.
MixingPair mean_matrix(int node_count);

struct MixingStrategy {
  enum class Kind {
    Fixed,               // always the stored pair
    MetropolisOnActive,  // metropolis on active set + sampled neighbors
    Broadcast,           // each active node pushes to sampled out-neighbors
    Mean,                // full averaging
    IndependentGossip,   // metropolis on nodes sampled independently of active
  };

  Kind kind = Kind::Mean;
  const DirectedGraph* graph = nullptr;  // not owned; unused for Fixed/Mean
  int node_count = 0;
  MixingPair fixed;             // Kind::Fixed
  int neighbors_per_active = 0; // Kind::MetropolisOnActive
  int targets_per_active = 1;   // Kind::Broadcast
  int comm_nodes = 0;           // Kind::IndependentGossip
  int neighbors_per_comm = 0;   // Kind::IndependentGossip

  static MixingStrategy make_fixed(MixingPair pair);
  static MixingStrategy make_mean(int node_count);
  static MixingStrategy make_metropolis_on_active(const DirectedGraph& g,
                                                  int neighbors_per_active);
  static MixingStrategy make_broadcast(const DirectedGraph& g,
                                       int targets_per_active);
  static MixingStrategy make_independent_gossip(const DirectedGraph& g,
                                                int comm_nodes,
                                                int neighbors_per_comm);
};

/// Draws one round's pair. Random choices (broadcast targets, gossip node
/// sets) come from the given stream, so draws are i.i.d. across rounds and
/// reproducible for a fixed stream state.
MixingPair sample_mixing(const MixingStrategy& strategy,
                         const std::vector<int>& active, Rng& rng);

struct MixingReport {
  bool row_stochastic_A = false;
  bool col_stochastic_B = false;
  bool graph_compatible = false;
  bool diag_ge_beta = false;
  bool doubly_stochastic_A = false;
  bool doubly_stochastic_B = false;
  double min_diag_A = 0.0;
  double min_diag_B = 0.0;

  bool pair_valid() const {
    return row_stochastic_A && col_stochastic_B && graph_compatible;
  }
};

/// Checks the MixingPair invariants plus the diagonal lower bound and double
/// stochasticity, each within tolerance 1e-12. Report-only, never throws.
MixingReport validate_mixing(const MixingPair& pair, const DirectedGraph& g,
                             double beta);

}  // namespace ppds
