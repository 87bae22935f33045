#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "ppds/config.hpp"
#include "ppds/dense.hpp"
#include "ppds/graph.hpp"
#include "ppds/mixing.hpp"
#include "ppds/objectives.hpp"
#include "ppds/rng.hpp"

namespace ppds {

struct SamplingPlan {
  enum class Kind { UniformWithoutReplacement, Bernoulli };
  Kind kind = Kind::UniformWithoutReplacement;
  int node_count = 0;
  int sample_size = 0;     // uniform: exactly S nodes per round
  std::vector<double> p;   // bernoulli: per-node inclusion probabilities

  static SamplingPlan uniform(int node_count, int sample_size);
  static SamplingPlan bernoulli(std::vector<double> p);
};

/// Draws one round's active set (ascending indices).
std::vector<int> sample_devices(const SamplingPlan& plan, Rng& rng);

/// Iterate state of the network methods. X holds the decision variables
/// (one row per node), Y the gradient trackers, Z the points at which each
/// node last evaluated its gradient, and grad_table caches those gradients
/// so ∇F(Z) is never recomputed at unchanged points.
struct AlgoState {
  DenseMatrix X, Y, Z, grad_table;
  long long t = 0;
  std::uint64_t cum_comm = 0;   // activated directed links so far
  std::uint64_t cum_grads = 0;  // local gradient evaluations so far
};

/// X0 rows i.i.d. standard normal from the seed, Z0 = X0, Y0 = ∇F(X0)
/// (one gradient per node, counted), so the tracker mass identity holds
/// from the start.
AlgoState init_state(const Objective& obj, std::uint64_t seed);

/// Relative tracker mass residual |1ᵀY - 1ᵀ∇F(Z)| / (1 + |1ᵀ∇F(Z)|);
/// stays at rounding level as long as every B used was column-stochastic.
double mass_residual(const AlgoState& state);

/// One device-sampled push-pull round with gradient memory:
///   Yhat = Y + D(∇F(X) - ∇F(Z)),  Xhat = X - eta D Yhat,
///   Z' = D X + (I-D) Z,  Y' = B Yhat,  X' = A Xhat,
/// with D = diag(1 active). Gradients are evaluated only at active rows.
void ppds_step(AlgoState& state, const MixingPair& pair,
               const std::vector<int>& active, double eta,
               const Objective& obj);

/// Synchronous gradient-tracking round: X' = A X - eta Y,
/// Y' = B Y + ∇F(X') - ∇F(X). Every node evaluates a gradient.
void push_pull_step(AlgoState& state, const DenseMatrix& A,
                    const DenseMatrix& B, double eta, const Objective& obj);

/// Gossiped gradient step X' = A (X - eta D ∇F(X)); no tracking variables.
void dgd_step(AlgoState& state, const DenseMatrix& A,
              const std::vector<int>& active, double eta,
              const Objective& obj);

/// Single-iterate variance-reduced state: one decision vector plus a table
/// of per-component gradients and their running average.
struct SagaState {
  DenseVector x;
  DenseMatrix phi;         // rows: points where each gradient was taken
  DenseMatrix phi_grads;   // rows: the stored gradients
  DenseVector grad_avg;    // running average of phi_grads rows
  long long t = 0;
  std::uint64_t cum_grads = 0;
};

SagaState init_saga(const Objective& obj, std::uint64_t seed);
SagaState init_saga_from(const Objective& obj, DenseVector x0,
                         DenseMatrix phi, DenseMatrix phi_grads);

/// g = ∇f_i(x) - ∇f_i(phi_i) + avg_k ∇f_k(phi_k); x' = x - eta g; then the
/// table entry and running average are updated in place.
void saga_step(SagaState& state, int sampled, double eta, const Objective& obj);

struct MetricsRecord {
  long long t = 0;
  std::uint64_t comm_cost = 0;
  std::uint64_t grad_count = 0;
  double consensus = 0.0;  // (1/M) sum_i |x_i - xbar|^2
  double subopt = 0.0;     // (1/M) sum_i f(x_i) - f*
};

/// Sub-stream tags of the experiment seed; every consumer of randomness has
/// its own derived stream so the draws stay independent and reproducible.
enum class SeedStream : std::uint64_t {
  Graph = 0,
  Data = 1,
  Lambda = 2,
  Init = 3,
  Sampling = 4,
  Mixing = 5,
};

inline std::uint64_t stream_seed(std::uint64_t seed, SeedStream s) {
  return derive_seed(seed, static_cast<std::uint64_t>(s));
}

/// Everything a run needs besides the algorithm parameters.
struct Problem {
  DirectedGraph graph;
  std::shared_ptr<const Objective> objective;
  DenseVector x_star;  // the reference solve for logistic, exact for ridge
  double f_star = 0.0;
};

DirectedGraph graph_from_config(const ExperimentConfig& cfg);
Problem build_problem(const ExperimentConfig& cfg);

SamplingPlan plan_from_config(const ExperimentConfig& cfg);
/// The strategy references the graph (and loads fixed matrices if any).
MixingStrategy strategy_from_config(const ExperimentConfig& cfg,
                                    const DirectedGraph& graph);

/// Resolves "auto" stepsize from the contraction-factor estimate and the
/// closed-form bound; returns the explicit value otherwise. The estimate, if
/// computed, is written to *lambda_out.
double resolve_eta(const ExperimentConfig& cfg, const Problem& problem,
                   double* lambda_out = nullptr);

/// Called after every iteration (and once for the initial state).
using StepObserver = std::function<void(const AlgoState&)>;

/// Full experiment loop: samples the active set and the mixing pair each
/// round, applies the configured algorithm, records metrics at t = 0, every
/// record_every rounds, and at the final round. Deterministic in the seed.
std::vector<MetricsRecord> run_experiment(const ExperimentConfig& cfg);
std::vector<MetricsRecord> run_on(const Problem& problem,
                                  const ExperimentConfig& cfg,
                                  const StepObserver& observer = nullptr);

/// Metrics CSV exactly as documented: header
/// "iter,comm_cost,grad_count,consensus,subopt", full-precision floats.
void write_metrics_csv(const std::string& path,
                       const std::vector<MetricsRecord>& records);
std::vector<MetricsRecord> read_metrics_csv(const std::string& path);

/// Directed non-self transmissions implied by one round's pair: off-diagonal
/// entries that are non-zero in A or in B, counted once per ordered pair.
std::uint64_t comm_links(const MixingPair& pair);

}  // namespace ppds
