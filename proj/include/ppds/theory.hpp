#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "ppds/dense.hpp"
#include "ppds/engine.hpp"
#include "ppds/mixing.hpp"
#include "ppds/objectives.hpp"

namespace ppds {

/// Parameters of the explicit linear-rate analysis for doubly stochastic
/// mixing and uniform sampling of S out of M nodes.
struct RateParams {
  double mu = 0.0;      // strong convexity of the global objective
  double L = 0.0;       // smoothness of every local objective
  int M = 0;            // node count
  int S = 0;            // sampled nodes per round
  double lambda = 0.0;  // mixing contraction factor, in [0, 1)
  double eta = 0.0;     // stepsize

  void check() const;  // throws on invariant violations (eta not required)
};

struct LambdaEstimate {
  double lambda_hat = 0.0;
  double stderr_ = 0.0;
  int samples = 0;
};

/// Monte-Carlo estimate of the contraction factor
///   lambda = max( rho(E[A^T (I-J) A]), rho(E[B^T (I-J) B]) ).
/// The matrices are averaged over n_samples i.i.d. draws first (active set,
/// then pair), then one spectral radius is taken per side. Every drawn pair
/// must be doubly stochastic (the quantity is only meaningful then); a draw
/// that is not raises an error. The standard error comes from batch means
/// over 10 batches.
LambdaEstimate estimate_lambda(const MixingStrategy& strategy,
                               const SamplingPlan& plan, int n_samples,
                               std::uint64_t seed);

/// The stepsize admissibility threshold
///   min( (1-l)^2/(14 L) sqrt(M/S),
///        (1-l)^2/(2304 L) (M/S)^{3/2},
///        1/(576 L) sqrt(M/S) ).
double stepsize_bound(const RateParams& params);

/// Per-iteration contraction factor of the certified linear rate:
///   rho = max(1 - eta mu S / (2M), 1 - S/(4M)).
double convergence_rate(const RateParams& params);

/// Order-level iteration count to reach accuracy eps with a tuned stepsize:
///   ( (L/mu) sqrt(M/S) / (1-l)^2 + M/S ) log(1/eps), no hidden constants.
double iteration_complexity(const RateParams& params, double eps);

/// The coupled recurrence u_{t+1} <= Q u_t + e_t q over the tracked
/// quantities [distance^2 to the optimum, X-dispersion, Y-dispersion,
/// gradient-memory error], plus the positive weight vector v certifying the
/// contraction of v^T u.
struct RecurrenceSystem {
  DenseMatrix Q;          // 4x4
  std::array<double, 4> q{};
  std::array<double, 4> v{};
  double rho = 0.0;
};

RecurrenceSystem build_recurrence_system(const RateParams& params);

struct LyapunovCertificate {
  bool vQ_le_rho_v = false;   // (v^T Q)_j <= rho v_j for all j
  bool vq_nonpositive = false;  // v^T q <= 0
  // margins[0..3] = rho v_j - (v^T Q)_j, margins[4] = -v^T q
  std::array<double, 5> margins{};
  bool passed() const { return vQ_le_rho_v && vq_nonpositive; }
};

/// Numerically re-derives the Lyapunov contraction: with v and Q from
/// build_recurrence_system, checks v^T Q <= rho v entrywise and v^T q <= 0.
LyapunovCertificate lyapunov_check(const RateParams& params);

/// Pointwise (per-realization) forms of the three smoothness inequalities
/// used by the recurrence, evaluated at a concrete iterate:
///   (a) |∇F(X) - ∇F(1 x*ᵀ)|² <= 2L² Xd + 4 M L e
///   (b) |∇F(X) - ∇F(Z)|²     <= 4L² Xd + 8 M L e + 2 H
///   (c) |G|²                 <= 10L² Xd + 20 M L e + 4 H + 2 Yd
/// with Xd = |X - 1 x̄ᵀ|², Yd = |Y - 1 ȳᵀ|² for Y = G - ∇F(X) + ∇F(Z),
/// H = Σ_i |∇f_i(z_i) - ∇f_i(x*)|², e = f(x̄) - f(x*).
struct GradientBoundReport {
  std::array<double, 3> lhs{};
  std::array<double, 3> rhs{};
  std::array<double, 3> slack_rel{};  // (rhs - lhs) / max(1, rhs)
  double min_slack_rel() const;
};

GradientBoundReport check_gradient_bounds(const DenseMatrix& X, const DenseMatrix& Z,
                                    const DenseMatrix& G, const Objective& obj,
                                    std::span<const double> x_star,
                                    const SmoothnessConstants& constants);

struct RateFit {
  double slope = 0.0;  // log10(subopt) change per iteration
  double r2 = 0.0;
  bool below_floor = false;  // no positive suboptimality left in the tail
};

/// Least-squares fit of log10(subopt) against iteration over the final
/// tail_fraction of a metrics series. Records with non-positive suboptimality
/// are skipped; if fewer than two remain the fit reports below_floor.
RateFit empirical_rate(std::span<const MetricsRecord> series,
                       double tail_fraction);

}  // namespace ppds
