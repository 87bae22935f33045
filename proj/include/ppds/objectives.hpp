#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ppds/dense.hpp"

namespace ppds {

struct SmoothnessConstants {
  double L = 0.0;   // smoothness of every local objective
  double mu = 0.0;  // strong convexity of the global average objective
  bool mu_from_regularizer_bound = false;  // true: conservative bound, not eigensolve
};

/// A collection of per-node local objectives f_i. The global objective is
/// f(x) = (1/M) sum_i f_i(x).
class Objective {
 public:
  virtual ~Objective() = default;

  virtual int nodes() const = 0;
  virtual int dim() const = 0;

  virtual double local_value(int node, std::span<const double> x) const = 0;
  /// Analytic gradient of f_node at x into `out` (size dim()).
  virtual void local_gradient(int node, std::span<const double> x,
                              std::span<double> out) const = 0;

  double global_value(std::span<const double> x) const;
  DenseVector global_gradient(std::span<const double> x) const;
  DenseVector local_gradient(int node, std::span<const double> x) const;

  virtual SmoothnessConstants constants() const = 0;
  virtual std::string family() const = 0;
};

/// Per-node ridge regression: f_i(x) = |A_i x - b_i|^2 + lambda_i |x|^2.
class RidgeEnsemble : public Objective {
 public:
  RidgeEnsemble(std::vector<DenseMatrix> features,
                std::vector<DenseVector> labels, std::vector<double> lambdas);

  int nodes() const override { return static_cast<int>(features_.size()); }
  int dim() const override { return features_.front().cols; }
  int n_local() const { return features_.front().rows; }

  using Objective::local_gradient;
  double local_value(int node, std::span<const double> x) const override;
  void local_gradient(int node, std::span<const double> x,
                      std::span<double> out) const override;
  SmoothnessConstants constants() const override;
  std::string family() const override { return "ridge"; }

  const DenseMatrix& features(int node) const { return features_[static_cast<std::size_t>(node)]; }
  const DenseVector& labels(int node) const { return labels_[static_cast<std::size_t>(node)]; }
  double lambda(int node) const { return lambdas_[static_cast<std::size_t>(node)]; }

  /// Unique minimizer of the global objective, from the stationarity system
  /// (sum_i A_i^T A_i + sum_i lambda_i I) x = sum_i A_i^T b_i solved by
  /// Cholesky.
  DenseVector exact_solution() const;

 private:
  std::vector<DenseMatrix> features_;
  std::vector<DenseVector> labels_;
  std::vector<double> lambdas_;
};

/// Per-node multinomial logistic regression with one-hot labels over C
/// classes: f_i(x) = sum_j ce(softmax(W^T a_ij), y_ij) + lambda_i |x|^2,
/// where x is the d x C weight matrix W flattened row-major.
class LogisticEnsemble : public Objective {
 public:
  LogisticEnsemble(std::vector<DenseMatrix> features,
                   std::vector<std::vector<int>> labels, int classes,
                   std::vector<double> lambdas);

  int nodes() const override { return static_cast<int>(features_.size()); }
  int dim() const override { return features_.front().cols * classes_; }
  int feature_dim() const { return features_.front().cols; }
  int classes() const { return classes_; }
  int n_local() const { return features_.front().rows; }

  using Objective::local_gradient;
  double local_value(int node, std::span<const double> x) const override;
  void local_gradient(int node, std::span<const double> x,
                      std::span<double> out) const override;
  // L uses the softmax cross-entropy curvature bound (logit Hessian <= I/2);
  // mu falls back to the regularizer bound and is flagged as such.
  SmoothnessConstants constants() const override;
  std::string family() const override { return "logistic"; }

  const DenseMatrix& features(int node) const { return features_[static_cast<std::size_t>(node)]; }
  const std::vector<int>& labels(int node) const { return labels_[static_cast<std::size_t>(node)]; }
  double lambda(int node) const { return lambdas_[static_cast<std::size_t>(node)]; }

 private:
  std::vector<DenseMatrix> features_;
  std::vector<std::vector<int>> labels_;  // class index per sample
  int classes_;
  std::vector<double> lambdas_;
};

/// Synthetic heterogeneous ridge data: a global ground truth w* ~ N(0, I),
/// per-node models w_i = w* + heterogeneity * delta_i, standard normal
/// features, labels b = a^T w_i + noise * eps, lambda_i = 1/n_local. Fully
/// determined by the seed.
RidgeEnsemble generate_ridge(int nodes, int dim, int n_local,
                             double heterogeneity, double noise,
                             std::uint64_t seed);

/// Synthetic heterogeneous multinomial task: per-node logit models
/// W_i = W* + heterogeneity * Delta_i, standard normal features, labels
/// sampled from softmax(W_i^T a + noise * eps). lambda_i = 1/n_local.
LogisticEnsemble generate_logistic(int nodes, int dim, int classes,
                                   int n_local, double heterogeneity,
                                   double noise, std::uint64_t seed);

/// Gradient descent with backtracking line search on the global objective,
/// used as the suboptimality reference when no closed form exists.
DenseVector reference_minimizer(const Objective& obj, int iterations);

/// Text serialization of an ensemble (schema documented in the README).
void save_ensemble(const std::string& path, const Objective& obj);
std::unique_ptr<Objective> load_ensemble(const std::string& path);

}  // namespace ppds
