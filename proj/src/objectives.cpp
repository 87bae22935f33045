#include "ppds/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "ppds/kernels.hpp"
#include "ppds/rng.hpp"

namespace ppds {

double Objective::global_value(std::span<const double> x) const {
  double sum = 0.0;
  for (int i = 0; i < nodes(); ++i) sum += local_value(i, x);
  return sum / nodes();
}

DenseVector Objective::global_gradient(std::span<const double> x) const {
  DenseVector g(x.size(), 0.0), tmp(x.size());
  for (int i = 0; i < nodes(); ++i) {
    local_gradient(i, x, tmp);
    kern::add(g.data(), g.data(), tmp.data(), g.size());
  }
  kern::scale(g.data(), g.data(), 1.0 / nodes(), g.size());
  return g;
}

DenseVector Objective::local_gradient(int node, std::span<const double> x) const {
  DenseVector g(x.size());
  local_gradient(node, x, g);
  return g;
}

// ---------------------------------------------------------------------------
// ridge

RidgeEnsemble::RidgeEnsemble(std::vector<DenseMatrix> features,
                             std::vector<DenseVector> labels,
                             std::vector<double> lambdas)
    : features_(std::move(features)),
      labels_(std::move(labels)),
      lambdas_(std::move(lambdas)) {
  if (features_.empty() || features_.size() != labels_.size() ||
      features_.size() != lambdas_.size()) {
    throw std::invalid_argument("RidgeEnsemble: inconsistent node counts");
  }
  for (std::size_t i = 0; i < features_.size(); ++i) {
    if (features_[i].cols != features_.front().cols ||
        features_[i].rows != static_cast<int>(labels_[i].size())) {
      throw std::invalid_argument("RidgeEnsemble: inconsistent shapes");
    }
    if (!(lambdas_[i] > 0.0)) {
      throw std::invalid_argument("RidgeEnsemble: lambda must be positive");
    }
  }
}

double RidgeEnsemble::local_value(int node, std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim()) {
    throw std::invalid_argument("local_value: dimension mismatch");
  }
  const auto& a = features_[static_cast<std::size_t>(node)];
  DenseVector r = matvec(a, x);
  kern::sub(r.data(), r.data(), labels_[static_cast<std::size_t>(node)].data(),
            r.size());
  return norm2_squared(r) +
         lambdas_[static_cast<std::size_t>(node)] * norm2_squared(x);
}

void RidgeEnsemble::local_gradient(int node, std::span<const double> x,
                                   std::span<double> out) const {
  if (static_cast<int>(x.size()) != dim() || out.size() != x.size()) {
    throw std::invalid_argument("local_gradient: dimension mismatch");
  }
  const auto& a = features_[static_cast<std::size_t>(node)];
  DenseVector r = matvec(a, x);
  kern::sub(r.data(), r.data(), labels_[static_cast<std::size_t>(node)].data(),
            r.size());
  const DenseVector atr = matvec_transposed(a, r);
  kern::scale(out.data(), atr.data(), 2.0, out.size());
  kern::axpy(out.data(), 2.0 * lambdas_[static_cast<std::size_t>(node)],
             x.data(), out.size());
}

DenseVector RidgeEnsemble::exact_solution() const {
  const int d = dim();
  DenseMatrix h(d, d, 0.0);
  DenseVector rhs(static_cast<std::size_t>(d), 0.0);
  double lam_sum = 0.0;
  for (int i = 0; i < nodes(); ++i) {
    const auto& a = features_[static_cast<std::size_t>(i)];
    const DenseMatrix gram = matmul(transpose(a), a);
    kern::add(h.data.data(), h.data.data(), gram.data.data(), h.data.size());
    const DenseVector atb =
        matvec_transposed(a, labels_[static_cast<std::size_t>(i)]);
    kern::add(rhs.data(), rhs.data(), atb.data(), rhs.size());
    lam_sum += lambdas_[static_cast<std::size_t>(i)];
  }
  for (int k = 0; k < d; ++k) h(k, k) += lam_sum;
  return solve_spd(h, rhs);
}

SmoothnessConstants RidgeEnsemble::constants() const {
  const int d = dim();
  double lmax = 0.0;
  DenseMatrix h(d, d, 0.0);
  double lam_sum = 0.0;
  for (int i = 0; i < nodes(); ++i) {
    const auto& a = features_[static_cast<std::size_t>(i)];
    const DenseMatrix gram = matmul(transpose(a), a);
    const SpectralResult sr = spectral_radius_symmetric(gram);
    lmax = std::max(lmax, 2.0 * sr.value +
                              2.0 * lambdas_[static_cast<std::size_t>(i)]);
    kern::add(h.data.data(), h.data.data(), gram.data.data(), h.data.size());
    lam_sum += lambdas_[static_cast<std::size_t>(i)];
  }
  for (int k = 0; k < d; ++k) h(k, k) += lam_sum;
  kern::scale(h.data.data(), h.data.data(), 2.0 / nodes(), h.data.size());

  // smallest Hessian eigenvalue by inverse power iteration, with the
  // regularizer lower bound as the flagged fallback
  SmoothnessConstants c;
  c.L = lmax;
  const double mu_floor = 2.0 * lam_sum / nodes();
  DenseVector v(static_cast<std::size_t>(d), 1.0 / std::sqrt(static_cast<double>(d)));
  double est = 0.0;
  bool converged = false;
  for (int it = 0; it < 200 && !converged; ++it) {
    DenseVector w = solve_spd(h, v);
    const double nw = norm2(w);
    kern::scale(v.data(), w.data(), 1.0 / nw, v.size());
    const DenseVector hv = matvec(h, v);
    const double r = kern::dot(v.data(), hv.data(), v.size());
    if (it > 0 && std::fabs(r - est) <= 1e-10 * std::max(1.0, std::fabs(r))) {
      converged = true;
    }
    est = r;
  }
  if (converged && est > 0.0) {
    c.mu = std::min(est, c.L);
    c.mu_from_regularizer_bound = false;
  } else {
    c.mu = mu_floor;
    c.mu_from_regularizer_bound = true;
  }
  return c;
}

// ---------------------------------------------------------------------------
// multinomial logistic

LogisticEnsemble::LogisticEnsemble(std::vector<DenseMatrix> features,
                                   std::vector<std::vector<int>> labels,
                                   int classes, std::vector<double> lambdas)
    : features_(std::move(features)),
      labels_(std::move(labels)),
      classes_(classes),
      lambdas_(std::move(lambdas)) {
  if (features_.empty() || features_.size() != labels_.size() ||
      features_.size() != lambdas_.size() || classes_ < 2) {
    throw std::invalid_argument("LogisticEnsemble: inconsistent construction");
  }
  for (std::size_t i = 0; i < features_.size(); ++i) {
    if (features_[i].cols != features_.front().cols ||
        features_[i].rows != static_cast<int>(labels_[i].size())) {
      throw std::invalid_argument("LogisticEnsemble: inconsistent shapes");
    }
    for (int y : labels_[i]) {
      if (y < 0 || y >= classes_) {
        throw std::invalid_argument("LogisticEnsemble: label out of range");
      }
    }
    if (!(lambdas_[i] > 0.0)) {
      throw std::invalid_argument("LogisticEnsemble: lambda must be positive");
    }
  }
}

namespace {

// logits of one sample: l_c = sum_k a_k * x[k*C + c]
void sample_logits(std::span<const double> x, const double* a, int d, int c,
                   double* logits) {
  std::fill(logits, logits + c, 0.0);
  for (int k = 0; k < d; ++k) {
    kern::axpy(logits, a[k], x.data() + static_cast<std::size_t>(k) * c,
               static_cast<std::size_t>(c));
  }
}

double log_sum_exp(const double* logits, int c) {
  double mx = logits[0];
  for (int i = 1; i < c; ++i) mx = std::max(mx, logits[i]);
  double s = 0.0;
  for (int i = 0; i < c; ++i) s += std::exp(logits[i] - mx);
  return mx + std::log(s);
}

}  // namespace

double LogisticEnsemble::local_value(int node, std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim()) {
    throw std::invalid_argument("local_value: dimension mismatch");
  }
  const auto& a = features_[static_cast<std::size_t>(node)];
  const auto& y = labels_[static_cast<std::size_t>(node)];
  const int d = a.cols;
  std::vector<double> logits(static_cast<std::size_t>(classes_));
  double loss = 0.0;
  for (int j = 0; j < a.rows; ++j) {
    sample_logits(x, a.row(j), d, classes_, logits.data());
    loss += log_sum_exp(logits.data(), classes_) -
            logits[static_cast<std::size_t>(y[static_cast<std::size_t>(j)])];
  }
  return loss + lambdas_[static_cast<std::size_t>(node)] * norm2_squared(x);
}

void LogisticEnsemble::local_gradient(int node, std::span<const double> x,
                                      std::span<double> out) const {
  if (static_cast<int>(x.size()) != dim() || out.size() != x.size()) {
    throw std::invalid_argument("local_gradient: dimension mismatch");
  }
  const auto& a = features_[static_cast<std::size_t>(node)];
  const auto& y = labels_[static_cast<std::size_t>(node)];
  const int d = a.cols;
  std::fill(out.begin(), out.end(), 0.0);
  std::vector<double> p(static_cast<std::size_t>(classes_));
  for (int j = 0; j < a.rows; ++j) {
    const double* arow = a.row(j);
    sample_logits(x, arow, d, classes_, p.data());
    const double lse = log_sum_exp(p.data(), classes_);
    for (int c = 0; c < classes_; ++c) {
      p[static_cast<std::size_t>(c)] =
          std::exp(p[static_cast<std::size_t>(c)] - lse);
    }
    p[static_cast<std::size_t>(y[static_cast<std::size_t>(j)])] -= 1.0;
    for (int k = 0; k < d; ++k) {
      kern::axpy(out.data() + static_cast<std::size_t>(k) * classes_, arow[k],
                 p.data(), static_cast<std::size_t>(classes_));
    }
  }
  kern::axpy(out.data(), 2.0 * lambdas_[static_cast<std::size_t>(node)],
             x.data(), out.size());
}

SmoothnessConstants LogisticEnsemble::constants() const {
  SmoothnessConstants c;
  double lam_sum = 0.0;
  for (int i = 0; i < nodes(); ++i) {
    const auto& a = features_[static_cast<std::size_t>(i)];
    const DenseMatrix gram = matmul(transpose(a), a);
    const SpectralResult sr = spectral_radius_symmetric(gram);
    c.L = std::max(c.L, 0.5 * sr.value +
                            2.0 * lambdas_[static_cast<std::size_t>(i)]);
    lam_sum += lambdas_[static_cast<std::size_t>(i)];
  }
  c.mu = 2.0 * lam_sum / nodes();
  c.mu_from_regularizer_bound = true;
  return c;
}

// ---------------------------------------------------------------------------
// generators

RidgeEnsemble generate_ridge(int nodes, int dim, int n_local,
                             double heterogeneity, double noise,
                             std::uint64_t seed) {
  if (nodes < 1 || dim < 1 || n_local < 1) {
    throw std::invalid_argument("generate_ridge: counts must be >= 1");
  }
  Rng rng(seed);
  DenseVector w_star(static_cast<std::size_t>(dim));
  for (auto& v : w_star) v = rng.normal();

  std::vector<DenseMatrix> features;
  std::vector<DenseVector> labels;
  std::vector<double> lambdas(static_cast<std::size_t>(nodes),
                              1.0 / n_local);
  features.reserve(static_cast<std::size_t>(nodes));
  labels.reserve(static_cast<std::size_t>(nodes));
  for (int i = 0; i < nodes; ++i) {
    DenseVector wi = w_star;
    for (auto& v : wi) v += heterogeneity * rng.normal();
    DenseMatrix a(n_local, dim);
    for (auto& v : a.data) v = rng.normal();
    DenseVector b(static_cast<std::size_t>(n_local));
    for (int j = 0; j < n_local; ++j) {
      b[static_cast<std::size_t>(j)] =
          kern::dot(a.row(j), wi.data(), wi.size()) + noise * rng.normal();
    }
    features.push_back(std::move(a));
    labels.push_back(std::move(b));
  }
  return {std::move(features), std::move(labels), std::move(lambdas)};
}

LogisticEnsemble generate_logistic(int nodes, int dim, int classes,
                                   int n_local, double heterogeneity,
                                   double noise, std::uint64_t seed) {
  if (nodes < 1 || dim < 1 || n_local < 1 || classes < 2) {
    throw std::invalid_argument("generate_logistic: bad dimensions");
  }
  Rng rng(seed);
  const auto wdim = static_cast<std::size_t>(dim) * classes;
  DenseVector w_star(wdim);
  for (auto& v : w_star) v = rng.normal();

  std::vector<DenseMatrix> features;
  std::vector<std::vector<int>> labels;
  std::vector<double> lambdas(static_cast<std::size_t>(nodes), 1.0 / n_local);
  std::vector<double> logits(static_cast<std::size_t>(classes));
  for (int i = 0; i < nodes; ++i) {
    DenseVector wi = w_star;
    for (auto& v : wi) v += heterogeneity * rng.normal();
    DenseMatrix a(n_local, dim);
    for (auto& v : a.data) v = rng.normal();
    std::vector<int> y(static_cast<std::size_t>(n_local));
    for (int j = 0; j < n_local; ++j) {
      sample_logits(wi, a.row(j), dim, classes, logits.data());
      for (auto& l : logits) l += noise * rng.normal();
      const double lse = log_sum_exp(logits.data(), classes);
      // sample the label from the softmax distribution
      const double u = rng.uniform();
      double acc = 0.0;
      int picked = classes - 1;
      for (int c = 0; c < classes; ++c) {
        acc += std::exp(logits[static_cast<std::size_t>(c)] - lse);
        if (u < acc) {
          picked = c;
          break;
        }
      }
      y[static_cast<std::size_t>(j)] = picked;
    }
    features.push_back(std::move(a));
    labels.push_back(std::move(y));
  }
  return {std::move(features), std::move(labels), classes, std::move(lambdas)};
}

DenseVector reference_minimizer(const Objective& obj, int iterations) {
  DenseVector x(static_cast<std::size_t>(obj.dim()), 0.0);
  double f = obj.global_value(x);
  double step = 1.0;
  DenseVector trial(x.size());
  for (int it = 0; it < iterations; ++it) {
    const DenseVector g = obj.global_gradient(x);
    const double g2 = norm2_squared(g);
    if (g2 <= 1e-26 * (1.0 + norm2_squared(x))) break;
    step *= 2.0;  // warm start from the last accepted step
    double f_trial = 0.0;
    for (int half = 0; half < 60; ++half) {
      kern::scale(trial.data(), g.data(), -step, trial.size());
      kern::add(trial.data(), trial.data(), x.data(), trial.size());
      f_trial = obj.global_value(trial);
      if (f_trial <= f - 0.5 * step * g2) break;
      step *= 0.5;
    }
    if (f_trial >= f) break;  // no progress at any step size
    x = trial;
    f = f_trial;
  }
  return x;
}

// ---------------------------------------------------------------------------
// serialization

void save_ensemble(const std::string& path, const Objective& obj) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  std::fprintf(f, "ppds-dataset v1\n");
  std::fprintf(f, "family %s\n", obj.family().c_str());
  if (obj.family() == "ridge") {
    const auto& r = dynamic_cast<const RidgeEnsemble&>(obj);
    std::fprintf(f, "nodes %d\ndim %d\nn_local %d\n", r.nodes(), r.dim(),
                 r.n_local());
    for (int i = 0; i < r.nodes(); ++i) {
      std::fprintf(f, "node %d\nlambda %.17g\n", i, r.lambda(i));
      const auto& a = r.features(i);
      for (int j = 0; j < a.rows; ++j) {
        for (int k = 0; k < a.cols; ++k) {
          std::fprintf(f, "%.17g%c", a(j, k), k + 1 == a.cols ? '\n' : ' ');
        }
      }
      std::fprintf(f, "labels");
      for (double b : r.labels(i)) std::fprintf(f, " %.17g", b);
      std::fprintf(f, "\n");
    }
  } else {
    const auto& l = dynamic_cast<const LogisticEnsemble&>(obj);
    std::fprintf(f, "nodes %d\ndim %d\nn_local %d\nclasses %d\n", l.nodes(),
                 l.feature_dim(), l.n_local(), l.classes());
    for (int i = 0; i < l.nodes(); ++i) {
      std::fprintf(f, "node %d\nlambda %.17g\n", i, l.lambda(i));
      const auto& a = l.features(i);
      for (int j = 0; j < a.rows; ++j) {
        for (int k = 0; k < a.cols; ++k) {
          std::fprintf(f, "%.17g%c", a(j, k), k + 1 == a.cols ? '\n' : ' ');
        }
      }
      std::fprintf(f, "labels");
      for (int y : l.labels(i)) std::fprintf(f, " %d", y);
      std::fprintf(f, "\n");
    }
  }
  std::fclose(f);
}

namespace {

void expect_token(std::ifstream& in, const std::string& want,
                  const std::string& path) {
  std::string got;
  if (!(in >> got) || got != want) {
    throw std::runtime_error("malformed dataset file " + path + ": expected '" +
                             want + "', got '" + got + "'");
  }
}

}  // namespace

std::unique_ptr<Objective> load_ensemble(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);
  expect_token(in, "ppds-dataset", path);
  expect_token(in, "v1", path);
  expect_token(in, "family", path);
  std::string family;
  in >> family;
  expect_token(in, "nodes", path);
  int nodes = 0;
  in >> nodes;
  expect_token(in, "dim", path);
  int dim = 0;
  in >> dim;
  expect_token(in, "n_local", path);
  int n_local = 0;
  in >> n_local;
  int classes = 0;
  if (family == "logistic") {
    expect_token(in, "classes", path);
    in >> classes;
  } else if (family != "ridge") {
    throw std::runtime_error("unknown dataset family: " + family);
  }
  if (!in || nodes < 1 || dim < 1 || n_local < 1) {
    throw std::runtime_error("malformed dataset header in " + path);
  }

  std::vector<DenseMatrix> features;
  std::vector<DenseVector> ridge_labels;
  std::vector<std::vector<int>> logi_labels;
  std::vector<double> lambdas;
  for (int i = 0; i < nodes; ++i) {
    expect_token(in, "node", path);
    int idx = 0;
    in >> idx;
    expect_token(in, "lambda", path);
    double lam = 0.0;
    in >> lam;
    DenseMatrix a(n_local, dim);
    for (auto& v : a.data) in >> v;
    expect_token(in, "labels", path);
    if (family == "ridge") {
      DenseVector b(static_cast<std::size_t>(n_local));
      for (auto& v : b) in >> v;
      ridge_labels.push_back(std::move(b));
    } else {
      std::vector<int> y(static_cast<std::size_t>(n_local));
      for (auto& v : y) in >> v;
      logi_labels.push_back(std::move(y));
    }
    if (!in) throw std::runtime_error("truncated dataset file: " + path);
    features.push_back(std::move(a));
    lambdas.push_back(lam);
  }
  if (family == "ridge") {
    return std::make_unique<RidgeEnsemble>(std::move(features),
                                           std::move(ridge_labels),
                                           std::move(lambdas));
  }
  return std::make_unique<LogisticEnsemble>(std::move(features),
                                            std::move(logi_labels), classes,
                                            std::move(lambdas));
}

}  // namespace ppds
