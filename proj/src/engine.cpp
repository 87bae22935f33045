#include "ppds/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "ppds/kernels.hpp"
#include "ppds/theory.hpp"

namespace ppds {

namespace {

constexpr double kStochTol = 1e-12;

void require_row_stochastic(const DenseMatrix& a, const char* what) {
  for (int i = 0; i < a.rows; ++i) {
    double sum = 0.0;
    for (int j = 0; j < a.cols; ++j) {
      if (a(i, j) < -kStochTol) {
        throw std::invalid_argument(std::string(what) + ": negative entry");
      }
      sum += a(i, j);
    }
    if (std::fabs(sum - 1.0) > kStochTol) {
      throw std::invalid_argument(std::string(what) +
                                  ": rows do not sum to one");
    }
  }
}

void require_col_stochastic(const DenseMatrix& b, const char* what) {
  for (int j = 0; j < b.cols; ++j) {
    double sum = 0.0;
    for (int i = 0; i < b.rows; ++i) {
      if (b(i, j) < -kStochTol) {
        throw std::invalid_argument(std::string(what) + ": negative entry");
      }
      sum += b(i, j);
    }
    if (std::fabs(sum - 1.0) > kStochTol) {
      throw std::invalid_argument(std::string(what) +
                                  ": columns do not sum to one");
    }
  }
}

}  // namespace

SamplingPlan SamplingPlan::uniform(int node_count, int sample_size) {
  if (sample_size < 1 || sample_size > node_count) {
    throw std::invalid_argument("sampling size must be in [1, node_count]");
  }
  SamplingPlan p;
  p.kind = Kind::UniformWithoutReplacement;
  p.node_count = node_count;
  p.sample_size = sample_size;
  return p;
}

SamplingPlan SamplingPlan::bernoulli(std::vector<double> probs) {
  for (double v : probs) {
    if (!(v > 0.0) || v > 1.0) {
      throw std::invalid_argument(
          "bernoulli sampling probabilities must be in (0, 1]");
    }
  }
  SamplingPlan p;
  p.kind = Kind::Bernoulli;
  p.node_count = static_cast<int>(probs.size());
  p.p = std::move(probs);
  return p;
}

std::vector<int> sample_devices(const SamplingPlan& plan, Rng& rng) {
  if (plan.kind == SamplingPlan::Kind::UniformWithoutReplacement) {
    return rng.sample_without_replacement(plan.node_count, plan.sample_size);
  }
  std::vector<int> active;
  for (int i = 0; i < plan.node_count; ++i) {
    if (rng.uniform() < plan.p[static_cast<std::size_t>(i)]) active.push_back(i);
  }
  return active;
}

AlgoState init_state(const Objective& obj, std::uint64_t seed) {
  const int m = obj.nodes();
  const int d = obj.dim();
  AlgoState s;
  s.X = DenseMatrix(m, d);
  Rng rng(seed);
  for (auto& v : s.X.data) v = rng.normal();
  s.Z = s.X;
  s.Y = DenseMatrix(m, d);
  for (int i = 0; i < m; ++i) {
    obj.local_gradient(i, s.X.row_span(i), s.Y.row_span(i));
  }
  s.grad_table = s.Y;
  s.cum_grads = static_cast<std::uint64_t>(m);
  return s;
}

double mass_residual(const AlgoState& state) {
  const DenseVector ysum = column_sums(state.Y);
  const DenseVector gsum = column_sums(state.grad_table);
  return std::sqrt(dist2_squared(ysum, gsum)) / (1.0 + norm2(gsum));
}

std::uint64_t comm_links(const MixingPair& pair) {
  std::uint64_t n = 0;
  for (int i = 0; i < pair.A.rows; ++i) {
    for (int j = 0; j < pair.A.cols; ++j) {
      if (i != j && (pair.A(i, j) != 0.0 || pair.B(i, j) != 0.0)) ++n;
    }
  }
  return n;
}

namespace {

std::uint64_t comm_links_single(const DenseMatrix& a) {
  std::uint64_t n = 0;
  for (int i = 0; i < a.rows; ++i) {
    for (int j = 0; j < a.cols; ++j) {
      if (i != j && a(i, j) != 0.0) ++n;
    }
  }
  return n;
}

}  // namespace

void ppds_step(AlgoState& state, const MixingPair& pair,
               const std::vector<int>& active, double eta,
               const Objective& obj) {
  const int m = obj.nodes();
  const auto d = static_cast<std::size_t>(obj.dim());
  if (pair.A.rows != m || pair.A.cols != m || pair.B.rows != m ||
      pair.B.cols != m) {
    throw std::invalid_argument("ppds_step: mixing pair has wrong shape");
  }
  require_row_stochastic(pair.A, "ppds_step: A");
  require_col_stochastic(pair.B, "ppds_step: B");
  if (!(eta > 0.0)) throw std::invalid_argument("ppds_step: eta must be positive");

  DenseMatrix yhat = state.Y;
  DenseMatrix xhat = state.X;
  DenseVector g(d), diff(d);
  for (int i : active) {
    obj.local_gradient(i, state.X.row_span(i), g);
    kern::sub(diff.data(), g.data(), state.grad_table.row(i), d);
    kern::add(yhat.row(i), yhat.row(i), diff.data(), d);
    // gradient memory moves to the pre-mixing iterate
    std::memcpy(state.Z.row(i), state.X.row(i), d * sizeof(double));
    std::memcpy(state.grad_table.row(i), g.data(), d * sizeof(double));
  }
  for (int i : active) {
    kern::axpy(xhat.row(i), -eta, yhat.row(i), d);
  }
  state.Y = matmul(pair.B, yhat);
  state.X = matmul(pair.A, xhat);
  state.cum_grads += active.size();
  state.cum_comm += comm_links(pair);
  state.t += 1;
}

void push_pull_step(AlgoState& state, const DenseMatrix& A,
                    const DenseMatrix& B, double eta, const Objective& obj) {
  const int m = obj.nodes();
  const auto d = static_cast<std::size_t>(obj.dim());
  if (A.rows != m || A.cols != m || B.rows != m || B.cols != m) {
    throw std::invalid_argument("push_pull_step: matrices have wrong shape");
  }
  require_row_stochastic(A, "push_pull_step: A");
  require_col_stochastic(B, "push_pull_step: B");
  if (!(eta > 0.0)) throw std::invalid_argument("push_pull_step: eta must be positive");

  DenseMatrix xnew = matmul(A, state.X);
  kern::axpy(xnew.data.data(), -eta, state.Y.data.data(), xnew.data.size());
  DenseMatrix gnew(m, static_cast<int>(d));
  for (int i = 0; i < m; ++i) {
    obj.local_gradient(i, xnew.row_span(i), gnew.row_span(i));
  }
  DenseMatrix ynew = matmul(B, state.Y);
  for (int i = 0; i < m; ++i) {
    DenseVector diff(d);
    kern::sub(diff.data(), gnew.row(i), state.grad_table.row(i), d);
    kern::add(ynew.row(i), ynew.row(i), diff.data(), d);
  }
  state.X = xnew;
  state.Y = ynew;
  state.Z = state.X;
  state.grad_table = gnew;
  state.cum_grads += static_cast<std::uint64_t>(m);
  state.cum_comm += comm_links({A, B});
  state.t += 1;
}

void dgd_step(AlgoState& state, const DenseMatrix& A,
              const std::vector<int>& active, double eta,
              const Objective& obj) {
  const int m = obj.nodes();
  const auto d = static_cast<std::size_t>(obj.dim());
  if (A.rows != m || A.cols != m) {
    throw std::invalid_argument("dgd_step: matrix has wrong shape");
  }
  require_row_stochastic(A, "dgd_step: A");
  if (!(eta > 0.0)) throw std::invalid_argument("dgd_step: eta must be positive");

  DenseMatrix xtmp = state.X;
  DenseVector g(d);
  for (int i : active) {
    obj.local_gradient(i, state.X.row_span(i), g);
    kern::axpy(xtmp.row(i), -eta, g.data(), d);
  }
  state.X = matmul(A, xtmp);
  state.cum_grads += active.size();
  state.cum_comm += comm_links_single(A);
  state.t += 1;
}

SagaState init_saga(const Objective& obj, std::uint64_t seed) {
  const auto d = static_cast<std::size_t>(obj.dim());
  DenseVector x0(d);
  Rng rng(seed);
  for (auto& v : x0) v = rng.normal();
  const int m = obj.nodes();
  DenseMatrix phi(m, static_cast<int>(d));
  for (int i = 0; i < m; ++i) std::memcpy(phi.row(i), x0.data(), d * sizeof(double));
  DenseMatrix grads(m, static_cast<int>(d));
  for (int i = 0; i < m; ++i) obj.local_gradient(i, x0, grads.row_span(i));
  SagaState s = init_saga_from(obj, std::move(x0), std::move(phi), std::move(grads));
  s.cum_grads = static_cast<std::uint64_t>(m);
  return s;
}

SagaState init_saga_from(const Objective& obj, DenseVector x0, DenseMatrix phi,
                         DenseMatrix phi_grads) {
  SagaState s;
  s.x = std::move(x0);
  s.phi = std::move(phi);
  s.phi_grads = std::move(phi_grads);
  s.grad_avg = column_means(s.phi_grads);
  if (s.phi.rows != obj.nodes() || s.phi.cols != obj.dim()) {
    throw std::invalid_argument("init_saga_from: shape mismatch");
  }
  return s;
}

void saga_step(SagaState& state, int sampled, double eta, const Objective& obj) {
  const auto d = static_cast<std::size_t>(obj.dim());
  if (sampled < 0 || sampled >= obj.nodes()) {
    throw std::invalid_argument("saga_step: sampled index out of range");
  }
  DenseVector g(d), est(d), diff(d);
  obj.local_gradient(sampled, state.x, g);
  kern::sub(diff.data(), g.data(), state.phi_grads.row(sampled), d);
  kern::add(est.data(), diff.data(), state.grad_avg.data(), d);
  // table and running average move to the pre-step iterate
  std::memcpy(state.phi.row(sampled), state.x.data(), d * sizeof(double));
  std::memcpy(state.phi_grads.row(sampled), g.data(), d * sizeof(double));
  kern::axpy(state.grad_avg.data(), 1.0 / obj.nodes(), diff.data(), d);
  kern::axpy(state.x.data(), -eta, est.data(), d);
  state.cum_grads += 1;
  state.t += 1;
}

// ---------------------------------------------------------------------------
// experiment loop

DirectedGraph graph_from_config(const ExperimentConfig& cfg) {
  cfg.validate();
  return build_rgg(cfg.graph.M, cfg.graph.radius,
                   stream_seed(cfg.seed, SeedStream::Graph));
}

Problem build_problem(const ExperimentConfig& cfg) {
  cfg.validate();
  Problem p;
  p.graph = graph_from_config(cfg);
  std::shared_ptr<const Objective> obj;
  if (!cfg.objective.data_path.empty()) {
    std::shared_ptr<Objective> loaded = load_ensemble(cfg.objective.data_path);
    if (loaded->nodes() != cfg.graph.M) {
      throw ConfigError("objective.data_path: dataset has " +
                        std::to_string(loaded->nodes()) +
                        " nodes, graph.M is " + std::to_string(cfg.graph.M));
    }
    if (loaded->family() != cfg.objective.family) {
      throw ConfigError("objective.data_path: dataset family '" +
                        loaded->family() + "' does not match objective.family");
    }
    obj = loaded;
  } else if (cfg.objective.family == "ridge") {
    obj = std::make_shared<RidgeEnsemble>(generate_ridge(
        cfg.graph.M, cfg.objective.d, cfg.objective.n_local,
        cfg.objective.heterogeneity, cfg.objective.noise,
        stream_seed(cfg.seed, SeedStream::Data)));
  } else {
    obj = std::make_shared<LogisticEnsemble>(generate_logistic(
        cfg.graph.M, cfg.objective.d, cfg.objective.classes,
        cfg.objective.n_local, cfg.objective.heterogeneity,
        cfg.objective.noise, stream_seed(cfg.seed, SeedStream::Data)));
  }
  p.objective = obj;
  if (auto ridge = std::dynamic_pointer_cast<const RidgeEnsemble>(obj)) {
    p.x_star = ridge->exact_solution();
  } else {
    // no closed form: the reference is the best solution found by a long
    // line-search descent on the global objective
    p.x_star = reference_minimizer(*obj, cfg.objective.ref_iterations);
  }
  p.f_star = obj->global_value(p.x_star);
  return p;
}

SamplingPlan plan_from_config(const ExperimentConfig& cfg) {
  if (cfg.sampling.variant == "uniform") {
    return SamplingPlan::uniform(cfg.graph.M, cfg.sampling.S);
  }
  return SamplingPlan::bernoulli(std::vector<double>(
      static_cast<std::size_t>(cfg.graph.M), cfg.sampling.p));
}

MixingStrategy strategy_from_config(const ExperimentConfig& cfg,
                                    const DirectedGraph& graph) {
  const auto& mx = cfg.mixing;
  if (mx.variant == "broadcast") {
    return MixingStrategy::make_broadcast(graph, mx.targets);
  }
  if (mx.variant == "metropolis_active") {
    return MixingStrategy::make_metropolis_on_active(graph, mx.neighbors);
  }
  if (mx.variant == "mean") {
    return MixingStrategy::make_mean(cfg.graph.M);
  }
  if (mx.variant == "independent_gossip") {
    return MixingStrategy::make_independent_gossip(graph, mx.comm_nodes,
                                                   mx.neighbors);
  }
  if (mx.variant == "fixed") {
    MixingPair pair{load_matrix(mx.A_path), load_matrix(mx.B_path)};
    if (pair.A.rows != cfg.graph.M || pair.A.cols != cfg.graph.M ||
        pair.B.rows != cfg.graph.M || pair.B.cols != cfg.graph.M) {
      throw ConfigError("mixing: fixed matrices must be M x M");
    }
    return MixingStrategy::make_fixed(std::move(pair));
  }
  throw ConfigError("mixing.variant: unknown value '" + mx.variant + "'");
}

double resolve_eta(const ExperimentConfig& cfg, const Problem& problem,
                   double* lambda_out) {
  if (cfg.eta.has_value()) return *cfg.eta;
  if (cfg.sampling.variant != "uniform") {
    throw ConfigError(
        "eta=auto requires uniform sampling (the stepsize bound assumes a "
        "fixed sample size)");
  }
  const SmoothnessConstants c = problem.objective->constants();
  const MixingStrategy strategy = strategy_from_config(cfg, problem.graph);
  const SamplingPlan plan = plan_from_config(cfg);
  constexpr int kAutoLambdaSamples = 100;
  const LambdaEstimate est =
      estimate_lambda(strategy, plan, kAutoLambdaSamples,
                      stream_seed(cfg.seed, SeedStream::Lambda));
  if (lambda_out) *lambda_out = est.lambda_hat;
  if (est.lambda_hat >= 1.0) {
    throw ConfigError(
        "eta=auto: estimated contraction factor is not < 1; set eta "
        "explicitly");
  }
  RateParams params;
  params.mu = c.mu;
  params.L = c.L;
  params.M = cfg.graph.M;
  params.S = cfg.sampling.S;
  params.lambda = est.lambda_hat;
  params.eta = 0.0;
  return stepsize_bound(params);
}

namespace {

MetricsRecord record_network(const AlgoState& state, const Objective& obj,
                             double f_star) {
  MetricsRecord r;
  r.t = state.t;
  r.comm_cost = state.cum_comm;
  r.grad_count = state.cum_grads;
  const DenseVector xbar = column_means(state.X);
  double cons = 0.0, fsum = 0.0;
  for (int i = 0; i < state.X.rows; ++i) {
    cons += dist2_squared(state.X.row_span(i), xbar);
    fsum += obj.global_value(state.X.row_span(i));
  }
  r.consensus = cons / state.X.rows;
  r.subopt = fsum / state.X.rows - f_star;
  return r;
}

}  // namespace

std::vector<MetricsRecord> run_experiment(const ExperimentConfig& cfg) {
  const Problem problem = build_problem(cfg);
  return run_on(problem, cfg);
}

std::vector<MetricsRecord> run_on(const Problem& problem,
                                  const ExperimentConfig& cfg,
                                  const StepObserver& observer) {
  cfg.validate();
  const Objective& obj = *problem.objective;
  const double eta = resolve_eta(cfg, problem);
  const long long iters = cfg.iterations;
  const long long every = cfg.record_every;
  std::vector<MetricsRecord> records;

  if (cfg.algorithm == "saga") {
    if (cfg.sampling.variant != "uniform" || cfg.sampling.S != 1) {
      throw ConfigError("saga requires sampling.variant=uniform with S=1");
    }
    SagaState s = init_saga(obj, stream_seed(cfg.seed, SeedStream::Init));
    const auto rec = [&] {
      records.push_back({s.t, 0, s.cum_grads, 0.0,
                         obj.global_value(s.x) - problem.f_star});
    };
    rec();
    Rng rng_sample(stream_seed(cfg.seed, SeedStream::Sampling));
    const SamplingPlan plan = plan_from_config(cfg);
    for (long long t = 1; t <= iters; ++t) {
      const int i = sample_devices(plan, rng_sample).front();
      saga_step(s, i, eta, obj);
      if (t % every == 0 || t == iters) rec();
    }
    return records;
  }

  AlgoState state = init_state(obj, stream_seed(cfg.seed, SeedStream::Init));
  if (observer) observer(state);
  records.push_back(record_network(state, obj, problem.f_star));

  const SamplingPlan plan = plan_from_config(cfg);
  const MixingStrategy strategy = strategy_from_config(cfg, problem.graph);
  Rng rng_sample(stream_seed(cfg.seed, SeedStream::Sampling));
  Rng rng_mix(stream_seed(cfg.seed, SeedStream::Mixing));
  std::vector<int> all_nodes(static_cast<std::size_t>(obj.nodes()));
  for (int i = 0; i < obj.nodes(); ++i) all_nodes[static_cast<std::size_t>(i)] = i;

  for (long long t = 1; t <= iters; ++t) {
    if (cfg.algorithm == "push_pull") {
      const MixingPair pair = sample_mixing(strategy, all_nodes, rng_mix);
      push_pull_step(state, pair.A, pair.B, eta, obj);
    } else {
      const std::vector<int> active = sample_devices(plan, rng_sample);
      const MixingPair pair = sample_mixing(strategy, active, rng_mix);
      if (cfg.algorithm == "ppds") {
        ppds_step(state, pair, active, eta, obj);
      } else if (cfg.algorithm == "dgd") {
        dgd_step(state, pair.A, active, eta, obj);
      } else {
        throw ConfigError("algorithm: unknown value '" + cfg.algorithm + "'");
      }
    }
    if (observer) observer(state);
    if (t % every == 0 || t == iters) {
      records.push_back(record_network(state, obj, problem.f_star));
    }
  }
  return records;
}

void write_metrics_csv(const std::string& path,
                       const std::vector<MetricsRecord>& records) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  std::fprintf(f, "iter,comm_cost,grad_count,consensus,subopt\n");
  for (const auto& r : records) {
    std::fprintf(f, "%lld,%llu,%llu,%.17g,%.17g\n", r.t,
                 static_cast<unsigned long long>(r.comm_cost),
                 static_cast<unsigned long long>(r.grad_count), r.consensus,
                 r.subopt);
  }
  std::fclose(f);
}

std::vector<MetricsRecord> read_metrics_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open metrics file: " + path);
  std::string line;
  if (!std::getline(in, line) ||
      line != "iter,comm_cost,grad_count,consensus,subopt") {
    throw std::runtime_error("bad metrics header in " + path);
  }
  std::vector<MetricsRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    MetricsRecord r;
    unsigned long long comm = 0, grads = 0;
    if (std::sscanf(line.c_str(), "%lld,%llu,%llu,%lg,%lg", &r.t, &comm,
                    &grads, &r.consensus, &r.subopt) != 5) {
      throw std::runtime_error("bad metrics row in " + path + ": " + line);
    }
    r.comm_cost = comm;
    r.grad_count = grads;
    records.push_back(r);
  }
  return records;
}

}  // namespace ppds
