#include "ppds/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <set>
#include <thread>

#include "ppds/engine.hpp"

namespace ppds {

namespace {

// Shared wrapper: ConfigError (and invariant violations) -> 1, rest -> 2.
template <typename Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfigError;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntimeError;
  }
}

}  // namespace

int cmd_run(const ExperimentConfig& cfg, const std::string& export_graph,
            const std::string& export_data) {
  return guarded([&] {
    cfg.validate();
    const Problem problem = build_problem(cfg);
    if (!export_graph.empty()) save_edge_list(export_graph, problem.graph);
    if (!export_data.empty()) save_ensemble(export_data, *problem.objective);

    ExperimentConfig effective = cfg;
    double lambda_hat = std::nan("");
    if (!cfg.eta.has_value()) {
      effective.eta = resolve_eta(cfg, problem, &lambda_hat);
    }
    const std::vector<MetricsRecord> records = run_on(problem, effective);
    write_metrics_csv(effective.output, records);

    std::printf("algorithm=%s\n", cfg.algorithm.c_str());
    std::printf("eta=%.17g%s\n", *effective.eta,
                cfg.eta.has_value() ? "" : " (auto)");
    if (!std::isnan(lambda_hat)) std::printf("lambda_hat=%.17g\n", lambda_hat);
    const MetricsRecord& last = records.back();
    std::printf("iterations=%lld\n", last.t);
    std::printf("final_consensus=%.17g\n", last.consensus);
    std::printf("final_subopt=%.17g\n", last.subopt);
    std::printf("comm_cost=%llu\n", static_cast<unsigned long long>(last.comm_cost));
    std::printf("grad_count=%llu\n", static_cast<unsigned long long>(last.grad_count));
    std::printf("wrote %s\n", effective.output.c_str());
    return kExitOk;
  });
}

namespace {

struct SweepPoint {
  double value = 0.0;
  ExperimentConfig cfg;
  std::vector<MetricsRecord> records;
};

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

ExperimentConfig point_config(const ExperimentConfig& base,
                              const std::string& axis, double value,
                              const std::string& out_base) {
  ExperimentConfig cfg = base;
  if (axis == "stepsize-grid") {
    cfg.eta = value;
  } else if (axis == "sample-size") {
    const int s = static_cast<int>(std::llround(value));
    if (std::fabs(value - s) > 1e-9) {
      throw ConfigError("sample-size sweep values must be integers");
    }
    cfg.sampling.S = s;
  } else if (axis == "mixing-degree") {
    const int k = static_cast<int>(std::llround(value));
    if (std::fabs(value - k) > 1e-9) {
      throw ConfigError("mixing-degree sweep values must be integers");
    }
    if (cfg.mixing.variant == "broadcast") {
      cfg.mixing.targets = k;
    } else if (cfg.mixing.variant == "metropolis_active" ||
               cfg.mixing.variant == "independent_gossip") {
      cfg.mixing.neighbors = k;
    } else {
      throw ConfigError("mixing-degree sweep needs a degree-parameterized "
                        "mixing.variant (broadcast, metropolis_active, "
                        "independent_gossip)");
    }
  } else {
    throw ConfigError("sweep axis: unknown value '" + axis + "'");
  }
  cfg.output = out_base + "_" + axis + "_" + format_value(value) + ".csv";
  return cfg;
}

// Each point owns its config and output file; workers pull indices off a
// shared counter. Results land in the pre-sized vector, so the summary is
// written in a fixed order regardless of scheduling.
void run_points(std::vector<SweepPoint>& points, int jobs) {
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mu;
  const auto worker = [&] {
    for (;;) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= points.size() || failed.load()) return;
      try {
        points[idx].records = run_experiment(points[idx].cfg);
        write_metrics_csv(points[idx].cfg.output, points[idx].records);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };
  const int n_threads = std::max(1, std::min<int>(jobs, static_cast<int>(points.size())));
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(n_threads));
  for (int i = 0; i < n_threads; ++i) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

constexpr double kThresholds[3] = {1e-2, 1e-3, 1e-4};

// first-crossing costs; -1 when the run never reaches the threshold
void crossing_costs(const std::vector<MetricsRecord>& records, double threshold,
                    long long* comm, long long* grads) {
  for (const auto& r : records) {
    if (r.subopt <= threshold) {
      *comm = static_cast<long long>(r.comm_cost);
      *grads = static_cast<long long>(r.grad_count);
      return;
    }
  }
  *comm = -1;
  *grads = -1;
}

void write_summary(const std::string& path, const std::vector<SweepPoint>& points) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  std::fprintf(f,
               "value,final_subopt,comm_to_1e-2,grads_to_1e-2,comm_to_1e-3,"
               "grads_to_1e-3,comm_to_1e-4,grads_to_1e-4\n");
  for (const auto& p : points) {
    std::fprintf(f, "%.17g,%.17g", p.value, p.records.back().subopt);
    for (double thr : kThresholds) {
      long long comm = 0, grads = 0;
      crossing_costs(p.records, thr, &comm, &grads);
      std::fprintf(f, ",%lld,%lld", comm, grads);
    }
    std::fprintf(f, "\n");
  }
  std::fclose(f);
}

std::size_t best_point(const std::vector<SweepPoint>& points) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (points[i].records.back().subopt < points[best].records.back().subopt) {
      best = i;
    }
  }
  return best;
}

}  // namespace

int cmd_sweep(const ExperimentConfig& base, const SweepOptions& opts) {
  return guarded([&] {
    base.validate();
    std::vector<SweepPoint> points;
    const auto add_values = [&](const std::vector<double>& values) {
      std::set<double> seen;
      for (const auto& p : points) seen.insert(p.value);
      for (double v : values) {
        if (seen.insert(v).second) {
          points.push_back({v, point_config(base, opts.axis, v, opts.out_base), {}});
        }
      }
    };

    if (opts.axis == "stepsize-grid" && opts.values.empty()) {
      // coarse-to-fine protocol: powers of ten first, then a factor-of-two
      // refinement around the best coarse stepsize
      add_values({1e-2, 1e-3, 1e-4, 1e-5});
      run_points(points, opts.jobs);
      const double eta1 = points[best_point(points)].value;
      add_values({eta1 * 0.25, eta1 * 0.5, eta1, eta1 * 2.0, eta1 * 4.0});
      std::vector<SweepPoint> refine;
      for (auto& p : points) {
        if (p.records.empty()) refine.push_back(std::move(p));
      }
      run_points(refine, opts.jobs);
      std::erase_if(points, [](const SweepPoint& p) { return p.records.empty(); });
      for (auto& p : refine) points.push_back(std::move(p));
    } else {
      if (opts.values.empty()) {
        throw ConfigError("sweep: no values given for axis " + opts.axis);
      }
      add_values(opts.values);
      run_points(points, opts.jobs);
    }

    std::sort(points.begin(), points.end(),
              [](const SweepPoint& a, const SweepPoint& b) { return a.value < b.value; });
    const std::string summary_path = opts.out_base + "_summary.csv";
    write_summary(summary_path, points);

    for (const auto& p : points) {
      std::printf("value=%.17g final_subopt=%.17g out=%s\n", p.value,
                  p.records.back().subopt, p.cfg.output.c_str());
    }
    const auto best = best_point(points);
    std::printf("best_value=%.17g best_final_subopt=%.17g\n",
                points[best].value, points[best].records.back().subopt);
    std::printf("wrote %s\n", summary_path.c_str());
    return kExitOk;
  });
}

int cmd_rate(const RateOptions& opts) {
  return guarded([&] {
    RateParams params = opts.params;
    params.check();
    const double bound = stepsize_bound(params);
    if (opts.eta_auto) params.eta = bound;
    if (!(params.eta > 0.0)) {
      throw ConfigError("rate: eta must be positive or --eta auto");
    }
    const double rho = convergence_rate(params);
    const double complexity = iteration_complexity(params, opts.eps);
    const LyapunovCertificate cert = lyapunov_check(params);

    if (params.eta > bound) {
      std::printf("warning: eta=%.17g exceeds stepsize_bound=%.17g; the rate "
                  "certificate below may fail\n",
                  params.eta, bound);
    }
    std::printf("mu=%.17g\n", params.mu);
    std::printf("L=%.17g\n", params.L);
    std::printf("M=%d\n", params.M);
    std::printf("S=%d\n", params.S);
    std::printf("lambda=%.17g\n", params.lambda);
    std::printf("eta=%.17g\n", params.eta);
    std::printf("stepsize_bound=%.17g\n", bound);
    std::printf("rho=%.17g\n", rho);
    std::printf("eps=%.17g\n", opts.eps);
    std::printf("iteration_complexity=%.17g\n", complexity);
    std::printf("lyapunov_vQ_le_rho_v=%s\n", cert.vQ_le_rho_v ? "true" : "false");
    std::printf("lyapunov_vq_nonpositive=%s\n", cert.vq_nonpositive ? "true" : "false");
    const char* margin_names[5] = {"margin_distance", "margin_x_dispersion",
                                   "margin_y_dispersion", "margin_memory",
                                   "margin_bias"};
    for (int i = 0; i < 5; ++i) {
      std::printf("%s=%.17g\n", margin_names[i], cert.margins[static_cast<std::size_t>(i)]);
    }
    if (!opts.csv_out.empty()) {
      std::FILE* f = std::fopen(opts.csv_out.c_str(), "w");
      if (!f) throw std::runtime_error("cannot open for writing: " + opts.csv_out);
      std::fprintf(f, "key,value\n");
      std::fprintf(f, "mu,%.17g\nL,%.17g\nM,%d\nS,%d\nlambda,%.17g\neta,%.17g\n",
                   params.mu, params.L, params.M, params.S, params.lambda, params.eta);
      std::fprintf(f, "stepsize_bound,%.17g\nrho,%.17g\neps,%.17g\niteration_complexity,%.17g\n",
                   bound, rho, opts.eps, complexity);
      std::fprintf(f, "lyapunov_vQ_le_rho_v,%d\nlyapunov_vq_nonpositive,%d\n",
                   cert.vQ_le_rho_v ? 1 : 0, cert.vq_nonpositive ? 1 : 0);
      for (int i = 0; i < 5; ++i) {
        std::fprintf(f, "%s,%.17g\n", margin_names[i], cert.margins[static_cast<std::size_t>(i)]);
      }
      std::fclose(f);
    }
    return kExitOk;
  });
}

int cmd_lambda(const ExperimentConfig& cfg, const LambdaOptions& opts) {
  return guarded([&] {
    cfg.validate();
    if (opts.samples < 1) throw ConfigError("lambda: samples must be >= 1");
    const DirectedGraph graph = graph_from_config(cfg);
    const MixingStrategy strategy = strategy_from_config(cfg, graph);
    const SamplingPlan plan = plan_from_config(cfg);
    const LambdaEstimate est = estimate_lambda(
        strategy, plan, opts.samples, stream_seed(cfg.seed, SeedStream::Lambda));
    std::printf("lambda=%.17g\n", est.lambda_hat);
    std::printf("stderr=%.17g\n", est.stderr_);
    std::printf("samples=%d\n", est.samples);
    if (!opts.csv_out.empty()) {
      std::FILE* f = std::fopen(opts.csv_out.c_str(), "w");
      if (!f) throw std::runtime_error("cannot open for writing: " + opts.csv_out);
      std::fprintf(f, "key,value\nlambda,%.17g\nstderr,%.17g\nsamples,%d\n",
                   est.lambda_hat, est.stderr_, est.samples);
      std::fclose(f);
    }
    return kExitOk;
  });
}

int cmd_validate(const ExperimentConfig& cfg, int samples,
                 const std::string& export_graph) {
  return guarded([&] {
    cfg.validate();
    if (samples < 1) throw ConfigError("validate: samples must be >= 1");
    const DirectedGraph graph = graph_from_config(cfg);
    if (!export_graph.empty()) save_edge_list(export_graph, graph);
    const bool connected = is_strongly_connected(graph);
    std::printf("graph_M=%d\n", graph.node_count());
    std::printf("graph_edges=%zu\n", graph.edge_count());
    std::printf("strongly_connected=%s\n", connected ? "true" : "false");

    const MixingStrategy strategy = strategy_from_config(cfg, graph);
    const SamplingPlan plan = plan_from_config(cfg);
    Rng rng_sample(stream_seed(cfg.seed, SeedStream::Sampling));
    Rng rng_mix(stream_seed(cfg.seed, SeedStream::Mixing));

    bool row_a = true, col_b = true, compat = true, doubly = true;
    double min_diag_a = 1.0, min_diag_b = 1.0;
    for (int s = 0; s < samples; ++s) {
      const std::vector<int> active = sample_devices(plan, rng_sample);
      const MixingPair pair = sample_mixing(strategy, active, rng_mix);
      const MixingReport rep = validate_mixing(pair, graph, 0.0);
      row_a = row_a && rep.row_stochastic_A;
      col_b = col_b && rep.col_stochastic_B;
      compat = compat && rep.graph_compatible;
      doubly = doubly && rep.doubly_stochastic_A && rep.doubly_stochastic_B;
      min_diag_a = std::min(min_diag_a, rep.min_diag_A);
      min_diag_b = std::min(min_diag_b, rep.min_diag_B);
    }
    std::printf("samples=%d\n", samples);
    std::printf("row_stochastic_A=%s\n", row_a ? "true" : "false");
    std::printf("col_stochastic_B=%s\n", col_b ? "true" : "false");
    std::printf("graph_compatible=%s\n", compat ? "true" : "false");
    std::printf("doubly_stochastic=%s\n", doubly ? "true" : "false");
    std::printf("min_diag_A=%.17g\n", min_diag_a);
    std::printf("min_diag_B=%.17g\n", min_diag_b);
    const bool ok = connected && row_a && col_b && compat;
    std::printf("required_assumptions=%s\n", ok ? "pass" : "fail");
    return ok ? kExitOk : kExitRuntimeError;
  });
}

}  // namespace ppds
