#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ppds/config.hpp"
#include "ppds/theory.hpp"

namespace ppds {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitRuntimeError = 2;

/// Runs one experiment, writes the metrics CSV to cfg.output, prints the
/// resolved stepsize and the final consensus/suboptimality summary.
/// Optionally exports the communication graph and the generated dataset.
int cmd_run(const ExperimentConfig& cfg, const std::string& export_graph = "",
            const std::string& export_data = "");

struct SweepOptions {
  std::string axis;            // stepsize-grid | sample-size | mixing-degree
  std::vector<double> values;  // empty stepsize-grid = coarse-to-fine protocol
  int jobs = 1;
  std::string out_base = "sweep";
};

/// One experiment per axis value (concurrently up to `jobs`), one CSV per
/// point plus a summary CSV mapping each value to the communication and
/// gradient cost of reaching suboptimality 1e-2 / 1e-3 / 1e-4.
int cmd_sweep(const ExperimentConfig& base, const SweepOptions& opts);

struct RateOptions {
  RateParams params;
  bool eta_auto = false;  // eta = stepsize_bound(params)
  double eps = 1e-6;
  std::string csv_out;
};

/// Prints stepsize bound, rate, iteration complexity, and the Lyapunov
/// certificate margins as key=value lines (CSV alongside if requested).
int cmd_rate(const RateOptions& opts);

struct LambdaOptions {
  int samples = 500;
  std::string csv_out;
};

/// Monte-Carlo contraction factor of the configured mixing strategy.
int cmd_lambda(const ExperimentConfig& cfg, const LambdaOptions& opts);

/// Draws mixing pairs under the configured strategy and reports the
/// assumption checks (stochasticity, graph compatibility, diagonal mass,
/// double stochasticity) plus graph connectivity. Exit code 2 when a
/// required property fails.
int cmd_validate(const ExperimentConfig& cfg, int samples,
                 const std::string& export_graph = "");

}  // namespace ppds
