#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ppds {

/// Raised for malformed or inconsistent configuration; maps to exit code 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Full description of one experiment. Defaults reproduce the synthetic
/// benchmark setup (100 nodes, radius 0.2, d=10, 100 local samples, 20
/// sampled nodes, broadcast to 1 neighbor).
struct ExperimentConfig {
  std::string algorithm = "ppds";  // ppds | push_pull | dgd | saga
  std::uint64_t seed = 1;
  long long iterations = 5000;
  long long record_every = 10;

  struct Graph {
    int M = 100;
    double radius = 0.2;
    bool operator==(const Graph&) const = default;
  } graph;

  struct ObjectiveCfg {
    std::string family = "ridge";  // ridge | logistic
    int d = 10;
    int n_local = 100;
    int classes = 5;              // logistic only
    double heterogeneity = 1.0;
    double noise = 0.1;
    std::string data_path;        // load ensemble from file instead of generating
    int ref_iterations = 2000;    // reference solve length for logistic f*
    bool operator==(const ObjectiveCfg&) const = default;
  } objective;

  struct Sampling {
    std::string variant = "uniform";  // uniform | bernoulli
    int S = 20;                       // uniform: sampled nodes per round
    double p = 0.2;                   // bernoulli: per-node probability
    bool operator==(const Sampling&) const = default;
  } sampling;

  struct Mixing {
    // broadcast | metropolis_active | mean | independent_gossip | fixed
    std::string variant = "broadcast";
    int targets = 1;     // broadcast: sampled out-neighbors per active node
    int neighbors = 1;   // metropolis_active / independent_gossip
    int comm_nodes = 5;  // independent_gossip
    std::string A_path;  // fixed: matrix files
    std::string B_path;
    bool operator==(const Mixing&) const = default;
  } mixing;

  // nullopt = "auto": resolved from the contraction-factor estimate and the
  // closed-form stepsize bound. That bound only exists for doubly stochastic
  // mixing, so the default is the coarse-grid winner for the default
  // broadcast setup instead.
  std::optional<double> eta = 1e-4;
  std::string output = "metrics.csv";

  bool operator==(const ExperimentConfig&) const = default;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Parses the flat key-value config format ('#' comments, "key value" or
/// "key = value" lines, dotted section keys). Unknown keys are errors.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

/// Applies "key=value" overrides on top of a parsed config.
void apply_override(ExperimentConfig& cfg, const std::string& key,
                    const std::string& value);

std::string serialize_config(const ExperimentConfig& cfg);

}  // namespace ppds
