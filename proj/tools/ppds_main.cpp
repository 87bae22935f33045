// Command-line front end: run single experiments, parameter sweeps, and the
// rate/contraction calculators. All heavy lifting lives in the library so the
// commands stay testable.

#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ppds/commands.hpp"
#include "ppds/config.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<long long> iters;
  std::string out;
  std::vector<std::string> overrides;  // key=value
};

void add_common(CLI::App* app, CommonFlags* flags) {
  app->add_option("--config", flags->config_path, "config file (key value lines)");
  app->add_option("--seed", flags->seed, "experiment seed");
  app->add_option("--iters", flags->iters, "number of iterations");
  app->add_option("--out", flags->out, "output path");
  app->add_option("--set", flags->overrides,
                  "config override key=value (repeatable)");
}

ppds::ExperimentConfig build_config(const CommonFlags& flags) {
  ppds::ExperimentConfig cfg;
  if (!flags.config_path.empty()) {
    cfg = ppds::parse_config_file(flags.config_path);
  }
  for (const std::string& kv : flags.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw ppds::ConfigError("--set expects key=value, got '" + kv + "'");
    }
    ppds::apply_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (flags.seed) cfg.seed = *flags.seed;
  if (flags.iters) cfg.iterations = *flags.iters;
  if (!flags.out.empty()) cfg.output = flags.out;
  return cfg;
}

std::vector<double> parse_values(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    out.push_back(std::stod(tok));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decentralized asynchronous gradient optimization simulator"};
  app.require_subcommand(1);

  CommonFlags run_flags;
  std::string run_export_graph, run_export_data;
  CLI::App* run = app.add_subcommand("run", "run one experiment, write metrics CSV");
  add_common(run, &run_flags);
  run->add_option("--export-graph", run_export_graph, "write the graph edge list here");
  run->add_option("--export-data", run_export_data, "write the generated dataset here");

  CommonFlags sweep_flags;
  ppds::SweepOptions sweep_opts;
  std::string sweep_values;
  CLI::App* sweep = app.add_subcommand("sweep", "run one experiment per axis value");
  add_common(sweep, &sweep_flags);
  sweep->add_option("--axis", sweep_opts.axis,
                    "stepsize-grid | sample-size | mixing-degree")
      ->required();
  sweep->add_option("--values", sweep_values,
                    "comma-separated values (stepsize-grid default: coarse-to-fine)");
  sweep->add_option("--jobs", sweep_opts.jobs, "concurrent runs");
  sweep->add_option("--out-base", sweep_opts.out_base, "output path prefix");

  ppds::RateOptions rate_opts;
  std::string rate_eta = "auto";
  CLI::App* rate = app.add_subcommand("rate", "stepsize bound, linear rate, certificate");
  rate->add_option("--mu", rate_opts.params.mu, "strong convexity")->required();
  rate->add_option("--L", rate_opts.params.L, "smoothness")->required();
  rate->add_option("--M", rate_opts.params.M, "node count")->required();
  rate->add_option("--S", rate_opts.params.S, "sampled nodes per round")->required();
  rate->add_option("--lambda", rate_opts.params.lambda, "mixing contraction factor");
  rate->add_option("--eta", rate_eta, "stepsize, or 'auto' for the bound");
  rate->add_option("--eps", rate_opts.eps, "target accuracy for the complexity");
  rate->add_option("--csv", rate_opts.csv_out, "also write key,value CSV here");

  CommonFlags lambda_flags;
  ppds::LambdaOptions lambda_opts;
  CLI::App* lambda = app.add_subcommand("lambda", "Monte-Carlo contraction factor");
  add_common(lambda, &lambda_flags);
  lambda->add_option("--samples", lambda_opts.samples, "Monte-Carlo draws");
  lambda->add_option("--csv", lambda_opts.csv_out, "also write key,value CSV here");

  CommonFlags validate_flags;
  int validate_samples = 20;
  std::string validate_export_graph;
  CLI::App* validate = app.add_subcommand("validate", "check mixing assumptions on a config");
  add_common(validate, &validate_flags);
  validate->add_option("--samples", validate_samples, "mixing draws to check");
  validate->add_option("--export-graph", validate_export_graph,
                       "write the graph edge list here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      return ppds::cmd_run(build_config(run_flags), run_export_graph,
                           run_export_data);
    }
    if (sweep->parsed()) {
      sweep_opts.values = parse_values(sweep_values);
      return ppds::cmd_sweep(build_config(sweep_flags), sweep_opts);
    }
    if (rate->parsed()) {
      if (rate_eta == "auto") {
        rate_opts.eta_auto = true;
      } else {
        rate_opts.params.eta = std::stod(rate_eta);
      }
      return ppds::cmd_rate(rate_opts);
    }
    if (lambda->parsed()) {
      return ppds::cmd_lambda(build_config(lambda_flags), lambda_opts);
    }
    if (validate->parsed()) {
      return ppds::cmd_validate(build_config(validate_flags), validate_samples,
                                validate_export_graph);
    }
  } catch (const ppds::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return ppds::kExitConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return ppds::kExitRuntimeError;
  }
  return ppds::kExitConfigError;
}
