#include "ppds/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ppds {

namespace {

long long parse_ll(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) {
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  }
  return out;
}

int parse_int(const std::string& key, const std::string& v) {
  const long long x = parse_ll(key, v);
  if (x < INT32_MIN || x > INT32_MAX) throw ConfigError(key + ": out of range");
  return static_cast<int>(x);
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) {
    throw ConfigError(key + ": expected an unsigned integer, got '" + v + "'");
  }
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t idx = 0;
    const double out = std::stod(v, &idx);
    if (idx != v.size()) throw ConfigError(key + ": trailing characters in '" + v + "'");
    return out;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
}

}  // namespace

void apply_override(ExperimentConfig& cfg, const std::string& key,
                    const std::string& value) {
  if (key == "algorithm") cfg.algorithm = value;
  else if (key == "seed") cfg.seed = parse_u64(key, value);
  else if (key == "iterations") cfg.iterations = parse_ll(key, value);
  else if (key == "record_every") cfg.record_every = parse_ll(key, value);
  else if (key == "graph.M") cfg.graph.M = parse_int(key, value);
  else if (key == "graph.radius") cfg.graph.radius = parse_double(key, value);
  else if (key == "objective.family") cfg.objective.family = value;
  else if (key == "objective.d") cfg.objective.d = parse_int(key, value);
  else if (key == "objective.n_local") cfg.objective.n_local = parse_int(key, value);
  else if (key == "objective.classes") cfg.objective.classes = parse_int(key, value);
  else if (key == "objective.heterogeneity") cfg.objective.heterogeneity = parse_double(key, value);
  else if (key == "objective.noise") cfg.objective.noise = parse_double(key, value);
  else if (key == "objective.data_path") cfg.objective.data_path = value;
  else if (key == "objective.ref_iterations") cfg.objective.ref_iterations = parse_int(key, value);
  else if (key == "sampling.variant") cfg.sampling.variant = value;
  else if (key == "sampling.S") cfg.sampling.S = parse_int(key, value);
  else if (key == "sampling.p") cfg.sampling.p = parse_double(key, value);
  else if (key == "mixing.variant") cfg.mixing.variant = value;
  else if (key == "mixing.targets") cfg.mixing.targets = parse_int(key, value);
  else if (key == "mixing.neighbors") cfg.mixing.neighbors = parse_int(key, value);
  else if (key == "mixing.comm_nodes") cfg.mixing.comm_nodes = parse_int(key, value);
  else if (key == "mixing.A_path") cfg.mixing.A_path = value;
  else if (key == "mixing.B_path") cfg.mixing.B_path = value;
  else if (key == "eta") {
    if (value == "auto") cfg.eta.reset();
    else cfg.eta = parse_double(key, value);
  } else if (key == "output") cfg.output = value;
  else throw ConfigError("unknown config key '" + key + "'");
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string key, value, extra;
    if (!(ls >> key)) continue;  // blank line
    if (!(ls >> value)) {
      throw ConfigError("line " + std::to_string(lineno) + ": key '" + key +
                        "' has no value");
    }
    if (value == "=" && !(ls >> value)) {
      throw ConfigError("line " + std::to_string(lineno) + ": key '" + key +
                        "' has no value");
    }
    if (ls >> extra) {
      throw ConfigError("line " + std::to_string(lineno) +
                        ": unexpected trailing token '" + extra + "'");
    }
    apply_override(cfg, key, value);
  }
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

void ExperimentConfig::validate() const {
  if (algorithm != "ppds" && algorithm != "push_pull" && algorithm != "dgd" &&
      algorithm != "saga") {
    throw ConfigError("algorithm: unknown value '" + algorithm + "'");
  }
  if (iterations < 0) throw ConfigError("iterations must be >= 0");
  if (record_every < 1) throw ConfigError("record_every must be >= 1");
  if (graph.M < 1) throw ConfigError("graph.M must be >= 1");
  if (!(graph.radius > 0.0)) throw ConfigError("graph.radius must be positive");
  if (objective.family != "ridge" && objective.family != "logistic") {
    throw ConfigError("objective.family: unknown value '" + objective.family + "'");
  }
  if (objective.d < 1) throw ConfigError("objective.d must be >= 1");
  if (objective.n_local < 1) throw ConfigError("objective.n_local must be >= 1");
  if (objective.family == "logistic" && objective.classes < 2) {
    throw ConfigError("objective.classes must be >= 2");
  }
  if (objective.heterogeneity < 0.0) throw ConfigError("objective.heterogeneity must be >= 0");
  if (objective.noise < 0.0) throw ConfigError("objective.noise must be >= 0");
  if (objective.ref_iterations < 1) throw ConfigError("objective.ref_iterations must be >= 1");
  if (sampling.variant == "uniform") {
    if (sampling.S < 1) throw ConfigError("sampling.S must be >= 1");
    if (sampling.S > graph.M) throw ConfigError("sampling.S exceeds graph.M");
  } else if (sampling.variant == "bernoulli") {
    if (!(sampling.p > 0.0) || sampling.p > 1.0) {
      throw ConfigError("sampling.p must be in (0, 1]");
    }
  } else {
    throw ConfigError("sampling.variant: unknown value '" + sampling.variant + "'");
  }
  if (mixing.variant == "broadcast") {
    if (mixing.targets < 0 || mixing.targets > graph.M - 1) {
      throw ConfigError("mixing.targets must be in [0, graph.M - 1]");
    }
  } else if (mixing.variant == "metropolis_active" ||
             mixing.variant == "independent_gossip") {
    if (mixing.neighbors < 0 || mixing.neighbors > graph.M - 1) {
      throw ConfigError("mixing.neighbors must be in [0, graph.M - 1]");
    }
    if (mixing.variant == "independent_gossip" &&
        (mixing.comm_nodes < 0 || mixing.comm_nodes > graph.M)) {
      throw ConfigError("mixing.comm_nodes must be in [0, graph.M]");
    }
  } else if (mixing.variant == "fixed") {
    if (mixing.A_path.empty() || mixing.B_path.empty()) {
      throw ConfigError("mixing.variant=fixed requires mixing.A_path and mixing.B_path");
    }
  } else if (mixing.variant != "mean") {
    throw ConfigError("mixing.variant: unknown value '" + mixing.variant + "'");
  }
  if (eta.has_value() && !(*eta > 0.0)) {
    throw ConfigError("eta must be positive (or 'auto')");
  }
  if (output.empty()) throw ConfigError("output path must not be empty");
}

std::string serialize_config(const ExperimentConfig& cfg) {
  char buf[64];
  std::ostringstream out;
  const auto num = [&buf](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  out << "algorithm " << cfg.algorithm << "\n";
  out << "seed " << cfg.seed << "\n";
  out << "iterations " << cfg.iterations << "\n";
  out << "record_every " << cfg.record_every << "\n";
  out << "graph.M " << cfg.graph.M << "\n";
  out << "graph.radius " << num(cfg.graph.radius) << "\n";
  out << "objective.family " << cfg.objective.family << "\n";
  out << "objective.d " << cfg.objective.d << "\n";
  out << "objective.n_local " << cfg.objective.n_local << "\n";
  out << "objective.classes " << cfg.objective.classes << "\n";
  out << "objective.heterogeneity " << num(cfg.objective.heterogeneity) << "\n";
  out << "objective.noise " << num(cfg.objective.noise) << "\n";
  if (!cfg.objective.data_path.empty()) {
    out << "objective.data_path " << cfg.objective.data_path << "\n";
  }
  out << "objective.ref_iterations " << cfg.objective.ref_iterations << "\n";
  out << "sampling.variant " << cfg.sampling.variant << "\n";
  out << "sampling.S " << cfg.sampling.S << "\n";
  out << "sampling.p " << num(cfg.sampling.p) << "\n";
  out << "mixing.variant " << cfg.mixing.variant << "\n";
  out << "mixing.targets " << cfg.mixing.targets << "\n";
  out << "mixing.neighbors " << cfg.mixing.neighbors << "\n";
  out << "mixing.comm_nodes " << cfg.mixing.comm_nodes << "\n";
  if (!cfg.mixing.A_path.empty()) out << "mixing.A_path " << cfg.mixing.A_path << "\n";
  if (!cfg.mixing.B_path.empty()) out << "mixing.B_path " << cfg.mixing.B_path << "\n";
  out << "eta " << (cfg.eta.has_value() ? num(*cfg.eta) : "auto") << "\n";
  out << "output " << cfg.output << "\n";
  return out.str();
}

}  // namespace ppds
