#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pedcoal/model.hpp"
#include "pedcoal/xi.hpp"

namespace pedcoal {

/// One experiment description, normally read from a JSON document.
/// Field names below match the JSON keys one for one.
struct ExperimentConfig {
  std::string mode;  // "limit-graph", "quenched-finite", or "validate"

  // limit family (limit-graph mode)
  std::string family = "arg";  // "arg", "psi", "beta", or "sw-mixture"
  double psi = 0.5;
  double rho = 1.0;
  double beta_param = 0.5;
  std::vector<SwMixtureRow> sweeps;  // rows of the sw-mixture family

  // finite model (quenched-finite mode); selfing is derived per lambda
  std::string demography = "moran";  // "moran" or "wright-fisher"
  int population = 100;

  int n = 20;
  int loci = 10000;
  int graphs = 5;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::vector<double> lambda_grid = {1000.0, 100.0, 10.0, 1.0, 0.1, 0.0};
  std::string output_dir = ".";
  double horizon = 50.0;
  double frag_cutoff = 10.0;
  long graph_events_limit = 200000;  // larger graphs keep only a stub row in graphs.csv
  int threads = 1;
};

/// Parses and cross-checks a JSON experiment description. Failures
/// throw std::invalid_argument whose message carries the source name
/// and the line of the offending key.
ExperimentConfig parse_config(const std::string& text, const std::string& source_name);
ExperimentConfig load_config(const std::string& path);

/// Selfing level at which the finite model's outcrossing rate matches
/// the fragmentation rate `lambda` on the coalescent clock. Throws when
/// lambda is too large to match at this population size.
double selfing_for_lambda(const ModelParams& base, double lambda);

struct ExperimentResult {
  bool ok = true;
  std::vector<std::string> artifacts;  // paths written
  std::string summary;
};

/// Runs the configured experiment and writes its artifacts under
/// output_dir. `log` (when set) receives progress lines.
ExperimentResult run_experiment(const ExperimentConfig& config,
                                const std::function<void(const std::string&)>& log = {});

}  // namespace pedcoal
