#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <type_traits>

#include "json.hpp"
#include "pedcoal/experiment.hpp"

namespace pedcoal {

namespace {

// 1-based line of the first occurrence of "key" in the source text, so
// semantic errors can point at the offending entry; 1 when absent.
int key_line(const std::string& text, const std::string& key) {
  const std::string needle = "\"" + key + "\"";
  const std::size_t at = text.find(needle);
  if (at == std::string::npos) return 1;
  int line = 1;
  for (std::size_t i = 0; i < at; ++i) {
    if (text[i] == '\n') line += 1;
  }
  return line;
}

[[noreturn]] void fail_at(const std::string& source, const std::string& text,
                          const std::string& key, const std::string& message) {
  throw std::invalid_argument(source + ":" + std::to_string(key_line(text, key)) + ": " +
                              message);
}

}  // namespace

double selfing_for_lambda(const ModelParams& base, double lambda) {
  if (lambda < 0.0) throw std::invalid_argument("selfing_for_lambda: negative rate");
  const double ceiling = base.demography.mean_k() /
                         (base.n_individuals * c2_closed_sw(base));
  if (lambda > ceiling) {
    throw std::invalid_argument("selfing_for_lambda: rate " + std::to_string(lambda) +
                                " exceeds the matchable maximum " + std::to_string(ceiling) +
                                " at this population size");
  }
  return 1.0 - lambda / ceiling;
}

ExperimentConfig parse_config(const std::string& text, const std::string& source_name) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& err) {
    // the parser's message already carries line and column
    throw std::invalid_argument(source_name + ": " + err.what());
  }
  if (!doc.is_object()) fail_at(source_name, text, "", "config must be a JSON object");

  ExperimentConfig config;
  auto has = [&](const char* key) { return doc.contains(key); };
  auto expect = [&](const char* key, bool ok, const std::string& message) {
    if (!ok) fail_at(source_name, text, key, message);
  };

  expect("mode", has("mode") && doc["mode"].is_string(), "mode is required");
  config.mode = doc["mode"].get<std::string>();
  expect("mode",
         config.mode == "limit-graph" || config.mode == "quenched-finite" ||
             config.mode == "validate",
         "mode must be limit-graph, quenched-finite, or validate");

  auto read_number = [&](const char* key, double& slot, bool require_positive) {
    if (!has(key)) return;
    expect(key, doc[key].is_number(), std::string(key) + " must be a number");
    slot = doc[key].get<double>();
    expect(key, std::isfinite(slot) && (!require_positive || slot > 0.0),
           std::string(key) + (require_positive ? " must be finite and positive"
                                                : " must be a finite number"));
  };
  auto read_count = [&](const char* key, auto& slot, long floor) {
    if (!has(key)) return;
    expect(key, doc[key].is_number_integer(), std::string(key) + " must be an integer");
    const long value = doc[key].get<long>();
    expect(key, value >= floor,
           std::string(key) + " must be at least " + std::to_string(floor));
    slot = static_cast<std::decay_t<decltype(slot)>>(value);
  };

  if (has("family")) {
    expect("family", doc["family"].is_string(), "family must be a string");
    config.family = doc["family"].get<std::string>();
    expect("family",
           config.family == "arg" || config.family == "psi" || config.family == "beta" ||
               config.family == "sw-mixture",
           "family must be arg, psi, beta, or sw-mixture");
  }
  read_number("psi", config.psi, false);
  expect("psi", config.psi >= 0.0 && config.psi <= 1.0, "psi must lie in [0,1]");
  read_number("rho", config.rho, false);
  expect("rho", config.rho >= 0.0, "rho must be nonnegative");
  read_number("beta_param", config.beta_param, false);
  expect("beta_param", config.beta_param >= 0.0 && config.beta_param <= 1.0,
         "beta_param must lie in [0,1]");
  if (has("sweeps")) {
    expect("sweeps", doc["sweeps"].is_array(), "sweeps must be an array");
    config.sweeps.clear();
    for (const auto& row : doc["sweeps"]) {
      expect("sweeps",
             row.is_object() && row.contains("x") && row.contains("m") && row.contains("weight"),
             "each sweep needs x, m, and weight");
      SwMixtureRow parsed;
      parsed.x = row["x"].get<double>();
      parsed.m = row["m"].get<int>();
      parsed.weight = row["weight"].get<double>();
      config.sweeps.push_back(parsed);
    }
  }

  if (has("demography")) {
    expect("demography", doc["demography"].is_string(), "demography must be a string");
    config.demography = doc["demography"].get<std::string>();
    expect("demography", config.demography == "moran" || config.demography == "wright-fisher",
           "demography must be moran or wright-fisher");
  }
  read_count("population", config.population, 2);
  read_count("n", config.n, 2);
  read_count("loci", config.loci, 1);
  read_count("graphs", config.graphs, 1);
  read_count("graph_events_limit", config.graph_events_limit, 0);
  read_count("threads", config.threads, 1);
  read_number("horizon", config.horizon, true);
  read_number("frag_cutoff", config.frag_cutoff, true);

  if (has("seed")) {
    expect("seed", doc["seed"].is_number_unsigned() || doc["seed"].is_number_integer(),
           "seed must be a 64-bit integer");
    config.seed = doc["seed"].get<std::uint64_t>();
    config.seed_set = true;
  }

  if (has("lambda_grid")) {
    expect("lambda_grid", doc["lambda_grid"].is_array() && !doc["lambda_grid"].empty(),
           "lambda_grid must be a nonempty array");
    config.lambda_grid.clear();
    for (const auto& entry : doc["lambda_grid"]) {
      expect("lambda_grid", entry.is_number(), "lambda_grid entries must be numbers");
      const double lambda = entry.get<double>();
      expect("lambda_grid", std::isfinite(lambda) && lambda >= 0.0,
             "lambda_grid entries must be nonnegative");
      config.lambda_grid.push_back(lambda);
    }
  }

  if (has("output_dir")) {
    expect("output_dir", doc["output_dir"].is_string(), "output_dir must be a string");
    config.output_dir = doc["output_dir"].get<std::string>();
  }

  expect("n", config.n <= 64, "samples larger than 64 are not representable");
  if (config.mode == "quenched-finite") {
    expect("n", config.n <= config.population, "sample exceeds the population");
    ModelParams base = config.demography == "moran"
                           ? ModelParams::moran(config.population, 0.0)
                           : ModelParams::wright_fisher(config.population, 0.0);
    for (double lambda : config.lambda_grid) {
      try {
        selfing_for_lambda(base, lambda);
      } catch (const std::invalid_argument& err) {
        fail_at(source_name, text, "lambda_grid", err.what());
      }
    }
  }
  if (config.mode == "limit-graph" && config.family == "sw-mixture") {
    expect("sweeps", !config.sweeps.empty(), "sw-mixture needs at least one sweep row");
  }
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read config file " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path);
}

}  // namespace pedcoal
