#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "pedcoal/experiment.hpp"
#include "pedcoal/model.hpp"
#include "pedcoal/oracle.hpp"

namespace {

using namespace pedcoal;

struct Overrides {
  CLI::Option* seed_opt = nullptr;
  CLI::Option* threads_opt = nullptr;
  CLI::Option* output_opt = nullptr;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string output_dir;

  void attach(CLI::App* cmd) {
    seed_opt = cmd->add_option("--seed", seed, "seed override (64-bit)");
    threads_opt = cmd->add_option("--threads", threads, "worker count");
    output_opt = cmd->add_option("--output", output_dir, "output directory override");
  }

  void apply(ExperimentConfig& config) const {
    if (seed_opt->count() > 0) {
      config.seed = seed;
      config.seed_set = true;
    }
    if (threads_opt->count() > 0) {
      if (threads < 1) throw std::invalid_argument("--threads must be at least 1");
      config.threads = threads;
    }
    if (output_opt->count() > 0) config.output_dir = output_dir;
  }
};

void print_line(const std::string& line) {
  std::printf("%s\n", line.c_str());
  std::fflush(stdout);
}

int finish(const ExperimentResult& result) {
  for (const std::string& path : result.artifacts) std::printf("wrote %s\n", path.c_str());
  std::printf("%s\n", result.summary.c_str());
  return result.ok ? 0 : 1;
}

int run_oracle_report(const std::string& output_dir) {
  nlohmann::json doc;
  double worst = 0.0;
  auto put = [&](const std::string& name, double expected, double computed) {
    const double err = std::abs(expected - computed);
    worst = std::max(worst, err);
    doc[name] = {{"expected", expected}, {"computed", computed}, {"abs_error", err}};
  };
  for (int wf = 0; wf < 2; ++wf) {
    for (int n_ind = 3; n_ind <= 5; ++n_ind) {
      const OracleParams exact = wf ? OracleParams::wright_fisher(n_ind, Rat(1) / 4)
                                    : OracleParams::moran(n_ind, Rat(1) / 3);
      const ModelParams model = wf ? ModelParams::wright_fisher(n_ind, 0.25)
                                   : ModelParams::moran(n_ind, 1.0 / 3.0);
      const OracleMoments moments = oracle_moments(exact, 3);
      const std::string prefix =
          std::string(wf ? "wright_fisher" : "moran") + "_N" + std::to_string(n_ind);
      put(prefix + "_c2", c2_closed_sw(model), moments.c2.convert_to<double>());
      put(prefix + "_d", d_n(model), moments.d.convert_to<double>());
      put(prefix + "_c3", triple_rate_exact(exact).convert_to<double>(),
          moments.c3.convert_to<double>());
    }
  }
  const std::string body = doc.dump(2) + "\n";
  std::printf("%s", body.c_str());
  std::filesystem::create_directories(output_dir);
  const std::string path = output_dir + "/oracle.json";
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    std::fprintf(stderr, "error: cannot write %s\n", path.c_str());
    return 1;
  }
  out << body;
  std::printf("wrote %s\n", path.c_str());
  return worst <= 1e-12 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pedigree-conditioned coalescent toolkit"};
  app.require_subcommand(1);

  std::string simulate_config;
  Overrides simulate_over;
  CLI::App* simulate = app.add_subcommand("simulate", "run a configured experiment");
  simulate->add_option("--config", simulate_config, "experiment JSON document")->required();
  simulate_over.attach(simulate);

  std::string validate_config;
  Overrides validate_over;
  CLI::App* validate = app.add_subcommand("validate", "run the acceptance battery");
  validate->add_option("--config", validate_config, "experiment JSON document");
  validate_over.attach(validate);

  std::string oracle_output = ".";
  CLI::App* oracle = app.add_subcommand("oracle", "closed forms against exact enumeration");
  oracle->add_option("--output", oracle_output, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      ExperimentConfig config = load_config(simulate_config);
      simulate_over.apply(config);
      return finish(run_experiment(config, print_line));
    }
    if (validate->parsed()) {
      ExperimentConfig config;
      if (!validate_config.empty()) config = load_config(validate_config);
      config.mode = "validate";
      validate_over.apply(config);
      return finish(run_experiment(config, print_line));
    }
    return run_oracle_report(oracle_output);
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 1;
  }
}
