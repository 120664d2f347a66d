#include "pedcoal/experiment.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "pedcoal/model.hpp"

using namespace pedcoal;

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

int line_count(const std::string& text) {
  int lines = 0;
  for (char c : text) {
    if (c == '\n') lines += 1;
  }
  return lines;
}

std::string thrown_message(const std::string& text) {
  try {
    parse_config(text, "test.json");
  } catch (const std::invalid_argument& err) {
    return err.what();
  }
  return "";
}

struct ScratchDir {
  std::filesystem::path path;
  explicit ScratchDir(const char* tag)
      : path(std::filesystem::temp_directory_path() / tag) {
    std::filesystem::remove_all(path);
  }
  ~ScratchDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("config parsing fills defaults") {
  ExperimentConfig config = parse_config(R"({"mode": "limit-graph", "seed": 7})", "inline");
  CHECK(config.mode == "limit-graph");
  CHECK(config.family == "arg");
  CHECK(config.n == 20);
  CHECK(config.loci == 10000);
  CHECK(config.graphs == 5);
  CHECK(config.seed == 7);
  CHECK(config.seed_set);
  CHECK(config.lambda_grid == std::vector<double>{1000.0, 100.0, 10.0, 1.0, 0.1, 0.0});
  CHECK(config.output_dir == ".");
  CHECK(config.horizon == 50.0);
  CHECK(config.frag_cutoff == 10.0);
  CHECK(config.graph_events_limit == 200000);
  CHECK(config.threads == 1);

  ExperimentConfig full = parse_config(R"({
    "mode": "quenched-finite",
    "demography": "wright-fisher",
    "population": 40,
    "n": 4,
    "loci": 100,
    "graphs": 3,
    "seed": 99,
    "lambda_grid": [2, 0],
    "output_dir": "somewhere",
    "horizon": 30,
    "frag_cutoff": 5,
    "threads": 2
  })",
                                       "inline");
  CHECK(full.demography == "wright-fisher");
  CHECK(full.population == 40);
  CHECK(full.lambda_grid == std::vector<double>{2.0, 0.0});
  CHECK(full.output_dir == "somewhere");
  CHECK(full.threads == 2);
}

TEST_CASE("config diagnostics carry source and line") {
  // syntax error: the parser's own line/column report is passed through
  std::string syntax = thrown_message("{\n  \"mode\": }");
  CHECK(syntax.find("test.json") != std::string::npos);
  CHECK(syntax.find("line 2") != std::string::npos);

  std::string bad_loci =
      thrown_message("{\n\"mode\": \"limit-graph\",\n\"loci\": 0,\n\"seed\": 1\n}");
  CHECK(bad_loci.find("test.json:3:") != std::string::npos);
  CHECK(bad_loci.find("loci") != std::string::npos);

  CHECK(thrown_message("{}").find("mode is required") != std::string::npos);
  CHECK(thrown_message(R"({"mode": "nonsense"})").find("mode must be") != std::string::npos);

  std::string negative =
      thrown_message("{\"mode\": \"limit-graph\",\n\"lambda_grid\": [-1]\n}");
  CHECK(negative.find("test.json:2:") != std::string::npos);
  CHECK(negative.find("nonnegative") != std::string::npos);

  // a fragmentation rate no selfing level can match at this population size
  std::string too_fast = thrown_message(
      "{\"mode\": \"quenched-finite\",\n\"population\": 10,\n\"lambda_grid\": [1000],\n"
      "\"n\": 5,\n\"seed\": 1\n}");
  CHECK(too_fast.find("test.json:3:") != std::string::npos);
  CHECK(too_fast.find("exceeds the matchable maximum") != std::string::npos);

  CHECK(thrown_message(R"({"mode": "quenched-finite", "population": 10, "n": 11, "seed": 1,
                           "lambda_grid": [1]})")
            .find("sample exceeds the population") != std::string::npos);
  CHECK(thrown_message(R"({"mode": "limit-graph", "family": "sw-mixture", "seed": 1})")
            .find("at least one sweep") != std::string::npos);
}

TEST_CASE("selfing level matches the fragmentation rate") {
  ModelParams moran = ModelParams::moran(100, 0.0);
  CHECK(selfing_for_lambda(moran, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(selfing_for_lambda(moran, 1.0) == doctest::Approx(0.99).epsilon(1e-12));
  CHECK(selfing_for_lambda(moran, 100.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_THROWS_AS(selfing_for_lambda(moran, 101.0), std::invalid_argument);
  CHECK_THROWS_AS(selfing_for_lambda(moran, -1.0), std::invalid_argument);

  ModelParams wf = ModelParams::wright_fisher(10, 0.0);
  double ceiling = wf.demography.mean_k() / (10 * c2_closed_sw(wf));
  CHECK(selfing_for_lambda(wf, ceiling / 2) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("limit-graph runs write deterministic artifacts") {
  ScratchDir first("pedcoal_cli_a");
  ScratchDir second("pedcoal_cli_b");
  ExperimentConfig config = parse_config(R"({
    "mode": "limit-graph",
    "family": "arg",
    "n": 6,
    "loci": 200,
    "graphs": 2,
    "seed": 11,
    "lambda_grid": [5, 0],
    "frag_cutoff": 3
  })",
                                         "inline");
  config.output_dir = first.path.string();
  ExperimentResult result = run_experiment(config);
  CHECK(result.ok);
  REQUIRE(result.artifacts.size() == 2);

  std::string sfs = read_file(first.path / "sfs.csv");
  CHECK(line_count(sfs) == 1 + 2 * 2 * 5);  // header + grid * graphs * (n-1) rows
  CHECK(sfs.rfind("lambda,graph_id,r,tau_mean,sfs_normalized,stderr\n", 0) == 0);
  std::string graphs = read_file(first.path / "graphs.csv");
  CHECK(graphs.find("coalescence") != std::string::npos);

  config.output_dir = second.path.string();
  run_experiment(config);
  CHECK(read_file(second.path / "sfs.csv") == sfs);
  CHECK(read_file(second.path / "graphs.csv") == graphs);

  // a zero event budget leaves only stub rows behind
  ExperimentConfig capped = config;
  capped.graph_events_limit = 0;
  capped.output_dir = (second.path / "capped").string();
  run_experiment(capped);
  std::string stubs = read_file(second.path / "capped" / "graphs.csv");
  CHECK(stubs.find("omitted") != std::string::npos);
  CHECK(stubs.find("coalescence") == std::string::npos);
}

TEST_CASE("quenched-finite runs cover the grid") {
  ScratchDir dir("pedcoal_cli_q");
  ExperimentConfig config = parse_config(R"({
    "mode": "quenched-finite",
    "demography": "moran",
    "population": 30,
    "n": 3,
    "loci": 40,
    "graphs": 2,
    "seed": 5,
    "lambda_grid": [1, 0]
  })",
                                         "inline");
  config.output_dir = dir.path.string();
  ExperimentResult result = run_experiment(config);
  CHECK(result.ok);
  CHECK(result.artifacts.size() == 1);  // spectra only; no limit graphs in this mode

  std::string sfs = read_file(dir.path / "sfs.csv");
  CHECK(line_count(sfs) == 1 + 2 * 2 * 2);

  ExperimentConfig again = config;
  again.output_dir = (dir.path / "again").string();
  run_experiment(again);
  CHECK(read_file(dir.path / "again" / "sfs.csv") == sfs);
}

TEST_CASE("experiments refuse to run without a seed") {
  ExperimentConfig config = parse_config(R"({"mode": "limit-graph"})", "inline");
  CHECK(!config.seed_set);
  CHECK_THROWS_WITH_AS(run_experiment(config),
                       "experiment needs a seed, from the config or the command line",
                       std::invalid_argument);
}
