#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pedcoal/experiment.hpp"
#include "pedcoal/genealogy.hpp"
#include "pedcoal/limit.hpp"
#include "pedcoal/model.hpp"
#include "pedcoal/partition.hpp"
#include "pedcoal/rng.hpp"
#include "pedcoal/stats.hpp"
#include "pedcoal/validation.hpp"
#include "pedcoal/xi.hpp"

namespace py = pybind11;
using namespace pedcoal;

namespace {

std::vector<SwMixtureRow> rows_from_tuples(
    const std::vector<std::tuple<double, int, double>>& rows) {
  std::vector<SwMixtureRow> out;
  out.reserve(rows.size());
  for (const auto& [x, m, w] : rows) out.push_back({x, m, w});
  return out;
}

std::vector<GenealogyPath> quenched_paths(const ModelParams& params, int n, int loci,
                                          std::uint64_t seed, int max_steps) {
  RandomStream root(seed);
  RandomStream pedigree_stream = root.child(0);
  Pedigree pedigree(params, pedigree_stream);
  return quenched_replicates(pedigree, SampleConfig::first_n(n), loci, root.child(1), max_steps);
}

}  // namespace

PYBIND11_MODULE(_pedcoal, m) {
  m.doc() = "simulation and verification toolkit for pedigree-conditioned coalescents";

  py::class_<Partition>(m, "Partition")
      .def_static("singletons", &Partition::singletons, py::arg("n"))
      .def_static("one_block", &Partition::one_block, py::arg("n"))
      .def_property_readonly("ground_size", &Partition::ground_size)
      .def_property_readonly("block_count", &Partition::block_count)
      .def("block_sizes", &Partition::block_sizes)
      .def("to_text", &Partition::to_text)
      .def("__eq__", [](const Partition& a, const Partition& b) { return a == b; })
      .def("__repr__", [](const Partition& p) { return "Partition(" + p.to_text() + ")"; });

  py::class_<GenealogyJump>(m, "GenealogyJump")
      .def_readonly("time", &GenealogyJump::time)
      .def_readonly("partition", &GenealogyJump::partition);

  py::class_<GenealogyPath>(m, "GenealogyPath")
      .def_readonly("jumps", &GenealogyPath::jumps)
      .def_readonly("horizon", &GenealogyPath::horizon)
      .def_readonly("truncated", &GenealogyPath::truncated)
      .def("absorbed", &GenealogyPath::absorbed)
      .def("absorption_time", &GenealogyPath::absorption_time)
      .def("__eq__", [](const GenealogyPath& a, const GenealogyPath& b) { return a == b; });

  py::class_<ModelParams>(m, "ModelParams")
      .def_static("moran", &ModelParams::moran, py::arg("n_individuals"), py::arg("selfing"))
      .def_static("wright_fisher", &ModelParams::wright_fisher, py::arg("n_individuals"),
                  py::arg("selfing"))
      .def_static("psi", &ModelParams::psi, py::arg("n_individuals"), py::arg("psi"),
                  py::arg("rho"), py::arg("selfing"))
      .def_readonly("n_individuals", &ModelParams::n_individuals)
      .def_readonly("selfing", &ModelParams::selfing);

  m.def("c2_closed_sw", &c2_closed_sw, py::arg("params"));
  m.def("d_n", &d_n, py::arg("params"));
  m.def("selfing_for_lambda", &selfing_for_lambda, py::arg("params"), py::arg("lambda_rate"));

  py::class_<XiMeasure>(m, "XiMeasure")
      .def_readonly("kingman_mass", &XiMeasure::kingman_mass)
      .def("merger_mass", &XiMeasure::merger_mass)
      .def("validate", &XiMeasure::validate);

  m.def(
      "preset_arg", [](double lambda) { return preset(PresetKind::arg(lambda)); },
      py::arg("lambda_rate") = 0.0);
  m.def(
      "preset_psi",
      [](double psi, double rho, double lambda) {
        return preset(PresetKind::psi_model(psi, rho, lambda));
      },
      py::arg("psi"), py::arg("rho") = 1.0, py::arg("lambda_rate") = 0.0);
  m.def(
      "preset_beta",
      [](double r, double rho, double lambda) {
        return preset(PresetKind::beta_model(r, rho, lambda));
      },
      py::arg("r"), py::arg("rho") = 1.0, py::arg("lambda_rate") = 0.0);
  m.def(
      "preset_sw_mixture",
      [](const std::vector<std::tuple<double, int, double>>& rows, double lambda) {
        return preset(PresetKind::sw_mixture(rows_from_tuples(rows), lambda));
      },
      py::arg("rows"), py::arg("lambda_rate") = 0.0);

  m.def(
      "xi_rate",
      [](int b, std::vector<int> merge_sizes, int s, const XiMeasure& xi) {
        return xi_rate(b, std::move(merge_sizes), s, xi);
      },
      py::arg("b"), py::arg("merge_sizes"), py::arg("s"), py::arg("xi"));

  py::class_<AncestralGraph>(m, "AncestralGraph")
      .def("event_count", &AncestralGraph::event_count)
      .def("to_csv", &AncestralGraph::to_csv);

  m.def(
      "simulate_graph",
      [](int n, const XiMeasure& xi, double lambda, double frag_cutoff, double horizon,
         std::uint64_t seed) {
        RandomStream rng(seed);
        return simulate_graph(n, xi, lambda, frag_cutoff, horizon, rng);
      },
      py::arg("n"), py::arg("xi"), py::arg("lambda_rate"), py::arg("frag_cutoff") = 10.0,
      py::arg("horizon") = 50.0, py::arg("seed") = 0);
  m.def(
      "walk_graph",
      [](const AncestralGraph& graph, std::uint64_t seed) {
        RandomStream rng(seed);
        return walk_graph(graph, rng);
      },
      py::arg("graph"), py::arg("seed") = 0);
  m.def(
      "efc_coupled_walks",
      [](int n, const XiMeasure& xi, double lambda, double horizon, std::uint64_t seed) {
        RandomStream rng(seed);
        return efc_coupled_walks(n, xi, lambda, horizon, rng);
      },
      py::arg("n"), py::arg("xi"), py::arg("lambda_rate"), py::arg("horizon") = 50.0,
      py::arg("seed") = 0);

  m.def("quenched_paths", &quenched_paths, py::arg("params"), py::arg("n"), py::arg("loci"),
        py::arg("seed"), py::arg("max_steps") = -1,
        "per-locus genealogies on one pedigree drawn from the seed");

  py::class_<SfsVector>(m, "SfsVector")
      .def_readonly("n", &SfsVector::n)
      .def_readonly("tau", &SfsVector::tau)
      .def_readonly("normalized", &SfsVector::normalized)
      .def_readonly("truncated", &SfsVector::truncated);

  py::class_<QuenchedSfs>(m, "QuenchedSfs")
      .def_readonly("n", &QuenchedSfs::n)
      .def_readonly("tau_mean", &QuenchedSfs::tau_mean)
      .def_readonly("sfs", &QuenchedSfs::sfs)
      .def_readonly("sfs_stderr", &QuenchedSfs::sfs_stderr)
      .def_readonly("loci_used", &QuenchedSfs::loci_used)
      .def_readonly("loci_truncated", &QuenchedSfs::loci_truncated);

  m.def("branch_lengths", &branch_lengths, py::arg("path"), py::arg("n"));
  m.def("quenched_sfs", &quenched_sfs, py::arg("loci"));
  m.def(
      "ks_statistic",
      [](std::vector<double> samples, const std::function<double(double)>& cdf) {
        return ks_statistic(std::move(samples), cdf);
      },
      py::arg("samples"), py::arg("cdf"));
  m.def("ks_critical_value", &ks_critical_value, py::arg("count"));

  m.def(
      "run_experiment_json",
      [](const std::string& text, const std::string& source_name) {
        ExperimentResult result = run_experiment(parse_config(text, source_name));
        py::dict out;
        out["ok"] = result.ok;
        out["artifacts"] = result.artifacts;
        out["summary"] = result.summary;
        return out;
      },
      py::arg("text"), py::arg("source_name") = "config.json",
      "parse a JSON experiment description and run it");
}
