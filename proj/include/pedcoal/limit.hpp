#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "pedcoal/genealogy.hpp"
#include "pedcoal/graph.hpp"
#include "pedcoal/rng.hpp"
#include "pedcoal/xi.hpp"

namespace pedcoal {

/// Simulates the branching-coalescing node process from n roots: each
/// node splits at rate lambda while t < frag_cutoff, every node pair
/// merges at the Kingman mass, each atom fires at weight / <x,x> and
/// throws every node into its paintbox (nodes sharing an interval
/// merge), and the beta family fires at its rate with a fresh z per
/// event. Throws that merge nothing leave no event behind. Stops when
/// one node is left, when no event can ever fire again, or at the
/// horizon; the last two mark the graph truncated.
AncestralGraph simulate_graph(int n, const XiMeasure& xi, double lambda, double frag_cutoff,
                              double horizon, RandomStream& rng);

/// One locus on a frozen graph: walks start on the roots, follow merge
/// groups at coalescences, and at a split of their node move to the new
/// node or stay put on one shared fair bit. Splits of unoccupied nodes
/// draw nothing. Returns the co-location partition path on the graph's
/// clock; truncated when the walks never fully merge.
GenealogyPath walk_graph(const AncestralGraph& graph, RandomStream& rng);

/// Per-node event lists for running many loci on one big graph: a walk
/// pass touches only events at currently occupied nodes instead of
/// scanning the whole record.
class WalkIndex {
 public:
  explicit WalkIndex(const AncestralGraph& graph);

  const AncestralGraph& graph() const { return *graph_; }
  /// Events incident to `node`, ascending.
  std::span<const std::int32_t> events_at(std::int32_t node) const;

 private:
  const AncestralGraph* graph_;
  std::vector<std::int64_t> offsets_;
  std::vector<std::int32_t> incidence_;
};

/// Same walk, same draws, heap-driven over the index; agrees with the
/// plain scan call for call.
GenealogyPath walk_graph(const WalkIndex& index, RandomStream& rng);

/// Runs the graph representation and the label-partition representation
/// of the same split-merge process off one shared event stream: uniform
/// picks, merge throws, and split bits are drawn once and applied to
/// both. The graph side merges to the smallest node id, the label side
/// to the smallest label, with splinters taking fresh labels. Returns
/// (graph-side path, label-side path); the construction makes them
/// pointwise equal. No splitting cutoff: lambda stays on to the horizon.
std::pair<GenealogyPath, GenealogyPath> efc_coupled_walks(int n, const XiMeasure& xi,
                                                          double lambda, double horizon,
                                                          RandomStream& rng);

}  // namespace pedcoal
