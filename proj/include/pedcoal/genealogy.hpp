#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pedcoal/graph.hpp"
#include "pedcoal/model.hpp"
#include "pedcoal/partition.hpp"
#include "pedcoal/rng.hpp"

namespace pedcoal {

/// The sampled gene copies: one copy from each listed individual
/// (0-based, distinct). Partition element i refers to entry i-1.
struct SampleConfig {
  std::vector<std::int32_t> individuals;

  static SampleConfig first_n(int n);
  int size() const { return static_cast<int>(individuals.size()); }
};

/// Throws std::invalid_argument unless 2 <= n <= min(N, 64) with
/// distinct in-range individuals.
void validate_sample(const SampleConfig& sample, int n_individuals);

/// Lineage configuration at one time-step: the grouping of sampled copies
/// into lineages plus each block's carrier individual. Two blocks carried
/// by one individual sit on its two gene copies and are marked as a pair.
struct AncestralState {
  MarkedPartition marked;
  std::vector<std::int32_t> hosts;  // canonical block index -> individual

  bool operator==(const AncestralState&) const = default;
};

/// Step-indexed history of the lineage configuration, stored as change
/// points: change j is in force from its step until the next change.
/// A change at step 0 is always present.
class AncestralPath {
 public:
  AncestralPath() = default;
  explicit AncestralPath(AncestralState initial);

  int depth() const { return depth_; }
  /// Extend coverage through step `depth` with no state change.
  void extend_to(int depth);
  /// Record `state` in force from step `k`, past all previous changes.
  void push_change(int k, AncestralState state);

  int change_count() const { return static_cast<int>(steps_.size()); }
  int change_step(int j) const { return steps_.at(static_cast<std::size_t>(j)); }
  const AncestralState& change_state(int j) const {
    return states_.at(static_cast<std::size_t>(j));
  }

  /// State in force at step k, 0 <= k <= depth.
  const AncestralState& at(int k) const;
  bool absorbed() const;
  /// First step whose state is a single block; -1 when never absorbed.
  int absorption_step() const;

  /// One "step: partition @ carriers" line per change point.
  std::string debug_text() const;

 private:
  std::vector<int> steps_;
  std::vector<AncestralState> states_;
  int depth_ = 0;
};

/// Throws std::logic_error when the path breaks an invariant: pairing
/// out of sync with carriers, a non-coarsening partition step, or a
/// paired start.
void validate_path(const AncestralPath& path);

/// Continuous-time genealogy: partition jumps on the coalescent time
/// scale, first jump (0, singletons). `truncated` marks a path that ran
/// out of pedigree before absorbing.
struct GenealogyJump {
  double time;
  Partition partition;

  bool operator==(const GenealogyJump&) const = default;
};

struct GenealogyPath {
  std::vector<GenealogyJump> jumps;
  double horizon = 0.0;
  bool truncated = false;

  bool absorbed() const {
    return !jumps.empty() && jumps.back().partition.is_single_block();
  }
  /// Time of the final merger; requires absorbed().
  double absorption_time() const;
  /// CSV rows "locus,time,partition", one per jump, partition quoted.
  std::string to_csv_rows(int locus) const;

  bool operator==(const GenealogyPath&) const = default;
};

/// One backward step of a lineage configuration through a realized
/// reproduction step.
///
/// Movement: a block carried by a non-child keeps its individual and its
/// gene copy; blocks in a selfed child all move to the one parent; a lone
/// block in an outcrossed child picks a parent with a fair bit; a
/// cohabiting pair in an outcrossed child splits onto the two parents
/// (the child's copies came one from each), with one fair bit deciding
/// which block goes to the lower-labeled parent. Each block arriving in
/// an individual lands on a fair fresh gene copy; blocks on one copy
/// merge for good, blocks on opposite copies become a marked pair.
///
/// Draw order, fixed for reproducibility: child-carried blocks by
/// ascending carrier individual; within one carrier, ascending block
/// index; a selfed block draws one copy bit; a lone outcrossed block
/// draws a parent bit then a copy bit; a cohabiting outcrossed pair
/// draws one matching bit, then the lower block's copy bit, then the
/// upper's. Steps moving nothing draw nothing.
AncestralState advance_state(const AncestralState& state, Pedigree::StepView step,
                             RandomStream& rng);

/// Walk the sample's lineages backward through the pedigree until they
/// fully coalesce or `max_steps` is hit. max_steps -1 means the stored
/// depth; extendable pedigrees then need an explicit bound. A fixed
/// pedigree shallower than max_steps truncates at its depth. The
/// returned path always spans the whole window, absorbed or not.
AncestralPath trace_lineages(Pedigree& pedigree, const SampleConfig& sample, RandomStream& rng,
                             int max_steps = -1);

/// Replace every stretch spent in paired states by the last pair-free
/// state, so cohabitation intervals collapse and only their resolutions
/// remain visible.
AncestralPath time_change(const AncestralPath& path);

/// Map step k to time k * c_n and project states through the haploid
/// map, emitting a jump whenever the visible partition changes. The
/// visible sequence must coarsen; time-changed paths always do, paths
/// with unresolved pairings may not.
GenealogyPath rescale(const AncestralPath& path, double c_n);

/// Per-locus genealogies on one shared pedigree: independent traces,
/// each time-changed and rescaled by the model's pair-coalescence
/// probability. Locus j draws from rng.child(j). max_steps -1 means
/// ceil(20 / c_N) steps for an extendable pedigree, the stored depth
/// otherwise.
std::vector<GenealogyPath> quenched_replicates(Pedigree& pedigree, const SampleConfig& sample,
                                               int loci, const RandomStream& rng,
                                               int max_steps = -1);

/// Deterministic sweep of every trajectory the sample's lineages could
/// take: one node per possibly-ancestral individual. An outcrossed child
/// node fragments into its two parents; nodes landing on one individual
/// merge. Fragmentations within a step are recorded in ascending node
/// order, then one coalescence event merges collisions. Event times are
/// step indices; max_steps as in trace_lineages.
AncestralGraph discrete_ancestral_graph(Pedigree& pedigree, const SampleConfig& sample,
                                        int max_steps = -1);

}  // namespace pedcoal
