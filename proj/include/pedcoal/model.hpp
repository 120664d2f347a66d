#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pedcoal/rng.hpp"

namespace pedcoal {

/// Monte Carlo estimate with its standard error.
struct McEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  long reps = 0;
};

/// One row of a finite offspring law: with probability `prob` the step has
/// `k` children drawing parents from `p` potential parents.
struct DemographyRow {
  int k;
  int p;
  double prob;
};

/// Finite (K,P) offspring-number law. Rows are kept in the given order;
/// probabilities must sum to 1 within 1e-12, k in {0..N}, p in {2..N}.
class Demography {
 public:
  Demography() = default;
  Demography(int n_individuals, std::vector<DemographyRow> rows);

  const std::vector<DemographyRow>& rows() const { return rows_; }
  double mean_k() const;
  int max_k() const;

 private:
  std::vector<DemographyRow> rows_;
};

/// Diploid population model: N individuals, per-child selfing probability,
/// and the offspring law of one backward time-step.
struct ModelParams {
  int n_individuals = 0;  // N
  double selfing = 0.0;   // per-child selfing probability
  Demography demography;

  static ModelParams moran(int n_individuals, double selfing);
  static ModelParams wright_fisher(int n_individuals, double selfing);
  /// Rare-big-event law: (1, N) with prob 1 - rho/(N(N-1)), else
  /// (floor(psi*N), 2) with prob rho/(N(N-1)).
  static ModelParams psi(int n_individuals, double psi, double rho, double selfing);
  static ModelParams sw(int n_individuals, double selfing, std::vector<DemographyRow> rows);
  /// Finite mixture of offspring laws; weights must sum to 1 within 1e-12.
  static ModelParams mixture(int n_individuals, double selfing,
                             std::vector<std::pair<Demography, double>> components);
};

/// One reproduction step. children[i] was born to the unordered parent
/// pair (parent_a[i], parent_b[i]) at the previous time-step; equal
/// entries mean selfing. Children are ascending, parents normalized a<=b.
struct OffspringStep {
  std::vector<std::int32_t> children;
  std::vector<std::int32_t> parent_a;
  std::vector<std::int32_t> parent_b;

  int k() const { return static_cast<int>(children.size()); }
  int selfing_count() const;
  bool is_child(int individual) const;  // binary search
  int child_slot(int individual) const; // -1 if not a child
};

/// Per-parent offspring tallies of one step: `selfed` children via
/// selfing, `outcross_slots` child-edges via outcrossing. The parent's
/// gene-copy transmission count is 2*selfed + outcross_slots.
struct ParentTally {
  std::int32_t individual;
  std::int32_t selfed;
  std::int32_t outcross_slots;
};

std::vector<ParentTally> parent_tallies(const OffspringStep& step);

/// Draw one reproduction step.
///
/// Draw order is fixed for reproducibility: demography row, children
/// subset, potential-parent subset (skipped when P == N), then per child
/// in ascending order a selfing bit and the parent draw(s).
OffspringStep sample_step(const ModelParams& params, RandomStream& rng);

/// Fixed pedigree: the realized backward step sequence of the
/// population's history. Steps are indexed 1..depth going backward in
/// time. Lazily extendable when constructed with a stream of its own.
class Pedigree {
 public:
  /// Lazily extendable pedigree fed by `stream` (a private copy).
  Pedigree(ModelParams params, RandomStream stream);
  /// Fixed-depth pedigree from explicit steps (not extendable).
  Pedigree(ModelParams params, std::vector<OffspringStep> steps);

  const ModelParams& params() const { return params_; }
  int depth() const { return depth_; }
  bool extendable() const { return extendable_; }
  /// Generate steps up to `depth` if extendable; otherwise require that
  /// the pedigree already covers it.
  void ensure_depth(int depth);

  /// Children / parents of step k (1-based), as parallel arrays.
  struct StepView {
    const std::int32_t* child;
    const std::int32_t* parent_a;
    const std::int32_t* parent_b;
    int count;
  };
  StepView step(int k) const;
  OffspringStep step_copy(int k) const;

  /// One line per step: "k;child:parentA,parentB;...".
  std::string to_text() const;
  static Pedigree from_text(ModelParams params, const std::string& text);

 private:
  ModelParams params_;
  RandomStream stream_;
  bool extendable_;
  int depth_ = 0;
  std::vector<std::uint32_t> offsets_;  // offsets_[k] .. offsets_[k+1] for step k+1
  std::vector<std::int32_t> child_;
  std::vector<std::int32_t> pa_;
  std::vector<std::int32_t> pb_;
  // scratch for the sampler
  std::vector<std::int32_t> scratch_;
};

/// Eagerly built pedigree of the given depth, consuming from `rng`.
Pedigree build_pedigree(const ModelParams& params, int depth, RandomStream& rng);

/// Pair-coalescence probability per step, closed form for the finite
/// offspring law.
double c2_closed_sw(const ModelParams& params);

/// Exact pair-coalescence probability of one realized step, averaged
/// over uniform placement of the two lineages.
double c2_step_value(const OffspringStep& step, int n_individuals);

/// Exact triple-coalescence probability of one realized step.
double c3_step_value(const OffspringStep& step, int n_individuals);

/// Monte Carlo average of c2_step_value over sampled steps (the general
/// pedigree form of the pair rate).
McEstimate c2_general_mc(const ModelParams& params, long reps, RandomStream& rng);

/// Pair-dispersal probability per step: (1 - selfing) E[K] / N.
double d_n(const ModelParams& params);

/// Monte Carlo average of c3_step_value over sampled steps.
McEstimate c3_mc(const ModelParams& params, long reps, RandomStream& rng);

/// Ranked nonzero gene-copy transmission fractions of one step: values
/// (2*selfed_i + outcross_slots_i) / 2N, descending. Sums to K/N.
std::vector<double> empirical_paintbox(const OffspringStep& step, int n_individuals);

}  // namespace pedcoal
