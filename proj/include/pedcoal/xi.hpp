#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace pedcoal {

/// One multiple-merger component: an event fires at rate
/// weight / <x,x> and throws every lineage into interval i of the
/// paintbox with probability x_i (leftover mass is dust). Lineages
/// sharing an interval merge.
struct PaintboxAtom {
  double weight = 0.0;
  std::vector<double> paintbox;
};

/// Continuous family of paintbox atoms (z/2, z/2) with z drawn from
/// Beta(2 - r, r). The weight density z^2/2 cancels against <x,x>,
/// so events fire at total rate `rate` with a fresh z each time.
struct BetaComponent {
  double r = 0.5;
  double rate = 0.0;
};

/// Finite coalescence measure: a Kingman mass (every pair merges at
/// this rate) plus finitely many paintbox atoms and an optional
/// beta family.
struct XiMeasure {
  double kingman_mass = 0.0;
  std::vector<PaintboxAtom> atoms;
  std::optional<BetaComponent> beta;

  /// Throws invalid_argument unless masses are nonnegative, every
  /// paintbox is nonincreasing with entries in [0,1], total at most 1
  /// and at least one positive entry, and any beta parameter lies in
  /// [0,1].
  void validate() const;

  /// Total mass of the non-Kingman components.
  double merger_mass() const;
};

/// Row of a mixture demography: one reproductive sweep fills m parents
/// with an x fraction of the population.
struct SwMixtureRow {
  double x = 0.0;
  int m = 1;
  double weight = 0.0;
};

/// Named limit families. `lambda` is the per-lineage fragmentation
/// rate and rides along for graph simulation; it never enters the
/// coalescence measure itself.
struct PresetKind {
  enum class Tag { kArg, kPsi, kBeta, kSwMixture, kMixed };

  Tag tag = Tag::kArg;
  double lambda = 0.0;
  double psi = 0.0;
  double rho = 0.0;
  double r = 0.0;
  std::vector<SwMixtureRow> rows;
  std::vector<std::pair<XiMeasure, double>> parts;

  static PresetKind arg(double lambda);
  static PresetKind psi_model(double psi, double rho, double lambda);
  static PresetKind beta_model(double r, double rho, double lambda);
  static PresetKind sw_mixture(std::vector<SwMixtureRow> rows, double lambda);
  /// Linear combination: each part's measure is scaled and summed.
  static PresetKind mixed(std::vector<std::pair<XiMeasure, double>> parts, double lambda);
};

/// Builds the coalescence measure of a named family.
///   ARG:       Kingman mass 2, nothing else.
///   Psi:       Kingman mass 2 plus one atom of weight psi^2/2 at
///              (psi/2, psi/2); rho is accepted but plays no role.
///   Beta:      Kingman mass 2 plus the beta family (r, rho).
///   SwMixture: each row (x, m, w) contributes an atom of weight
///              2*w*x^2/m at (x/m repeated m times); the Kingman mass
///              is the complementary 2*(1 - sum w*x^2/m).
///   Mixed:     componentwise scaled sum of the given measures.
XiMeasure preset(const PresetKind& kind);

/// Jump rate of the b-lineage coalescent for the transition merging
/// groups of the given sizes (each >= 2) and leaving s singletons;
/// sizes and s must account for all b lineages. The Kingman mass
/// contributes only to the single-pair transition. The beta term is
/// integrated numerically to relative tolerance 1e-9.
double xi_rate(int b, std::vector<int> merge_sizes, int s, const XiMeasure& xi);

/// Probability that throwing `count` lineages into the paintbox merges
/// none of them. Used for exit-rate checks and shares the assignment
/// arithmetic with xi_rate.
double paintbox_no_merge(const std::vector<double>& paintbox, int count);

/// Expectation of f(z) under Beta(2 - r, r) to relative tolerance
/// 1e-9, with the z -> 1 endpoint singularity removed analytically.
/// r = 0 degenerates to the point mass at z = 1.
double beta_family_mean(double r, double (*f)(double, const void*), const void* ctx);

}  // namespace pedcoal
