#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <utility>
#include <vector>

#include "pedcoal/model.hpp"
#include "pedcoal/partition.hpp"

namespace pedcoal {

using Rat = boost::multiprecision::cpp_rational;

/// Binomial coefficient as an exact rational; 0 when r < 0 or r > n.
Rat binom_rat(long n, long r);

struct OracleRow {
  int k;
  int p;
  Rat prob;
};

/// Exact-arithmetic twin of ModelParams for the verification oracle.
/// Row probabilities must sum to exactly 1.
struct OracleParams {
  int n_individuals = 0;
  Rat selfing;
  std::vector<OracleRow> rows;

  static OracleParams moran(int n_individuals, Rat selfing);
  static OracleParams wright_fisher(int n_individuals, Rat selfing);
  static OracleParams psi(int n_individuals, Rat frac, Rat rho, Rat selfing);
  /// Exact copy of double-precision params: each probability becomes its
  /// exact binary rational, then rows are renormalized by the exact sum.
  static OracleParams from_model(const ModelParams& params);
  ModelParams to_model() const;

  Rat mean_k() const;
  void validate() const;
};

/// Closed-form pair-coalescence probability per step.
Rat pair_rate_exact(const OracleParams& params);

/// Pair rate through the transmission-tally expectation. Algebraically
/// equal to pair_rate_exact; computed by an independent route.
Rat pair_rate_tally_exact(const OracleParams& params);

/// Pair-dispersal probability per step.
Rat dispersal_rate_exact(const OracleParams& params);

/// Probability that three lineages in three distinct individuals merge
/// into one in a single step.
Rat triple_rate_exact(const OracleParams& params);

/// Exact one-step law of the lineage configuration chain, computed by
/// brute-force enumeration of every step outcome. Blocks of the state
/// are lineage groups; marked pairs share a diploid individual.
/// Intended for small populations and small samples.
struct OneStepLaw {
  std::vector<std::pair<MarkedPartition, Rat>> outcomes;

  Rat mass_of(const MarkedPartition& state) const;
  Rat total() const;
};

OneStepLaw one_step_law(const OracleParams& params, const MarkedPartition& state);

/// Two-lineage chain on {distinct carriers, one carrier, merged}, exact
/// one-step transition probabilities.
struct PairChain {
  Rat d_to_d, d_to_r, d_to_m;
  Rat r_to_d, r_to_r, r_to_m;
};

PairChain pair_chain(const OracleParams& params);

/// Expected steps to absorption in the merged state.
Rat pair_chain_mean_absorption(const PairChain& chain, bool from_paired);

/// P(absorbed by step t) for t = 0..max_steps, from the distinct state.
std::vector<Rat> pair_chain_absorption_cdf(const PairChain& chain, int max_steps);

/// One-step moment bundle by the enumeration route: pair coalescence
/// and dispersal, plus the triple coalescence when n is 3.
struct OracleMoments {
  Rat c2;
  Rat c3;
  Rat d;
};

OracleMoments oracle_moments(const OracleParams& params, int n);

}  // namespace pedcoal
