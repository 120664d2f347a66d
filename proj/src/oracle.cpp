#include "pedcoal/oracle.hpp"

#include <algorithm>
#include <bit>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>

namespace pedcoal {

namespace {

Rat rat_pow(const Rat& base, int e) {
  Rat out = 1;
  for (int i = 0; i < e; ++i) out *= base;
  return out;
}

/// E[binom(X, r)] for X ~ Binomial(n, q): binom(n, r) q^r.
Rat binom_factorial_moment(int n, int r, const Rat& q) {
  return binom_rat(n, r) * rat_pow(q, r);
}

void for_each_subset(int n, int k, const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> pick;
  std::function<void(int)> rec = [&](int start) {
    if (static_cast<int>(pick.size()) == k) {
      fn(pick);
      return;
    }
    for (int i = start; i <= n - (k - static_cast<int>(pick.size())); ++i) {
      pick.push_back(i);
      rec(i + 1);
      pick.pop_back();
    }
  };
  rec(0);
}

/// Full enumeration of one backward step from a marked configuration.
///
/// Occupied individuals get labels 0..m-1 (exchangeability makes the
/// choice immaterial); the rest of the population is labels m..N-1.
class LawBuilder {
 public:
  LawBuilder(const OracleParams& params, const MarkedPartition& state)
      : params_(params), state_(state) {
    const int b = state.partition().block_count();
    host_of_block_.assign(b, -1);
    for (int i = 0; i < b; ++i) {
      const int partner = state.partner_of(i);
      if (partner >= 0 && partner < i) {
        host_of_block_[i] = host_of_block_[partner];
        hosts_[host_of_block_[i]].second = i;
        continue;
      }
      host_of_block_[i] = static_cast<int>(hosts_.size());
      hosts_.push_back({i, -1});
    }
    if (static_cast<int>(hosts_.size()) > params.n_individuals)
      throw std::invalid_argument("one_step_law: more carriers than individuals");
  }

  OneStepLaw run() {
    const int n_pop = params_.n_individuals;
    const int m = static_cast<int>(hosts_.size());
    for (const auto& row : params_.rows) {
      if (row.prob == 0) continue;
      row_k_ = row.k;
      row_p_ = row.p;
      const Rat row_base = row.prob / binom_rat(n_pop, row.k);
      for (std::uint32_t tmask = 0; tmask < (1u << m); ++tmask) {
        const int t = std::popcount(tmask);
        if (t > row.k || row.k - t > n_pop - m) continue;
        tmask_ = tmask;
        children_.clear();
        for (int h = 0; h < m; ++h)
          if (tmask >> h & 1) children_.push_back(h);
        const Rat w_subset = row_base * binom_rat(n_pop - m, row.k - t);
        for (std::uint32_t smask = tmask;; smask = (smask - 1) & tmask) {
          const int s = std::popcount(smask);
          smask_ = smask;
          const Rat w_pattern = w_subset * rat_pow(params_.selfing, s) *
                                rat_pow(1 - params_.selfing, t - s);
          if (w_pattern != 0) {
            if (t == 0) {
              place_copy_bits(w_pattern);
            } else {
              const Rat w_ps = w_pattern / binom_rat(n_pop, row.p);
              for_each_subset(n_pop, row.p, [&](const std::vector<int>& ps) {
                ps_ = &ps;
                assign_parents(0, w_ps);
              });
            }
          }
          if (smask == 0) break;
        }
      }
    }
    OneStepLaw law;
    for (auto& [text, entry] : acc_) law.outcomes.push_back(std::move(entry));
    return law;
  }

 private:
  /// Pick parents for children_[idx..], then hand over to the copy-bit
  /// sweep. A cohabiting pair in an outcrossed child splits across the
  /// two parents (ordered enumeration covers both matchings at 1/2 each);
  /// a lone lineage in an outcrossed child goes to a uniform one of them.
  void assign_parents(std::size_t idx, const Rat& weight) {
    if (idx == children_.size()) {
      place_copy_bits(weight);
      return;
    }
    const auto [block_a, block_b] = hosts_[children_[idx]];
    const bool selfed = smask_ >> children_[idx] & 1;
    const auto& ps = *ps_;
    const int p = row_p_;
    if (selfed) {
      const Rat w = weight / p;
      for (int x : ps) {
        arrivals_.push_back({block_a, x});
        if (block_b >= 0) arrivals_.push_back({block_b, x});
        assign_parents(idx + 1, w);
        arrivals_.pop_back();
        if (block_b >= 0) arrivals_.pop_back();
      }
    } else if (block_b >= 0) {
      const Rat w = weight / (p * (p - 1));
      for (int x : ps)
        for (int y : ps) {
          if (x == y) continue;
          arrivals_.push_back({block_a, x});
          arrivals_.push_back({block_b, y});
          assign_parents(idx + 1, w);
          arrivals_.pop_back();
          arrivals_.pop_back();
        }
    } else {
      const Rat w = weight / p;
      for (int x : ps) {
        arrivals_.push_back({block_a, x});
        assign_parents(idx + 1, w);
        arrivals_.pop_back();
      }
    }
  }

  /// Every arriving lineage lands on a fresh uniform copy of its
  /// destination; carried-over lineages keep their copies.
  void place_copy_bits(const Rat& weight) {
    const auto a = static_cast<int>(arrivals_.size());
    const Rat w = weight / rat_pow(2, a);
    for (std::uint32_t bits = 0; bits < (1u << a); ++bits) record(w, bits);
  }

  void record(const Rat& weight, std::uint32_t bits) {
    // label -> block-index sets on the two copies
    std::map<int, std::array<std::uint64_t, 2>> occupancy;
    const int m = static_cast<int>(hosts_.size());
    for (int h = 0; h < m; ++h) {
      if (tmask_ >> h & 1) continue;  // replaced; its lineages moved out
      auto& slot = occupancy[h];
      slot[0] |= std::uint64_t{1} << hosts_[h].first;
      if (hosts_[h].second >= 0) slot[1] |= std::uint64_t{1} << hosts_[h].second;
    }
    for (std::size_t i = 0; i < arrivals_.size(); ++i)
      occupancy[arrivals_[i].second][bits >> i & 1] |= std::uint64_t{1} << arrivals_[i].first;

    std::vector<std::uint64_t> masks;
    std::vector<std::pair<std::uint64_t, std::uint64_t>> pair_masks;
    const auto& blocks = state_.partition().blocks();
    for (const auto& [label, slot] : occupancy) {
      std::uint64_t merged[2] = {0, 0};
      for (int copy = 0; copy < 2; ++copy)
        for (std::uint64_t rest = slot[copy]; rest;) {
          const int block = std::countr_zero(rest);
          rest &= rest - 1;
          merged[copy] |= blocks[block];
        }
      if (merged[0] && merged[1]) pair_masks.push_back({merged[0], merged[1]});
      if (merged[0]) masks.push_back(merged[0]);
      if (merged[1]) masks.push_back(merged[1]);
    }

    Partition next(state_.partition().ground_size(), masks);
    std::vector<std::pair<int, int>> pairs;
    auto index_of = [&](std::uint64_t mask) {
      for (int i = 0; i < next.block_count(); ++i)
        if (next.block_mask(i) == mask) return i;
      throw std::logic_error("one_step_law: lost a block");
    };
    for (const auto& [ma, mb] : pair_masks) {
      int i = index_of(ma), j = index_of(mb);
      if (i > j) std::swap(i, j);
      pairs.push_back({i, j});
    }
    std::sort(pairs.begin(), pairs.end());
    MarkedPartition out(std::move(next), std::move(pairs));

    auto [it, fresh] = acc_.try_emplace(out.to_text(), out, Rat(0));
    it->second.second += weight;
  }

  const OracleParams& params_;
  const MarkedPartition& state_;
  std::vector<std::pair<int, int>> hosts_;  // (block, partner block or -1)
  std::vector<int> host_of_block_;
  std::vector<int> children_;
  std::vector<std::pair<int, int>> arrivals_;  // (block, destination label)
  const std::vector<int>* ps_ = nullptr;
  std::uint32_t tmask_ = 0, smask_ = 0;
  int row_k_ = 0, row_p_ = 0;
  std::map<std::string, std::pair<MarkedPartition, Rat>> acc_;
};

}  // namespace

Rat binom_rat(long n, long r) {
  if (r < 0 || r > n || n < 0) return 0;
  r = std::min(r, n - r);
  boost::multiprecision::cpp_int result = 1;
  for (long i = 1; i <= r; ++i) {
    result *= n - r + i;
    result /= i;
  }
  return Rat(result);
}

OracleParams OracleParams::moran(int n_individuals, Rat selfing) {
  return {n_individuals, std::move(selfing), {{1, n_individuals, 1}}};
}

OracleParams OracleParams::wright_fisher(int n_individuals, Rat selfing) {
  return {n_individuals, std::move(selfing), {{n_individuals, n_individuals, 1}}};
}

OracleParams OracleParams::psi(int n_individuals, Rat frac, Rat rho, Rat selfing) {
  const Rat big = rho / (Rat(n_individuals) * (n_individuals - 1));
  const Rat scaled = frac * n_individuals;
  const auto kbig =
      static_cast<int>(boost::multiprecision::numerator(scaled) /
                       boost::multiprecision::denominator(scaled));
  return {n_individuals, std::move(selfing),
          {{1, n_individuals, 1 - big}, {kbig, 2, big}}};
}

OracleParams OracleParams::from_model(const ModelParams& params) {
  OracleParams out;
  out.n_individuals = params.n_individuals;
  out.selfing = Rat(params.selfing);
  Rat total = 0;
  for (const auto& row : params.demography.rows()) {
    out.rows.push_back({row.k, row.p, Rat(row.prob)});
    total += out.rows.back().prob;
  }
  for (auto& row : out.rows) row.prob /= total;
  return out;
}

ModelParams OracleParams::to_model() const {
  std::vector<DemographyRow> rows;
  for (const auto& row : this->rows)
    rows.push_back({row.k, row.p, static_cast<double>(row.prob)});
  return ModelParams::sw(n_individuals, static_cast<double>(selfing), std::move(rows));
}

Rat OracleParams::mean_k() const {
  Rat m = 0;
  for (const auto& row : rows) m += row.prob * row.k;
  return m;
}

void OracleParams::validate() const {
  if (n_individuals < 2) throw std::invalid_argument("oracle: population too small");
  if (selfing < 0 || selfing > 1)
    throw std::invalid_argument("oracle: selfing probability out of range");
  if (rows.empty()) throw std::invalid_argument("oracle: no demography rows");
  Rat total = 0;
  for (const auto& row : rows) {
    if (row.k < 0 || row.k > n_individuals || row.p < 2 || row.p > n_individuals ||
        row.prob < 0)
      throw std::invalid_argument("oracle: bad demography row");
    total += row.prob;
  }
  if (total != 1) throw std::invalid_argument("oracle: row probabilities must sum to 1");
}

Rat pair_rate_exact(const OracleParams& params) {
  params.validate();
  const Rat n = params.n_individuals;
  Rat total = 0;
  for (const auto& row : params.rows) {
    const Rat k = row.k;
    total += row.prob * (k / n * ((n - k) / (n - 1)) / n +
                         k * (k - 1) / (n * (n - 1)) / (2 * row.p));
  }
  return total;
}

Rat pair_rate_tally_exact(const OracleParams& params) {
  params.validate();
  const Rat n = params.n_individuals;
  Rat total = 0;
  for (const auto& row : params.rows) {
    const int k = row.k;
    const Rat inv_p = Rat(1) / row.p;
    Rat bracket = 0;  // E[(1/16) sum_i (V~_i^2 - V~_i) - S/8 | this row]
    for (int s = 0; s <= k; ++s) {
      const int q = k - s;
      const Rat w = binom_rat(k, s) * rat_pow(params.selfing, s) *
                    rat_pow(1 - params.selfing, q);
      if (w == 0) continue;
      const Rat ev = s * inv_p;
      const Rat ev2 = s * inv_p + Rat(s) * (s - 1) * inv_p * inv_p;
      const Rat eu = 2 * q * inv_p;
      const Rat eu2 = 2 * q * inv_p + Rat(4) * q * (q - 1) * inv_p * inv_p;
      const Rat sum_i = row.p * (4 * ev2 + 4 * ev * eu + eu2 - 2 * ev - eu);
      bracket += w * (sum_i / 16 - Rat(s) / 8);
    }
    total += row.prob * ((n - k) * k / (n * n * (n - 1)) + bracket / binom_rat(params.n_individuals, 2));
  }
  return total;
}

Rat dispersal_rate_exact(const OracleParams& params) {
  params.validate();
  return (1 - params.selfing) * params.mean_k() / params.n_individuals;
}

Rat triple_rate_exact(const OracleParams& params) {
  params.validate();
  const Rat n = params.n_individuals;
  Rat total = 0;
  for (const auto& row : params.rows) {
    const int k = row.k;
    const Rat inv_p = Rat(1) / row.p;
    for (int s = 0; s <= k; ++s) {
      const int q = k - s;
      const Rat w = binom_rat(k, s) * rat_pow(params.selfing, s) *
                    rat_pow(1 - params.selfing, q);
      if (w == 0) continue;
      const Rat ev = s * inv_p;
      const Rat eu = 2 * q * inv_p;
      // Carried-parent shape: the carried copy is the fixed target.
      // All-newborn shape: any common copy works, hence the doubled
      // per-term coefficients relative to the carried-parent shape.
      const Rat pair_terms = binom_factorial_moment(s, 2, inv_p) / 4 + ev * eu / 8 +
                             binom_factorial_moment(q, 2, 2 * inv_p) / 16;
      const Rat triple_terms =
          binom_factorial_moment(s, 3, inv_p) / 4 +
          binom_factorial_moment(s, 2, inv_p) * eu / 8 +
          ev * binom_factorial_moment(q, 2, 2 * inv_p) / 16 +
          binom_factorial_moment(q, 3, 2 * inv_p) / 32;
      total += row.prob * w * row.p * ((n - k) / n * pair_terms + triple_terms);
    }
  }
  return total / binom_rat(params.n_individuals, 3);
}

Rat OneStepLaw::mass_of(const MarkedPartition& state) const {
  for (const auto& [outcome, prob] : outcomes)
    if (outcome == state) return prob;
  return 0;
}

Rat OneStepLaw::total() const {
  Rat sum = 0;
  for (const auto& [outcome, prob] : outcomes) sum += prob;
  return sum;
}

OneStepLaw one_step_law(const OracleParams& params, const MarkedPartition& state) {
  params.validate();
  if (state.partition().block_count() == 0)
    throw std::invalid_argument("one_step_law: empty configuration");
  return LawBuilder(params, state).run();
}

PairChain pair_chain(const OracleParams& params) {
  const auto distinct = MarkedPartition::from_text("{1|2}");
  const auto paired = MarkedPartition::from_text("{1|2}[(1,2)]");
  const auto merged = MarkedPartition::from_text("{1,2}");
  const auto law_d = one_step_law(params, distinct);
  const auto law_r = one_step_law(params, paired);
  PairChain chain{law_d.mass_of(distinct), law_d.mass_of(paired), law_d.mass_of(merged),
                  law_r.mass_of(distinct), law_r.mass_of(paired), law_r.mass_of(merged)};
  if (chain.d_to_d + chain.d_to_r + chain.d_to_m != 1 ||
      chain.r_to_d + chain.r_to_r + chain.r_to_m != 1)
    throw std::logic_error("pair_chain: unexpected outcome outside the three states");
  return chain;
}

Rat pair_chain_mean_absorption(const PairChain& chain, bool from_paired) {
  // E_d = 1 + dd E_d + dr E_r; E_r = 1 + rd E_d + rr E_r
  const Rat denom_r = 1 - chain.r_to_r;
  const Rat e_d = (1 + chain.d_to_r / denom_r) /
                  (1 - chain.d_to_d - chain.d_to_r * chain.r_to_d / denom_r);
  if (!from_paired) return e_d;
  return (1 + chain.r_to_d * e_d) / denom_r;
}

std::vector<Rat> pair_chain_absorption_cdf(const PairChain& chain, int max_steps) {
  std::vector<Rat> cdf;
  Rat at_d = 1, at_r = 0;
  cdf.push_back(0);
  for (int t = 1; t <= max_steps; ++t) {
    const Rat next_d = at_d * chain.d_to_d + at_r * chain.r_to_d;
    const Rat next_r = at_d * chain.d_to_r + at_r * chain.r_to_r;
    at_d = next_d;
    at_r = next_r;
    cdf.push_back(1 - at_d - at_r);
  }
  return cdf;
}

OracleMoments oracle_moments(const OracleParams& params, int n) {
  if (n < 2 || n > 3) throw std::invalid_argument("oracle_moments: n must be 2 or 3");
  if (n > params.n_individuals) {
    throw std::invalid_argument("oracle_moments: sample exceeds the population");
  }
  OracleMoments out;
  out.c2 = one_step_law(params, MarkedPartition::singletons(2))
               .mass_of(MarkedPartition(Partition::one_block(2)));
  const MarkedPartition cohabiting(Partition::singletons(2), {{0, 1}});
  out.d = one_step_law(params, cohabiting).mass_of(MarkedPartition::singletons(2));
  if (n == 3) {
    out.c3 = one_step_law(params, MarkedPartition::singletons(3))
                 .mass_of(MarkedPartition(Partition::one_block(3)));
  }
  return out;
}

}  // namespace pedcoal
