#include "pedcoal/genealogy.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace pedcoal {

namespace {

std::string quote_if_comma(const std::string& text) {
  if (text.find(',') == std::string::npos) return text;
  return '"' + text + '"';
}

// 0-based slot of `individual` among the step's children, -1 when absent.
int child_slot_of(Pedigree::StepView step, std::int32_t individual) {
  const auto* base = step.child;
  const auto* end = base + step.count;
  const auto* it = std::lower_bound(base, end, individual);
  return (it != end && *it == individual) ? static_cast<int>(it - base) : -1;
}

struct BlockDest {
  std::int32_t individual;
  std::uint8_t copy;
};

// Per-step kernel with reusable scratch so long traces avoid churn.
struct Mover {
  struct Carrier {
    std::int32_t individual;
    std::int8_t lo;
    std::int8_t hi;  // -1 when the carrier holds a single block
  };
  struct Occupied {
    std::int32_t individual;
    std::uint64_t copy_mask[2];
  };
  struct Rec {
    std::uint64_t mask;
    std::int32_t host;
    std::int8_t mate;  // pre-sort index of the paired record, -1 if none
  };

  std::vector<Carrier> carriers;
  std::vector<BlockDest> dest;
  std::vector<Occupied> occ;
  std::vector<Rec> recs;
  std::vector<int> order, pos;
  std::vector<std::uint64_t> masks;
  std::vector<std::int32_t> hosts;
  std::vector<std::pair<int, int>> pairs;

  // Advances `state` through one reproduction step. Returns false and
  // leaves `state` untouched when the step changes nothing.
  bool advance(AncestralState& state, Pedigree::StepView step, RandomStream& rng) {
    const Partition& part = state.marked.partition();
    const int bc = part.block_count();

    carriers.clear();
    for (int b = 0; b < bc; ++b) {
      const std::int32_t h = state.hosts[static_cast<std::size_t>(b)];
      bool found = false;
      for (auto& c : carriers) {
        if (c.individual != h) continue;
        if (c.hi >= 0) throw std::logic_error("lineage state: three blocks in one carrier");
        c.hi = static_cast<std::int8_t>(b);
        found = true;
        break;
      }
      if (!found) carriers.push_back({h, static_cast<std::int8_t>(b), -1});
    }
    std::sort(carriers.begin(), carriers.end(),
              [](const Carrier& x, const Carrier& y) { return x.individual < y.individual; });

    dest.assign(static_cast<std::size_t>(bc), BlockDest{});
    bool any_child = false;
    for (const auto& c : carriers) {
      const int slot = child_slot_of(step, c.individual);
      if (slot < 0) {
        dest[static_cast<std::size_t>(c.lo)] = {c.individual, 0};
        if (c.hi >= 0) dest[static_cast<std::size_t>(c.hi)] = {c.individual, 1};
        continue;
      }
      any_child = true;
      const std::int32_t pa = step.parent_a[slot];
      const std::int32_t pb = step.parent_b[slot];
      if (pa == pb) {
        dest[static_cast<std::size_t>(c.lo)] = {pa, static_cast<std::uint8_t>(rng.next_bit())};
        if (c.hi >= 0) {
          dest[static_cast<std::size_t>(c.hi)] = {pa, static_cast<std::uint8_t>(rng.next_bit())};
        }
      } else if (c.hi < 0) {
        const std::int32_t parent = rng.next_bit() ? pb : pa;
        dest[static_cast<std::size_t>(c.lo)] = {parent,
                                                static_cast<std::uint8_t>(rng.next_bit())};
      } else {
        // The cohabiting pair rides the child's two copies, one from each
        // parent; the only freedom is which block traces to which parent.
        const bool swapped = rng.next_bit();
        dest[static_cast<std::size_t>(c.lo)] = {swapped ? pb : pa,
                                                static_cast<std::uint8_t>(rng.next_bit())};
        dest[static_cast<std::size_t>(c.hi)] = {swapped ? pa : pb,
                                                static_cast<std::uint8_t>(rng.next_bit())};
      }
    }
    if (!any_child) return false;

    occ.clear();
    for (int b = 0; b < bc; ++b) {
      const BlockDest d = dest[static_cast<std::size_t>(b)];
      Occupied* entry = nullptr;
      for (auto& e : occ) {
        if (e.individual == d.individual) {
          entry = &e;
          break;
        }
      }
      if (!entry) {
        occ.push_back({d.individual, {0, 0}});
        entry = &occ.back();
      }
      entry->copy_mask[d.copy] |= part.block_mask(b);
    }

    recs.clear();
    for (const auto& e : occ) {
      if (e.copy_mask[0] != 0 && e.copy_mask[1] != 0) {
        const auto base = static_cast<std::int8_t>(recs.size());
        recs.push_back({e.copy_mask[0], e.individual, static_cast<std::int8_t>(base + 1)});
        recs.push_back({e.copy_mask[1], e.individual, base});
      } else {
        recs.push_back({e.copy_mask[0] | e.copy_mask[1], e.individual, -1});
      }
    }

    const int rc = static_cast<int>(recs.size());
    order.resize(static_cast<std::size_t>(rc));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int x, int y) {
      return std::countr_zero(recs[static_cast<std::size_t>(x)].mask) <
             std::countr_zero(recs[static_cast<std::size_t>(y)].mask);
    });
    pos.resize(static_cast<std::size_t>(rc));
    for (int i = 0; i < rc; ++i) pos[static_cast<std::size_t>(order[i])] = i;

    masks.clear();
    hosts.clear();
    pairs.clear();
    for (int i = 0; i < rc; ++i) {
      const Rec& r = recs[static_cast<std::size_t>(order[i])];
      masks.push_back(r.mask);
      hosts.push_back(r.host);
      if (r.mate >= 0) {
        const int match = pos[static_cast<std::size_t>(r.mate)];
        if (match > i) pairs.emplace_back(i, match);
      }
    }

    if (masks == part.blocks() && pairs == state.marked.pairs() && hosts == state.hosts) {
      return false;
    }
    state.marked = MarkedPartition(Partition(part.ground_size(), masks), pairs);
    state.hosts = hosts;
    return true;
  }
};

}  // namespace

SampleConfig SampleConfig::first_n(int n) {
  SampleConfig cfg;
  cfg.individuals.resize(static_cast<std::size_t>(std::max(n, 0)));
  std::iota(cfg.individuals.begin(), cfg.individuals.end(), 0);
  return cfg;
}

void validate_sample(const SampleConfig& sample, int n_individuals) {
  const int n = sample.size();
  if (n < 2) throw std::invalid_argument("sample: need at least two gene copies");
  if (n > n_individuals) {
    throw std::invalid_argument("sample: more copies than individuals");
  }
  if (n > 64) throw std::invalid_argument("sample: more than 64 copies unsupported");
  std::vector<std::int32_t> seen(sample.individuals);
  std::sort(seen.begin(), seen.end());
  if (seen.front() < 0 || seen.back() >= n_individuals) {
    throw std::invalid_argument("sample: individual out of range");
  }
  if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) {
    throw std::invalid_argument("sample: individuals must be distinct");
  }
}

AncestralPath::AncestralPath(AncestralState initial) {
  steps_.push_back(0);
  states_.push_back(std::move(initial));
}

void AncestralPath::extend_to(int depth) {
  if (depth > depth_) depth_ = depth;
}

void AncestralPath::push_change(int k, AncestralState state) {
  if (steps_.empty()) {
    if (k != 0) throw std::invalid_argument("ancestral path: first change must sit at step 0");
  } else if (k <= steps_.back()) {
    throw std::invalid_argument("ancestral path: change steps must increase");
  }
  steps_.push_back(k);
  states_.push_back(std::move(state));
  if (k > depth_) depth_ = k;
}

const AncestralState& AncestralPath::at(int k) const {
  if (steps_.empty() || k < 0 || k > depth_) {
    throw std::out_of_range("ancestral path: step out of range");
  }
  const auto it = std::upper_bound(steps_.begin(), steps_.end(), k);
  return states_[static_cast<std::size_t>(it - steps_.begin()) - 1];
}

bool AncestralPath::absorbed() const {
  return !states_.empty() && states_.back().marked.partition().is_single_block();
}

int AncestralPath::absorption_step() const {
  for (std::size_t j = 0; j < states_.size(); ++j) {
    if (states_[j].marked.partition().is_single_block()) return steps_[j];
  }
  return -1;
}

std::string AncestralPath::debug_text() const {
  std::string out;
  for (std::size_t j = 0; j < states_.size(); ++j) {
    out += std::to_string(steps_[j]);
    out += ": ";
    out += states_[j].marked.to_text();
    out += " @ ";
    for (std::size_t b = 0; b < states_[j].hosts.size(); ++b) {
      if (b > 0) out += ',';
      out += std::to_string(states_[j].hosts[b]);
    }
    out += '\n';
  }
  out += "depth ";
  out += std::to_string(depth_);
  out += '\n';
  return out;
}

void validate_path(const AncestralPath& path) {
  if (path.change_count() == 0) throw std::logic_error("ancestral path: no states");
  if (path.change_step(0) != 0) throw std::logic_error("ancestral path: missing step 0");
  if (path.change_state(0).marked.has_pairs()) {
    throw std::logic_error("ancestral path: paired at step 0");
  }
  for (int j = 0; j < path.change_count(); ++j) {
    const AncestralState& s = path.change_state(j);
    const Partition& part = s.marked.partition();
    const int bc = part.block_count();
    if (static_cast<int>(s.hosts.size()) != bc) {
      throw std::logic_error("ancestral path: carrier list out of sync");
    }
    for (int a = 0; a < bc; ++a) {
      for (int b = a + 1; b < bc; ++b) {
        const bool same_host = s.hosts[static_cast<std::size_t>(a)] ==
                               s.hosts[static_cast<std::size_t>(b)];
        const bool paired = s.marked.partner_of(a) == b;
        if (same_host != paired) {
          throw std::logic_error("ancestral path: pairing out of sync with carriers");
        }
      }
    }
    if (j == 0) continue;
    const Partition& before = path.change_state(j - 1).marked.partition();
    for (int b = 0; b < before.block_count(); ++b) {
      const std::uint64_t mask = before.block_mask(b);
      const int e = std::countr_zero(mask) + 1;
      if ((mask & ~part.block_mask(part.block_of(e))) != 0) {
        throw std::logic_error("ancestral path: partition does not coarsen");
      }
    }
  }
}

double GenealogyPath::absorption_time() const {
  if (!absorbed()) throw std::logic_error("genealogy path: lineages never fully coalesced");
  return jumps.back().time;
}

std::string GenealogyPath::to_csv_rows(int locus) const {
  std::string out;
  char buf[40];
  for (const GenealogyJump& jump : jumps) {
    std::snprintf(buf, sizeof(buf), "%.17g", jump.time);
    out += std::to_string(locus);
    out += ',';
    out += buf;
    out += ',';
    out += quote_if_comma(jump.partition.to_text());
    out += '\n';
  }
  return out;
}

AncestralState advance_state(const AncestralState& state, Pedigree::StepView step,
                             RandomStream& rng) {
  AncestralState out = state;
  Mover mover;
  mover.advance(out, step, rng);
  return out;
}

AncestralPath trace_lineages(Pedigree& pedigree, const SampleConfig& sample, RandomStream& rng,
                             int max_steps) {
  validate_sample(sample, pedigree.params().n_individuals);
  if (max_steps < 0) {
    if (pedigree.extendable()) {
      throw std::invalid_argument("trace_lineages: extendable pedigree needs a step bound");
    }
    max_steps = pedigree.depth();
  }
  if (!pedigree.extendable()) max_steps = std::min(max_steps, pedigree.depth());

  AncestralState cur{MarkedPartition::singletons(sample.size()), sample.individuals};
  AncestralPath path(cur);
  Mover mover;
  for (int k = 1; k <= max_steps; ++k) {
    pedigree.ensure_depth(k);
    if (mover.advance(cur, pedigree.step(k), rng)) {
      path.push_change(k, cur);
      if (cur.marked.partition().is_single_block()) break;
    }
  }
  // Depth always covers the whole window, so the rescaled horizon does
  // not shrink to the absorption step.
  path.extend_to(max_steps);
  return path;
}

AncestralPath time_change(const AncestralPath& path) {
  if (path.change_count() == 0) throw std::invalid_argument("time_change: empty path");
  if (path.change_state(0).marked.has_pairs()) {
    throw std::invalid_argument("time_change: path starts in a paired state");
  }
  AncestralPath out(path.change_state(0));
  for (int j = 1; j < path.change_count(); ++j) {
    const AncestralState& s = path.change_state(j);
    if (s.marked.has_pairs()) continue;
    if (s == out.change_state(out.change_count() - 1)) continue;
    out.push_change(path.change_step(j), s);
  }
  out.extend_to(path.depth());
  return out;
}

GenealogyPath rescale(const AncestralPath& path, double c_n) {
  if (!(c_n > 0.0) || !(c_n <= 1.0)) {
    throw std::invalid_argument("rescale: c_n must lie in (0, 1]");
  }
  if (path.change_count() == 0) throw std::invalid_argument("rescale: empty path");

  GenealogyPath out;
  out.horizon = path.depth() * c_n;
  out.truncated = !path.absorbed();
  Partition prev;
  for (int j = 0; j < path.change_count(); ++j) {
    Partition vis = haploid_map(path.change_state(j).marked);
    if (j == 0) {
      out.jumps.push_back({0.0, vis});
      prev = std::move(vis);
      continue;
    }
    if (vis == prev) continue;
    for (int b = 0; b < prev.block_count(); ++b) {
      const std::uint64_t mask = prev.block_mask(b);
      const int e = std::countr_zero(mask) + 1;
      if ((mask & ~vis.block_mask(vis.block_of(e))) != 0) {
        throw std::invalid_argument(
            "rescale: haploid-visible partition refines; time-change the path first");
      }
    }
    out.jumps.push_back({path.change_step(j) * c_n, vis});
    prev = std::move(vis);
  }
  return out;
}

std::vector<GenealogyPath> quenched_replicates(Pedigree& pedigree, const SampleConfig& sample,
                                               int loci, const RandomStream& rng,
                                               int max_steps) {
  if (loci < 1) throw std::invalid_argument("quenched_replicates: need at least one locus");
  const double c = c2_closed_sw(pedigree.params());
  if (!(c > 0.0)) {
    throw std::invalid_argument("quenched_replicates: model never coalesces pairs");
  }
  if (max_steps < 0) {
    if (pedigree.extendable()) {
      const double want = std::ceil(20.0 / c);
      max_steps = want < 2e9 ? static_cast<int>(want) : std::numeric_limits<int>::max();
    } else {
      max_steps = pedigree.depth();
    }
  }

  std::vector<GenealogyPath> out;
  out.reserve(static_cast<std::size_t>(loci));
  for (int j = 0; j < loci; ++j) {
    RandomStream locus_rng = rng.child(static_cast<std::uint64_t>(j));
    AncestralPath raw = trace_lineages(pedigree, sample, locus_rng, max_steps);
    out.push_back(rescale(time_change(raw), c));
  }
  return out;
}

AncestralGraph discrete_ancestral_graph(Pedigree& pedigree, const SampleConfig& sample,
                                        int max_steps) {
  validate_sample(sample, pedigree.params().n_individuals);
  if (max_steps < 0) {
    if (pedigree.extendable()) {
      throw std::invalid_argument(
          "discrete_ancestral_graph: extendable pedigree needs a step bound");
    }
    max_steps = pedigree.depth();
  }
  if (!pedigree.extendable()) max_steps = std::min(max_steps, pedigree.depth());
  if (max_steps < 1) {
    throw std::invalid_argument("discrete_ancestral_graph: need at least one step");
  }

  const int n = sample.size();
  AncestralGraph graph(n, max_steps, max_steps);
  std::vector<std::int32_t> node_indiv(sample.individuals);  // by persistent id
  std::vector<std::int32_t> live(static_cast<std::size_t>(n));
  std::iota(live.begin(), live.end(), 0);

  std::vector<std::pair<std::int32_t, std::int32_t>> occupancy;  // (individual, node)
  std::vector<std::vector<std::int32_t>> groups;
  for (int k = 1; k <= max_steps; ++k) {
    pedigree.ensure_depth(k);
    const auto sv = pedigree.step(k);

    const std::size_t live_before = live.size();
    for (std::size_t idx = 0; idx < live_before; ++idx) {
      const std::int32_t id = live[idx];
      const int slot = child_slot_of(sv, node_indiv[static_cast<std::size_t>(id)]);
      if (slot < 0) continue;
      const std::int32_t pa = sv.parent_a[slot];
      const std::int32_t pb = sv.parent_b[slot];
      node_indiv[static_cast<std::size_t>(id)] = pa;
      if (pa != pb) {
        const std::int32_t spawned = graph.add_fragmentation(k, id);
        node_indiv.push_back(pb);
        live.push_back(spawned);
      }
    }

    occupancy.clear();
    for (const std::int32_t id : live) {
      occupancy.emplace_back(node_indiv[static_cast<std::size_t>(id)], id);
    }
    std::sort(occupancy.begin(), occupancy.end());
    groups.clear();
    std::size_t run = 0;
    while (run < occupancy.size()) {
      std::size_t stop = run + 1;
      while (stop < occupancy.size() && occupancy[stop].first == occupancy[run].first) ++stop;
      if (stop - run >= 2) {
        std::vector<std::int32_t> members;
        for (std::size_t m = run; m < stop; ++m) members.push_back(occupancy[m].second);
        groups.push_back(std::move(members));
      }
      run = stop;
    }
    if (!groups.empty()) {
      graph.add_coalescence(k, groups);
      for (const auto& g : groups) {
        for (std::size_t m = 1; m < g.size(); ++m) {
          live.erase(std::lower_bound(live.begin(), live.end(), g[m]));
        }
      }
    }
  }
  return graph;
}

}  // namespace pedcoal
