#include "pedcoal/limit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <stdexcept>

namespace pedcoal {
namespace {

void check_simulation_args(int n, const XiMeasure& xi, double lambda, double horizon) {
  xi.validate();
  if (n < 1) throw std::invalid_argument("simulate_graph: need at least one root");
  if (!std::isfinite(horizon) || horizon <= 0.0) {
    throw std::invalid_argument("simulate_graph: horizon must be positive");
  }
  if (!std::isfinite(lambda) || lambda < 0.0) {
    throw std::invalid_argument("simulate_graph: splitting rate must be nonnegative");
  }
}

/// One throw component: fires at `rate`, assigns a unit to interval i
/// when the uniform draw lands under cum[i].
struct ThrowSpec {
  double rate = 0.0;
  std::vector<double> cum;
};

std::vector<ThrowSpec> atom_throws(const XiMeasure& xi) {
  std::vector<ThrowSpec> throws;
  for (const PaintboxAtom& atom : xi.atoms) {
    double overlap = 0.0;
    std::vector<double> cum;
    double acc = 0.0;
    for (double x : atom.paintbox) {
      overlap += x * x;
      acc += x;
      cum.push_back(acc);
    }
    throws.push_back({atom.weight / overlap, std::move(cum)});
  }
  return throws;
}

/// Throws units 0..count-1 into the intervals; groups of two or more
/// sharing an interval come back as ascending index lists. Draw order
/// is one uniform per unit, ascending.
std::vector<std::vector<int>> throw_groups(const std::vector<double>& cum, int count,
                                           RandomStream& rng) {
  std::vector<std::vector<int>> buckets(cum.size());
  for (int unit = 0; unit < count; ++unit) {
    const double u = rng.next_double();
    for (std::size_t i = 0; i < cum.size(); ++i) {
      if (u < cum[i]) {
        buckets[i].push_back(unit);
        break;
      }
    }
  }
  std::vector<std::vector<int>> groups;
  for (auto& bucket : buckets) {
    if (bucket.size() >= 2) groups.push_back(std::move(bucket));
  }
  return groups;
}

double beta_fraction(const BetaComponent& beta, RandomStream& rng) {
  return beta.r == 0.0 ? 1.0 : rng.next_beta(2.0 - beta.r, beta.r);
}

/// Walk occupancy: which node holds which walks. Entries stay nonzero;
/// there are never more entries than walks.
struct Occupancy {
  std::vector<std::pair<std::int32_t, std::uint64_t>> at;

  int find(std::int32_t node) const {
    for (std::size_t i = 0; i < at.size(); ++i) {
      if (at[i].first == node) return static_cast<int>(i);
    }
    return -1;
  }

  Partition partition(int n_walks) const {
    std::vector<std::uint64_t> masks;
    masks.reserve(at.size());
    for (const auto& [node, mask] : at) masks.push_back(mask);
    return Partition(n_walks, std::move(masks));
  }
};

/// Applies one fragmentation. Draws the shared bit only when the node
/// is occupied; the partition never changes.
void walk_fragmentation(Occupancy& occ, std::int32_t node, std::int32_t spawned,
                        RandomStream& rng) {
  const int slot = occ.find(node);
  if (slot < 0) return;
  if (rng.next_bit()) occ.at[static_cast<std::size_t>(slot)].first = spawned;
}

/// Applies one coalescence event; true when some group united two or
/// more occupied nodes, coarsening the partition.
bool walk_coalescence(Occupancy& occ, const AncestralGraph& graph, int event) {
  bool coarsened = false;
  for (int g = 0; g < graph.group_count(event); ++g) {
    const auto group = graph.group(event, g);
    const std::int32_t survivor = group.front();  // groups ascend: front is smallest
    std::uint64_t merged = 0;
    int hit = 0;
    for (std::int32_t node : group) {
      const int slot = occ.find(node);
      if (slot < 0) continue;
      merged |= occ.at[static_cast<std::size_t>(slot)].second;
      ++hit;
      occ.at[static_cast<std::size_t>(slot)] = occ.at.back();
      occ.at.pop_back();
    }
    if (hit == 0) continue;
    if (hit >= 2) coarsened = true;
    occ.at.push_back({survivor, merged});
  }
  return coarsened;
}

GenealogyPath run_walk(const AncestralGraph& graph, RandomStream& rng, const WalkIndex* index) {
  const int n = graph.initial_nodes();
  GenealogyPath path;
  path.horizon = graph.horizon();
  path.jumps.push_back({0.0, Partition::singletons(n)});

  Occupancy occ;
  for (int i = 0; i < n; ++i) occ.at.push_back({i, std::uint64_t{1} << i});

  const auto process = [&](int event) {
    if (graph.event_kind(event) == GraphEventKind::kFragmentation) {
      walk_fragmentation(occ, graph.frag_node(event), graph.frag_spawned(event), rng);
      return;
    }
    if (walk_coalescence(occ, graph, event)) {
      path.jumps.push_back({graph.event_time(event), occ.partition(n)});
    }
  };

  if (index == nullptr) {
    const int count = graph.event_count();
    for (int event = 0; event < count && occ.at.size() > 1; ++event) process(event);
  } else {
    // Min-heap of (next incident event, node) for the occupied nodes.
    // Entries go stale when a node empties or its event was already
    // handled from another group member; both are skipped on pop.
    using Entry = std::pair<std::int32_t, std::int32_t>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> heap;
    const auto schedule = [&](std::int32_t node, std::int32_t after) {
      const auto events = index->events_at(node);
      const auto it = std::upper_bound(events.begin(), events.end(), after);
      if (it != events.end()) heap.push({*it, node});
    };
    for (const auto& [node, mask] : occ.at) schedule(node, -1);
    std::int32_t done = -1;
    while (!heap.empty() && occ.at.size() > 1) {
      const auto [event, node] = heap.top();
      heap.pop();
      if (event == done || occ.find(node) < 0) continue;
      process(event);
      done = event;
      if (graph.event_kind(event) == GraphEventKind::kFragmentation) {
        const int slot = occ.find(graph.frag_node(event));
        const int moved = occ.find(graph.frag_spawned(event));
        if (slot >= 0) schedule(graph.frag_node(event), event);
        if (moved >= 0) schedule(graph.frag_spawned(event), event);
      } else {
        for (int g = 0; g < graph.group_count(event); ++g) {
          const std::int32_t survivor = graph.group(event, g).front();
          if (occ.find(survivor) >= 0) schedule(survivor, event);
        }
      }
    }
  }

  path.truncated = !path.absorbed();
  return path;
}

}  // namespace

AncestralGraph simulate_graph(int n, const XiMeasure& xi, double lambda, double frag_cutoff,
                              double horizon, RandomStream& rng) {
  check_simulation_args(n, xi, lambda, horizon);
  if (!std::isfinite(frag_cutoff) || frag_cutoff < 0.0) {
    throw std::invalid_argument("simulate_graph: splitting cutoff must be nonnegative");
  }

  AncestralGraph graph(n, horizon, frag_cutoff);
  if (n == 1) return graph;

  const std::vector<ThrowSpec> atoms = atom_throws(xi);
  double throw_rate = 0.0;
  for (const ThrowSpec& spec : atoms) throw_rate += spec.rate;
  const double beta_rate = (xi.beta && xi.beta->rate > 0.0) ? xi.beta->rate : 0.0;

  std::vector<std::int32_t> live(static_cast<std::size_t>(n));
  std::iota(live.begin(), live.end(), 0);

  const auto merge_groups = [&](double when, const std::vector<std::vector<int>>& index_groups) {
    std::vector<std::vector<std::int32_t>> groups;
    std::vector<std::int32_t> dead;
    for (const auto& members : index_groups) {
      std::vector<std::int32_t> nodes;
      for (int idx : members) nodes.push_back(live[static_cast<std::size_t>(idx)]);
      std::sort(nodes.begin(), nodes.end());
      dead.insert(dead.end(), nodes.begin() + 1, nodes.end());
      groups.push_back(std::move(nodes));
    }
    graph.add_coalescence(when, groups);
    std::sort(dead.begin(), dead.end());
    std::erase_if(live, [&](std::int32_t node) {
      return std::binary_search(dead.begin(), dead.end(), node);
    });
  };

  double t = 0.0;
  while (live.size() > 1) {
    const auto l = static_cast<double>(live.size());
    const bool splitting = lambda > 0.0 && t < frag_cutoff;
    const double split_rate = splitting ? lambda * l : 0.0;
    const double kingman_rate = xi.kingman_mass * l * (l - 1.0) / 2.0;
    const double total = split_rate + kingman_rate + throw_rate + beta_rate;
    if (total == 0.0) break;  // nothing can ever fire again

    const double dt = rng.next_exponential(total);
    if (t + dt >= horizon) break;
    if (splitting && t + dt >= frag_cutoff) {
      t = frag_cutoff;  // rate change point: discard and redraw
      continue;
    }
    t += dt;

    double pick = rng.next_double() * total;
    if (pick < split_rate) {
      const auto idx = static_cast<std::size_t>(rng.next_below(live.size()));
      live.push_back(graph.add_fragmentation(t, live[idx]));
      continue;
    }
    pick -= split_rate;
    if (pick < kingman_rate) {
      const auto i = static_cast<std::size_t>(rng.next_below(live.size()));
      auto j = static_cast<std::size_t>(rng.next_below(live.size() - 1));
      if (j >= i) ++j;
      const std::int32_t lo = std::min(live[i], live[j]);
      const std::int32_t hi = std::max(live[i], live[j]);
      graph.add_pair_coalescence(t, lo, hi);
      const std::size_t drop = live[i] == hi ? i : j;
      live[drop] = live.back();
      live.pop_back();
      continue;
    }
    pick -= kingman_rate;
    const std::vector<double>* cum = nullptr;
    std::vector<double> pair_cum;
    for (const ThrowSpec& spec : atoms) {
      if (pick < spec.rate) {
        cum = &spec.cum;
        break;
      }
      pick -= spec.rate;
    }
    if (cum == nullptr) {
      const double z = beta_fraction(*xi.beta, rng);
      pair_cum = {z / 2.0, z};
      cum = &pair_cum;
    }
    const auto groups = throw_groups(*cum, static_cast<int>(live.size()), rng);
    if (!groups.empty()) merge_groups(t, groups);
  }

  graph.set_truncated(live.size() > 1);
  return graph;
}

GenealogyPath walk_graph(const AncestralGraph& graph, RandomStream& rng) {
  return run_walk(graph, rng, nullptr);
}

WalkIndex::WalkIndex(const AncestralGraph& graph) : graph_(&graph) {
  const int nodes = graph.node_count();
  const int count = graph.event_count();
  std::vector<std::int64_t> fill(static_cast<std::size_t>(nodes) + 1, 0);
  const auto touch = [&](std::int32_t node) { ++fill[static_cast<std::size_t>(node) + 1]; };
  for (int e = 0; e < count; ++e) {
    if (graph.event_kind(e) == GraphEventKind::kFragmentation) {
      touch(graph.frag_node(e));
    } else {
      for (int g = 0; g < graph.group_count(e); ++g) {
        for (std::int32_t node : graph.group(e, g)) touch(node);
      }
    }
  }
  offsets_.assign(static_cast<std::size_t>(nodes) + 1, 0);
  for (int v = 0; v < nodes; ++v) {
    offsets_[static_cast<std::size_t>(v) + 1] =
        offsets_[static_cast<std::size_t>(v)] + fill[static_cast<std::size_t>(v) + 1];
  }
  incidence_.resize(static_cast<std::size_t>(offsets_.back()));
  std::vector<std::int64_t> cursor(offsets_.begin(), offsets_.end() - 1);
  const auto place = [&](std::int32_t node, int e) {
    incidence_[static_cast<std::size_t>(cursor[static_cast<std::size_t>(node)]++)] =
        static_cast<std::int32_t>(e);
  };
  for (int e = 0; e < count; ++e) {
    if (graph.event_kind(e) == GraphEventKind::kFragmentation) {
      place(graph.frag_node(e), e);
    } else {
      for (int g = 0; g < graph.group_count(e); ++g) {
        for (std::int32_t node : graph.group(e, g)) place(node, e);
      }
    }
  }
}

std::span<const std::int32_t> WalkIndex::events_at(std::int32_t node) const {
  const auto lo = static_cast<std::size_t>(offsets_.at(static_cast<std::size_t>(node)));
  const auto hi = static_cast<std::size_t>(offsets_.at(static_cast<std::size_t>(node) + 1));
  return {incidence_.data() + lo, hi - lo};
}

GenealogyPath walk_graph(const WalkIndex& index, RandomStream& rng) {
  return run_walk(index.graph(), rng, &index);
}

std::pair<GenealogyPath, GenealogyPath> efc_coupled_walks(int n, const XiMeasure& xi,
                                                          double lambda, double horizon,
                                                          RandomStream& rng) {
  check_simulation_args(n, xi, lambda, horizon);

  const std::vector<ThrowSpec> atoms = atom_throws(xi);
  double throw_rate = 0.0;
  for (const ThrowSpec& spec : atoms) throw_rate += spec.rate;
  const double beta_rate = (xi.beta && xi.beta->rate > 0.0) ? xi.beta->rate : 0.0;

  // Parallel unit lists: slot i is one live unit, node on the graph
  // side, label on the partition side. Walks track their slot's value
  // per side, not the slot itself.
  std::vector<std::int32_t> node_of;
  std::vector<std::int64_t> label_of;
  std::vector<std::int32_t> walk_node(static_cast<std::size_t>(n));
  std::vector<std::int64_t> walk_label(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    node_of.push_back(i);
    label_of.push_back(i);
    walk_node[static_cast<std::size_t>(i)] = i;
    walk_label[static_cast<std::size_t>(i)] = i;
  }
  std::int32_t next_node = n;
  std::int64_t next_label = n;

  GenealogyPath graph_path;
  GenealogyPath label_path;
  graph_path.horizon = horizon;
  label_path.horizon = horizon;
  graph_path.jumps.push_back({0.0, Partition::singletons(n)});
  label_path.jumps.push_back({0.0, Partition::singletons(n)});

  const auto node_partition = [&] {
    std::vector<std::uint64_t> masks;
    for (std::size_t i = 0; i < walk_node.size(); ++i) {
      bool first = true;
      for (std::size_t j = 0; j < i; ++j) {
        if (walk_node[j] == walk_node[i]) {
          first = false;
          break;
        }
      }
      if (!first) continue;
      std::uint64_t mask = 0;
      for (std::size_t j = 0; j < walk_node.size(); ++j) {
        if (walk_node[j] == walk_node[i]) mask |= std::uint64_t{1} << j;
      }
      masks.push_back(mask);
    }
    return Partition(n, std::move(masks));
  };
  const auto label_partition = [&] {
    std::vector<std::uint64_t> masks;
    for (std::size_t i = 0; i < walk_label.size(); ++i) {
      bool first = true;
      for (std::size_t j = 0; j < i; ++j) {
        if (walk_label[j] == walk_label[i]) {
          first = false;
          break;
        }
      }
      if (!first) continue;
      std::uint64_t mask = 0;
      for (std::size_t j = 0; j < walk_label.size(); ++j) {
        if (walk_label[j] == walk_label[i]) mask |= std::uint64_t{1} << j;
      }
      masks.push_back(mask);
    }
    return Partition(n, std::move(masks));
  };

  const auto apply_merge = [&](double when, const std::vector<std::vector<int>>& groups) {
    // Occupancy counted before any walk moves, else walks relocated by
    // one member re-match a later member and fake a coarsening.
    bool node_hit = false;
    bool label_hit = false;
    for (const auto& members : groups) {
      int nodes_occupied = 0;
      int labels_occupied = 0;
      for (int idx : members) {
        const std::int32_t at_node = node_of[static_cast<std::size_t>(idx)];
        const std::int64_t at_label = label_of[static_cast<std::size_t>(idx)];
        bool node_used = false;
        bool label_used = false;
        for (std::size_t w = 0; w < walk_node.size(); ++w) {
          node_used = node_used || walk_node[w] == at_node;
          label_used = label_used || walk_label[w] == at_label;
        }
        nodes_occupied += node_used ? 1 : 0;
        labels_occupied += label_used ? 1 : 0;
      }
      node_hit = node_hit || nodes_occupied >= 2;
      label_hit = label_hit || labels_occupied >= 2;
    }

    std::vector<std::size_t> drop;
    for (const auto& members : groups) {
      std::int32_t low_node = node_of[static_cast<std::size_t>(members.front())];
      std::int64_t low_label = label_of[static_cast<std::size_t>(members.front())];
      for (int idx : members) {
        low_node = std::min(low_node, node_of[static_cast<std::size_t>(idx)]);
        low_label = std::min(low_label, label_of[static_cast<std::size_t>(idx)]);
      }
      for (int idx : members) {
        const std::int32_t from_node = node_of[static_cast<std::size_t>(idx)];
        const std::int64_t from_label = label_of[static_cast<std::size_t>(idx)];
        for (std::size_t w = 0; w < walk_node.size(); ++w) {
          if (walk_node[w] == from_node) walk_node[w] = low_node;
          if (walk_label[w] == from_label) walk_label[w] = low_label;
        }
      }
      node_of[static_cast<std::size_t>(members.front())] = low_node;
      label_of[static_cast<std::size_t>(members.front())] = low_label;
      for (std::size_t k = 1; k < members.size(); ++k) {
        drop.push_back(static_cast<std::size_t>(members[k]));
      }
    }
    std::sort(drop.begin(), drop.end(), std::greater<std::size_t>());
    for (std::size_t slot : drop) {
      node_of[slot] = node_of.back();
      node_of.pop_back();
      label_of[slot] = label_of.back();
      label_of.pop_back();
    }
    if (node_hit) graph_path.jumps.push_back({when, node_partition()});
    if (label_hit) label_path.jumps.push_back({when, label_partition()});
  };

  double t = 0.0;
  while (!(graph_path.absorbed() && label_path.absorbed())) {
    const auto l = static_cast<double>(node_of.size());
    const double split_rate = lambda * l;
    const double kingman_rate = xi.kingman_mass * l * (l - 1.0) / 2.0;
    const double total = split_rate + kingman_rate + throw_rate + beta_rate;
    if (total == 0.0) break;
    const double dt = rng.next_exponential(total);
    if (t + dt >= horizon) break;
    t += dt;

    double pick = rng.next_double() * total;
    if (pick < split_rate) {
      const auto slot = static_cast<std::size_t>(rng.next_below(node_of.size()));
      const std::int32_t old_node = node_of[slot];
      const std::int64_t old_label = label_of[slot];
      const std::int32_t new_node = next_node++;
      const std::int64_t new_label = next_label++;
      node_of.push_back(new_node);
      label_of.push_back(new_label);
      bool node_used = false;
      bool label_used = false;
      for (std::size_t w = 0; w < walk_node.size(); ++w) {
        node_used = node_used || walk_node[w] == old_node;
        label_used = label_used || walk_label[w] == old_label;
      }
      if (node_used || label_used) {
        if (rng.next_bit()) {
          for (std::size_t w = 0; w < walk_node.size(); ++w) {
            if (walk_node[w] == old_node) walk_node[w] = new_node;
            if (walk_label[w] == old_label) walk_label[w] = new_label;
          }
        }
      }
      continue;
    }
    pick -= split_rate;
    if (pick < kingman_rate) {
      const auto i = static_cast<std::size_t>(rng.next_below(node_of.size()));
      auto j = static_cast<std::size_t>(rng.next_below(node_of.size() - 1));
      if (j >= i) ++j;
      apply_merge(t, {{static_cast<int>(std::min(i, j)), static_cast<int>(std::max(i, j))}});
      continue;
    }
    pick -= kingman_rate;
    const std::vector<double>* cum = nullptr;
    std::vector<double> pair_cum;
    for (const ThrowSpec& spec : atoms) {
      if (pick < spec.rate) {
        cum = &spec.cum;
        break;
      }
      pick -= spec.rate;
    }
    if (cum == nullptr) {
      const double z = beta_fraction(*xi.beta, rng);
      pair_cum = {z / 2.0, z};
      cum = &pair_cum;
    }
    const auto groups = throw_groups(*cum, static_cast<int>(node_of.size()), rng);
    if (!groups.empty()) apply_merge(t, groups);
  }

  graph_path.truncated = !graph_path.absorbed();
  label_path.truncated = !label_path.absorbed();
  return {std::move(graph_path), std::move(label_path)};
}

}  // namespace pedcoal
