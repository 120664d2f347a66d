#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace pedcoal {

enum class GraphEventKind : std::uint8_t { kFragmentation, kCoalescence };

/// Ancestral graph in event-list form: the branching-coalescing support
/// structure genealogies live on. Starts from `initial_nodes` root nodes;
/// a fragmentation replaces one node by two, a coalescence merges one or
/// more groups of nodes at once.
///
/// Nodes carry persistent ids: roots are 0..n0-1, each fragmentation
/// spawns the next unused id, and a merge group survives under its
/// smallest id. The rank of an id in the sorted live set gives the
/// 1-based "current index" used by the CSV form, where a coalescence
/// detail is a partition of {1..l} in the partitions module's text form.
///
/// Event times never decrease. Ties are allowed so that several changes
/// born in one discrete pedigree step can be recorded as separate events;
/// continuous-time simulation produces strictly increasing times.
class AncestralGraph {
 public:
  AncestralGraph() = default;
  AncestralGraph(int initial_nodes, double horizon, double frag_cutoff);

  int initial_nodes() const { return n0_; }
  double horizon() const { return horizon_; }
  double frag_cutoff() const { return frag_cutoff_; }
  bool truncated() const { return truncated_; }
  void set_truncated(bool value) { truncated_ = value; }

  int event_count() const { return static_cast<int>(time_.size()); }
  double event_time(int i) const { return time_.at(i); }
  GraphEventKind event_kind(int i) const {
    return static_cast<GraphEventKind>(kind_.at(i));
  }
  /// Fragmentation accessors.
  std::int32_t frag_node(int i) const;
  std::int32_t frag_spawned(int i) const;
  /// Coalescence accessors: merge groups, each ascending, disjoint.
  int group_count(int i) const;
  std::span<const std::int32_t> group(int i, int g) const;

  /// Total node ids ever created.
  int node_count() const { return next_id_; }
  int live_count() const { return live_count_; }
  bool is_live(std::int32_t node) const;
  std::vector<std::int32_t> live_nodes() const;
  double last_time() const { return time_.empty() ? 0.0 : time_.back(); }

  /// Split a live node; returns the spawned node's id.
  std::int32_t add_fragmentation(double time, std::int32_t node);
  /// Merge groups of live nodes simultaneously. Every group needs at
  /// least two nodes; groups must be disjoint. Smallest id survives.
  void add_coalescence(double time, const std::vector<std::vector<std::int32_t>>& groups);
  void add_pair_coalescence(double time, std::int32_t a, std::int32_t b);

  /// Rows "event_index,time,kind,detail" with a header line.
  std::string to_csv() const;
  static AncestralGraph from_csv(int initial_nodes, double horizon, double frag_cutoff,
                                 const std::string& csv);

 private:
  void check_time(double time) const;

  int n0_ = 0;
  double horizon_ = 0.0;
  double frag_cutoff_ = 0.0;
  bool truncated_ = false;

  // One event per index; coalescence groups live in flat side arrays so
  // big runs stay cache-friendly.
  std::vector<double> time_;
  std::vector<std::uint8_t> kind_;
  std::vector<std::int32_t> a_;  // frag: node; coal: first group slot
  std::vector<std::int32_t> b_;  // frag: spawned id; coal: group count
  std::vector<std::int32_t> group_nodes_;
  std::vector<std::int32_t> group_offsets_{0};  // per-group bounds in group_nodes_

  std::vector<std::uint8_t> alive_;
  std::int32_t next_id_ = 0;
  int live_count_ = 0;
};

}  // namespace pedcoal
