#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace pedcoal {

/// Set partition of {1..n}, n <= 64.
///
/// Blocks are element bitmasks (bit e-1 set iff element e is in the block),
/// stored sorted by least element. That order is the canonical block
/// indexing used everywhere: merge specs, pairings, text form.
class Partition {
 public:
  Partition() = default;  // empty partition of the empty set

  static Partition singletons(int n);
  static Partition one_block(int n);

  /// Blocks must be nonempty, disjoint, and cover {1..n}. Reorders into
  /// canonical form; throws std::invalid_argument otherwise.
  Partition(int n, std::vector<std::uint64_t> blocks);

  int ground_size() const { return n_; }
  int block_count() const { return static_cast<int>(blocks_.size()); }
  std::uint64_t block_mask(int block) const { return blocks_.at(block); }
  const std::vector<std::uint64_t>& blocks() const { return blocks_; }
  int block_size(int block) const;
  /// 0-based index of the block holding 1-based element e.
  int block_of(int e) const;
  std::vector<int> block_sizes() const;
  bool is_single_block() const { return blocks_.size() == 1 && n_ >= 1; }

  bool operator==(const Partition&) const = default;
  bool operator<(const Partition& other) const;

  /// Text form "{1,3|2}"; empty partition is "{}".
  std::string to_text() const;
  static Partition from_text(const std::string& text);

 private:
  int n_ = 0;
  std::vector<std::uint64_t> blocks_;
};

/// Partition plus a pairing of block indices: each pair marks two blocks
/// that currently sit in one diploid carrier. Pairs are disjoint; a block
/// appears in at most one pair. Indices are 0-based in code, 1-based in
/// the text form "{1|2|3}[(1,2)]".
class MarkedPartition {
 public:
  MarkedPartition() = default;
  explicit MarkedPartition(Partition partition,
                           std::vector<std::pair<int, int>> pairs = {});

  static MarkedPartition singletons(int n) {
    return MarkedPartition(Partition::singletons(n));
  }

  const Partition& partition() const { return partition_; }
  const std::vector<std::pair<int, int>>& pairs() const { return pairs_; }
  bool has_pairs() const { return !pairs_.empty(); }
  /// -1 if unpaired, else the partner block index.
  int partner_of(int block) const;

  bool operator==(const MarkedPartition&) const = default;

  std::string to_text() const;
  static MarkedPartition from_text(const std::string& text);

 private:
  Partition partition_;
  std::vector<std::pair<int, int>> pairs_;  // (i,j), i<j, sorted by i
};

/// Grouping of the b blocks of some partition: a partition of the index
/// set {1..b}. Non-singleton groups are merged by coagulate; singleton
/// groups leave their block untouched.
struct MergeSpec {
  Partition groups;

  static MergeSpec identity(int block_count) {
    return MergeSpec{Partition::singletons(block_count)};
  }
  /// Merge exactly the given 0-based block indices, rest untouched.
  static MergeSpec pair_merge(int block_count, int i, int j);

  std::string to_text() const { return groups.to_text(); }
  static MergeSpec from_text(const std::string& text) {
    return MergeSpec{Partition::from_text(text)};
  }
};

/// Union each marked pair into one block; the induced partition a haploid
/// observer sees when cohabiting lineages are indistinguishable from
/// coalesced ones.
Partition haploid_map(const MarkedPartition& marked);

/// Restriction to {1..m}: drop elements > m, drop emptied blocks.
Partition restrict_to(const Partition& partition, int m);

/// Restriction keeping the pairing among surviving blocks. A pair whose
/// two blocks both survive stays paired; a pair losing a block is dropped.
MarkedPartition restrict_to(const MarkedPartition& marked, int m);

/// Coagulate blocks according to spec.groups, which must partition
/// {1..block_count}. Result is canonical.
Partition coagulate(const Partition& partition, const MergeSpec& spec);

}  // namespace pedcoal
