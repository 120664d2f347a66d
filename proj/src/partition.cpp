#include "pedcoal/partition.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <sstream>
#include <stdexcept>

namespace pedcoal {

namespace {

std::uint64_t full_mask(int n) {
  return n == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << n) - 1);
}

void check_ground_size(int n) {
  if (n < 0 || n > 64) throw std::invalid_argument("partition ground set must have 0..64 elements");
}

}  // namespace

Partition Partition::singletons(int n) {
  check_ground_size(n);
  Partition p;
  p.n_ = n;
  p.blocks_.reserve(n);
  for (int e = 0; e < n; ++e) p.blocks_.push_back(std::uint64_t{1} << e);
  return p;
}

Partition Partition::one_block(int n) {
  check_ground_size(n);
  Partition p;
  p.n_ = n;
  if (n > 0) p.blocks_.push_back(full_mask(n));
  return p;
}

Partition::Partition(int n, std::vector<std::uint64_t> blocks) : n_(n), blocks_(std::move(blocks)) {
  check_ground_size(n);
  std::uint64_t seen = 0;
  for (std::uint64_t b : blocks_) {
    if (b == 0) throw std::invalid_argument("partition blocks must be nonempty");
    if (seen & b) throw std::invalid_argument("partition blocks must be disjoint");
    seen |= b;
  }
  if (seen != full_mask(n_)) throw std::invalid_argument("partition blocks must cover the ground set");
  std::sort(blocks_.begin(), blocks_.end(), [](std::uint64_t a, std::uint64_t b) {
    return std::countr_zero(a) < std::countr_zero(b);
  });
}

int Partition::block_size(int block) const {
  return std::popcount(blocks_.at(block));
}

int Partition::block_of(int e) const {
  if (e < 1 || e > n_) throw std::out_of_range("element outside ground set");
  const std::uint64_t bit = std::uint64_t{1} << (e - 1);
  for (std::size_t i = 0; i < blocks_.size(); ++i)
    if (blocks_[i] & bit) return static_cast<int>(i);
  throw std::logic_error("element not covered");  // unreachable on valid state
}

std::vector<int> Partition::block_sizes() const {
  std::vector<int> sizes;
  sizes.reserve(blocks_.size());
  for (std::uint64_t b : blocks_) sizes.push_back(std::popcount(b));
  return sizes;
}

bool Partition::operator<(const Partition& other) const {
  if (n_ != other.n_) return n_ < other.n_;
  return blocks_ < other.blocks_;
}

std::string Partition::to_text() const {
  std::ostringstream out;
  out << '{';
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    if (i > 0) out << '|';
    std::uint64_t b = blocks_[i];
    bool first = true;
    while (b) {
      const int e = std::countr_zero(b) + 1;
      if (!first) out << ',';
      out << e;
      first = false;
      b &= b - 1;
    }
  }
  out << '}';
  return out.str();
}

namespace {

// Minimal strict scanner shared by the partition and pairing parsers.
struct Scanner {
  const std::string& s;
  std::size_t pos = 0;

  bool done() const { return pos >= s.size(); }
  char peek() const { return done() ? '\0' : s[pos]; }
  void expect(char c) {
    if (done() || s[pos] != c)
      throw std::invalid_argument("partition text: expected '" + std::string(1, c) + "' at offset " + std::to_string(pos));
    ++pos;
  }
  int number() {
    if (done() || !std::isdigit(static_cast<unsigned char>(s[pos])))
      throw std::invalid_argument("partition text: expected number at offset " + std::to_string(pos));
    long v = 0;
    while (!done() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
      v = v * 10 + (s[pos] - '0');
      if (v > 1 << 20) throw std::invalid_argument("partition text: number too large");
      ++pos;
    }
    return static_cast<int>(v);
  }
};

}  // namespace

Partition Partition::from_text(const std::string& text) {
  Scanner sc{text};
  sc.expect('{');
  std::vector<std::uint64_t> blocks;
  int max_e = 0;
  if (sc.peek() != '}') {
    for (;;) {
      std::uint64_t mask = 0;
      for (;;) {
        const int e = sc.number();
        if (e < 1 || e > 64) throw std::invalid_argument("partition text: element outside 1..64");
        const std::uint64_t bit = std::uint64_t{1} << (e - 1);
        if (mask & bit) throw std::invalid_argument("partition text: repeated element in block");
        mask |= bit;
        max_e = std::max(max_e, e);
        if (sc.peek() == ',') {
          sc.expect(',');
          continue;
        }
        break;
      }
      blocks.push_back(mask);
      if (sc.peek() == '|') {
        sc.expect('|');
        continue;
      }
      break;
    }
  }
  sc.expect('}');
  if (!sc.done()) throw std::invalid_argument("partition text: trailing characters");
  return Partition(max_e, std::move(blocks));  // validates cover/disjoint
}

MarkedPartition::MarkedPartition(Partition partition, std::vector<std::pair<int, int>> pairs)
    : partition_(std::move(partition)), pairs_(std::move(pairs)) {
  const int b = partition_.block_count();
  std::vector<bool> used(b, false);
  for (auto& [i, j] : pairs_) {
    if (i > j) std::swap(i, j);
    if (i < 0 || j >= b || i == j) throw std::invalid_argument("pairing: block index out of range");
    if (used[i] || used[j]) throw std::invalid_argument("pairing: block appears in two pairs");
    used[i] = used[j] = true;
  }
  std::sort(pairs_.begin(), pairs_.end());
}

int MarkedPartition::partner_of(int block) const {
  for (const auto& [i, j] : pairs_) {
    if (i == block) return j;
    if (j == block) return i;
  }
  return -1;
}

std::string MarkedPartition::to_text() const {
  std::string out = partition_.to_text();
  if (pairs_.empty()) return out;
  out += '[';
  for (std::size_t k = 0; k < pairs_.size(); ++k) {
    if (k > 0) out += ',';
    out += '(' + std::to_string(pairs_[k].first + 1) + ',' + std::to_string(pairs_[k].second + 1) + ')';
  }
  out += ']';
  return out;
}

MarkedPartition MarkedPartition::from_text(const std::string& text) {
  const auto bracket = text.find('[');
  if (bracket == std::string::npos) return MarkedPartition(Partition::from_text(text));
  Partition p = Partition::from_text(text.substr(0, bracket));
  Scanner sc{text};
  sc.pos = bracket;
  sc.expect('[');
  std::vector<std::pair<int, int>> pairs;
  if (sc.peek() != ']') {
    for (;;) {
      sc.expect('(');
      const int i = sc.number();
      sc.expect(',');
      const int j = sc.number();
      sc.expect(')');
      pairs.emplace_back(i - 1, j - 1);
      if (sc.peek() == ',') {
        sc.expect(',');
        continue;
      }
      break;
    }
  }
  sc.expect(']');
  if (!sc.done()) throw std::invalid_argument("pairing text: trailing characters");
  return MarkedPartition(std::move(p), std::move(pairs));
}

MergeSpec MergeSpec::pair_merge(int block_count, int i, int j) {
  if (i == j) throw std::invalid_argument("pair_merge: indices must differ");
  std::vector<std::uint64_t> groups;
  groups.push_back((std::uint64_t{1} << i) | (std::uint64_t{1} << j));
  for (int k = 0; k < block_count; ++k)
    if (k != i && k != j) groups.push_back(std::uint64_t{1} << k);
  return MergeSpec{Partition(block_count, std::move(groups))};
}

Partition haploid_map(const MarkedPartition& marked) {
  const Partition& p = marked.partition();
  if (!marked.has_pairs()) return p;
  std::vector<std::uint64_t> blocks;
  std::vector<bool> consumed(p.block_count(), false);
  for (const auto& [i, j] : marked.pairs()) {
    blocks.push_back(p.block_mask(i) | p.block_mask(j));
    consumed[i] = consumed[j] = true;
  }
  for (int i = 0; i < p.block_count(); ++i)
    if (!consumed[i]) blocks.push_back(p.block_mask(i));
  return Partition(p.ground_size(), std::move(blocks));
}

Partition restrict_to(const Partition& partition, int m) {
  if (m < 0 || m > partition.ground_size())
    throw std::invalid_argument("restrict_to: m outside 0..n");
  const std::uint64_t keep = m == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << m) - 1);
  std::vector<std::uint64_t> blocks;
  for (std::uint64_t b : partition.blocks()) {
    const std::uint64_t r = b & keep;
    if (r) blocks.push_back(r);
  }
  return Partition(m, std::move(blocks));
}

MarkedPartition restrict_to(const MarkedPartition& marked, int m) {
  const Partition& p = marked.partition();
  const std::uint64_t keep = m == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << m) - 1);
  // Survivor blocks keep their relative order, so old->new index mapping
  // is by counting survivors.
  std::vector<int> new_index(p.block_count(), -1);
  std::vector<std::uint64_t> blocks;
  for (int i = 0; i < p.block_count(); ++i) {
    const std::uint64_t r = p.block_mask(i) & keep;
    if (r) {
      new_index[i] = static_cast<int>(blocks.size());
      blocks.push_back(r);
    }
  }
  std::vector<std::pair<int, int>> pairs;
  for (const auto& [i, j] : marked.pairs())
    if (new_index[i] >= 0 && new_index[j] >= 0)
      pairs.emplace_back(new_index[i], new_index[j]);
  return MarkedPartition(Partition(m, std::move(blocks)), std::move(pairs));
}

Partition coagulate(const Partition& partition, const MergeSpec& spec) {
  const int b = partition.block_count();
  if (spec.groups.ground_size() != b)
    throw std::invalid_argument("coagulate: spec must partition the block index set");
  std::vector<std::uint64_t> merged;
  merged.reserve(spec.groups.block_count());
  for (std::uint64_t g : spec.groups.blocks()) {
    std::uint64_t acc = 0;
    while (g) {
      const int idx = std::countr_zero(g);
      acc |= partition.block_mask(idx);
      g &= g - 1;
    }
    merged.push_back(acc);
  }
  return Partition(partition.ground_size(), std::move(merged));
}

}  // namespace pedcoal
