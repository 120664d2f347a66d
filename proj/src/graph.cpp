#include "pedcoal/graph.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>

namespace pedcoal {

namespace {

std::string format_time(double t) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", t);
  return buf;
}

// Rank (0-based) of id in the sorted live snapshot.
int rank_of(const std::vector<std::int32_t>& live, std::int32_t id) {
  const auto it = std::lower_bound(live.begin(), live.end(), id);
  if (it == live.end() || *it != id) {
    throw std::invalid_argument("ancestral graph: node is not live");
  }
  return static_cast<int>(it - live.begin());
}

}  // namespace

AncestralGraph::AncestralGraph(int initial_nodes, double horizon, double frag_cutoff) {
  if (initial_nodes < 1) {
    throw std::invalid_argument("ancestral graph: need at least one initial node");
  }
  if (!(horizon > 0.0)) {
    throw std::invalid_argument("ancestral graph: horizon must be positive");
  }
  if (!(frag_cutoff >= 0.0)) {
    throw std::invalid_argument("ancestral graph: frag cutoff must be nonnegative");
  }
  n0_ = initial_nodes;
  horizon_ = horizon;
  frag_cutoff_ = frag_cutoff;
  next_id_ = initial_nodes;
  live_count_ = initial_nodes;
  alive_.assign(static_cast<std::size_t>(initial_nodes), 1);
}

std::int32_t AncestralGraph::frag_node(int i) const {
  if (event_kind(i) != GraphEventKind::kFragmentation) {
    throw std::logic_error("ancestral graph: event is not a fragmentation");
  }
  return a_[i];
}

std::int32_t AncestralGraph::frag_spawned(int i) const {
  if (event_kind(i) != GraphEventKind::kFragmentation) {
    throw std::logic_error("ancestral graph: event is not a fragmentation");
  }
  return b_[i];
}

int AncestralGraph::group_count(int i) const {
  if (event_kind(i) != GraphEventKind::kCoalescence) {
    throw std::logic_error("ancestral graph: event is not a coalescence");
  }
  return b_[i];
}

std::span<const std::int32_t> AncestralGraph::group(int i, int g) const {
  if (g < 0 || g >= group_count(i)) {
    throw std::out_of_range("ancestral graph: bad group index");
  }
  const int slot = a_[i] + g;
  const int begin = group_offsets_[slot];
  const int end = group_offsets_[slot + 1];
  return {group_nodes_.data() + begin, static_cast<std::size_t>(end - begin)};
}

bool AncestralGraph::is_live(std::int32_t node) const {
  return node >= 0 && node < next_id_ && alive_[static_cast<std::size_t>(node)] != 0;
}

std::vector<std::int32_t> AncestralGraph::live_nodes() const {
  std::vector<std::int32_t> out;
  out.reserve(static_cast<std::size_t>(live_count_));
  for (std::int32_t id = 0; id < next_id_; ++id) {
    if (alive_[static_cast<std::size_t>(id)]) out.push_back(id);
  }
  return out;
}

void AncestralGraph::check_time(double time) const {
  if (!(time >= 0.0)) {
    throw std::invalid_argument("ancestral graph: event time must be nonnegative");
  }
  if (!time_.empty() && time < time_.back()) {
    throw std::invalid_argument("ancestral graph: event times must not decrease");
  }
}

std::int32_t AncestralGraph::add_fragmentation(double time, std::int32_t node) {
  check_time(time);
  if (!is_live(node)) {
    throw std::invalid_argument("ancestral graph: fragmenting node is not live");
  }
  const std::int32_t spawned = next_id_++;
  alive_.push_back(1);
  ++live_count_;
  time_.push_back(time);
  kind_.push_back(static_cast<std::uint8_t>(GraphEventKind::kFragmentation));
  a_.push_back(node);
  b_.push_back(spawned);
  return spawned;
}

void AncestralGraph::add_coalescence(double time,
                                     const std::vector<std::vector<std::int32_t>>& groups) {
  check_time(time);
  if (groups.empty()) {
    throw std::invalid_argument("ancestral graph: coalescence needs a merge group");
  }
  std::vector<std::vector<std::int32_t>> sorted = groups;
  std::vector<std::int32_t> all;
  for (auto& g : sorted) {
    if (g.size() < 2) {
      throw std::invalid_argument("ancestral graph: merge group needs at least two nodes");
    }
    std::sort(g.begin(), g.end());
    for (std::int32_t id : g) {
      if (!is_live(id)) {
        throw std::invalid_argument("ancestral graph: merging node is not live");
      }
      all.push_back(id);
    }
  }
  std::sort(all.begin(), all.end());
  if (std::adjacent_find(all.begin(), all.end()) != all.end()) {
    throw std::invalid_argument("ancestral graph: merge groups must be disjoint");
  }
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& x, const auto& y) { return x.front() < y.front(); });

  time_.push_back(time);
  kind_.push_back(static_cast<std::uint8_t>(GraphEventKind::kCoalescence));
  a_.push_back(static_cast<std::int32_t>(group_offsets_.size()) - 1);
  b_.push_back(static_cast<std::int32_t>(sorted.size()));
  for (const auto& g : sorted) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      group_nodes_.push_back(g[i]);
      if (i > 0) {
        alive_[static_cast<std::size_t>(g[i])] = 0;
        --live_count_;
      }
    }
    group_offsets_.push_back(static_cast<std::int32_t>(group_nodes_.size()));
  }
}

void AncestralGraph::add_pair_coalescence(double time, std::int32_t a, std::int32_t b) {
  if (a == b) {
    throw std::invalid_argument("ancestral graph: pair merge needs two distinct nodes");
  }
  add_coalescence(time, {{a, b}});
}

std::string AncestralGraph::to_csv() const {
  std::string out = "event_index,time,kind,detail\n";
  std::vector<std::int32_t> live;
  live.reserve(static_cast<std::size_t>(n0_));
  for (std::int32_t id = 0; id < n0_; ++id) live.push_back(id);

  std::vector<int> group_of;  // rank -> group slot or -1, scratch per event
  for (int i = 0; i < event_count(); ++i) {
    out += std::to_string(i);
    out += ',';
    out += format_time(time_[i]);
    if (event_kind(i) == GraphEventKind::kFragmentation) {
      out += ",fragmentation,";
      out += std::to_string(rank_of(live, a_[i]) + 1);
      live.push_back(b_[i]);  // fresh ids exceed every live id
    } else {
      const int l = static_cast<int>(live.size());
      group_of.assign(static_cast<std::size_t>(l), -1);
      for (int g = 0; g < group_count(i); ++g) {
        for (std::int32_t id : group(i, g)) {
          group_of[static_cast<std::size_t>(rank_of(live, id))] = g;
        }
      }
      std::string text = "{";
      bool first_block = true;
      for (int r = 0; r < l; ++r) {
        const int g = group_of[static_cast<std::size_t>(r)];
        if (g >= 0) {
          const auto members = group(i, g);
          if (rank_of(live, members[0]) != r) continue;  // emit at the group minimum
          if (!first_block) text += '|';
          first_block = false;
          for (std::size_t m = 0; m < members.size(); ++m) {
            if (m > 0) text += ',';
            text += std::to_string(rank_of(live, members[m]) + 1);
          }
        } else {
          if (!first_block) text += '|';
          first_block = false;
          text += std::to_string(r + 1);
        }
      }
      text += '}';
      out += ",coalescence,";
      if (text.find(',') != std::string::npos) {
        out += '"';
        out += text;
        out += '"';
      } else {
        out += text;
      }
      for (int g = 0; g < group_count(i); ++g) {
        const auto members = group(i, g);
        for (std::size_t m = 1; m < members.size(); ++m) {
          live.erase(std::lower_bound(live.begin(), live.end(), members[m]));
        }
      }
    }
    out += '\n';
  }
  return out;
}

AncestralGraph AncestralGraph::from_csv(int initial_nodes, double horizon, double frag_cutoff,
                                        const std::string& csv) {
  AncestralGraph graph(initial_nodes, horizon, frag_cutoff);
  std::vector<std::int32_t> live;
  for (std::int32_t id = 0; id < initial_nodes; ++id) live.push_back(id);

  std::size_t pos = 0;
  bool first_line = true;
  while (pos < csv.size()) {
    std::size_t eol = csv.find('\n', pos);
    if (eol == std::string::npos) eol = csv.size();
    std::string line = csv.substr(pos, eol - pos);
    pos = eol + 1;
    if (line.empty()) continue;
    if (first_line) {
      first_line = false;
      if (line.rfind("event_index", 0) == 0) continue;
    }

    // event_index,time,kind,detail with the detail possibly quoted
    std::vector<std::string> fields;
    std::size_t at = 0;
    for (int f = 0; f < 3; ++f) {
      const std::size_t comma = line.find(',', at);
      if (comma == std::string::npos) {
        throw std::invalid_argument("ancestral graph csv: malformed row '" + line + "'");
      }
      fields.push_back(line.substr(at, comma - at));
      at = comma + 1;
    }
    std::string detail = line.substr(at);
    if (detail.size() >= 2 && detail.front() == '"' && detail.back() == '"') {
      detail = detail.substr(1, detail.size() - 2);
    }

    char* end = nullptr;
    const double time = std::strtod(fields[1].c_str(), &end);
    if (end == fields[1].c_str() || *end != '\0') {
      throw std::invalid_argument("ancestral graph csv: bad time '" + fields[1] + "'");
    }

    if (fields[2] == "fragmentation") {
      const long rank = std::strtol(detail.c_str(), &end, 10);
      if (end == detail.c_str() || *end != '\0' || rank < 1 ||
          rank > static_cast<long>(live.size())) {
        throw std::invalid_argument("ancestral graph csv: bad fragmentation node '" + detail +
                                    "'");
      }
      const std::int32_t spawned = graph.add_fragmentation(time, live[rank - 1]);
      live.push_back(spawned);
    } else if (fields[2] == "coalescence") {
      if (detail.size() < 2 || detail.front() != '{' || detail.back() != '}') {
        throw std::invalid_argument("ancestral graph csv: bad merge detail '" + detail + "'");
      }
      const int l = static_cast<int>(live.size());
      std::vector<bool> seen(static_cast<std::size_t>(l), false);
      std::vector<std::vector<std::int32_t>> groups;
      std::size_t bpos = 1;
      while (bpos < detail.size() - 1) {
        std::size_t bend = detail.find('|', bpos);
        if (bend == std::string::npos || bend > detail.size() - 1) bend = detail.size() - 1;
        std::vector<std::int32_t> members;
        std::size_t mpos = bpos;
        while (mpos < bend) {
          std::size_t mend = detail.find(',', mpos);
          if (mend == std::string::npos || mend > bend) mend = bend;
          const std::string tok = detail.substr(mpos, mend - mpos);
          const long rank = std::strtol(tok.c_str(), &end, 10);
          if (end == tok.c_str() || *end != '\0' || rank < 1 || rank > l ||
              seen[static_cast<std::size_t>(rank - 1)]) {
            throw std::invalid_argument("ancestral graph csv: bad merge member '" + tok + "'");
          }
          seen[static_cast<std::size_t>(rank - 1)] = true;
          members.push_back(live[rank - 1]);
          mpos = mend + 1;
        }
        if (members.empty()) {
          throw std::invalid_argument("ancestral graph csv: empty merge block");
        }
        if (members.size() >= 2) groups.push_back(std::move(members));
        bpos = bend + 1;
      }
      if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
        throw std::invalid_argument("ancestral graph csv: merge detail must cover every node");
      }
      if (groups.empty()) {
        throw std::invalid_argument("ancestral graph csv: coalescence merges nothing");
      }
      graph.add_coalescence(time, groups);
      for (const auto& g : groups) {
        for (std::size_t m = 1; m < g.size(); ++m) {
          live.erase(std::lower_bound(live.begin(), live.end(), g[m]));
        }
      }
    } else {
      throw std::invalid_argument("ancestral graph csv: unknown kind '" + fields[2] + "'");
    }
  }
  return graph;
}

}  // namespace pedcoal
