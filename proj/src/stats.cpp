#include "pedcoal/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace pedcoal {

namespace {

std::vector<int> size_counts(const Partition& p, int n) {
  std::vector<int> counts(static_cast<std::size_t>(n) + 1, 0);
  for (int s : p.block_sizes()) counts[static_cast<std::size_t>(s)] += 1;
  return counts;
}

std::vector<double> normalize_or_zero(const std::vector<double>& v) {
  double total = 0.0;
  for (double x : v) total += x;
  std::vector<double> out(v.size(), 0.0);
  if (total > 0.0) {
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / total;
  }
  return out;
}

void append_double(std::string& out, double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  out += buf;
}

}  // namespace

SfsVector branch_lengths(const GenealogyPath& path, int n) {
  if (n < 2) throw std::invalid_argument("branch_lengths: need at least two leaves");
  if (path.jumps.empty()) throw std::invalid_argument("branch_lengths: empty path");
  const GenealogyJump& first = path.jumps.front();
  if (first.partition.ground_size() != n) {
    throw std::invalid_argument("branch_lengths: path ground set does not match n");
  }
  if (first.time != 0.0 || first.partition != Partition::singletons(n)) {
    throw std::invalid_argument("branch_lengths: path must start at time zero in singletons");
  }

  SfsVector out;
  out.n = n;
  out.tau.assign(static_cast<std::size_t>(n) - 1, 0.0);
  out.truncated = path.truncated;

  double end = path.truncated ? path.horizon : path.jumps.back().time;
  for (std::size_t j = 0; j < path.jumps.size(); ++j) {
    double start = path.jumps[j].time;
    double stop = (j + 1 < path.jumps.size()) ? path.jumps[j + 1].time : end;
    double span = stop - start;
    if (span <= 0.0) continue;
    std::vector<int> counts = size_counts(path.jumps[j].partition, n);
    for (int r = 1; r < n; ++r) {
      out.tau[static_cast<std::size_t>(r) - 1] += span * counts[static_cast<std::size_t>(r)];
    }
  }
  out.normalized = normalize_or_zero(out.tau);
  return out;
}

QuenchedSfs quenched_sfs(const std::vector<SfsVector>& loci) {
  if (loci.empty()) throw std::invalid_argument("quenched_sfs: no loci");
  int n = loci.front().n;
  for (const SfsVector& locus : loci) {
    if (locus.n != n) throw std::invalid_argument("quenched_sfs: mixed sample sizes");
  }

  QuenchedSfs out;
  out.n = n;
  std::vector<const SfsVector*> used;
  for (const SfsVector& locus : loci) {
    if (locus.truncated) {
      out.loci_truncated += 1;
    } else {
      used.push_back(&locus);
    }
  }
  out.loci_used = static_cast<int>(used.size());
  if (used.empty()) throw std::invalid_argument("quenched_sfs: every locus is truncated");

  std::size_t width = static_cast<std::size_t>(n) - 1;
  std::vector<double> total(width, 0.0);
  for (const SfsVector* locus : used) {
    if (locus->tau.size() != width) throw std::invalid_argument("quenched_sfs: malformed locus");
    for (std::size_t i = 0; i < width; ++i) total[i] += locus->tau[i];
  }
  std::size_t m = used.size();
  out.tau_mean.assign(width, 0.0);
  for (std::size_t i = 0; i < width; ++i) out.tau_mean[i] = total[i] / static_cast<double>(m);
  out.sfs = normalize_or_zero(out.tau_mean);

  out.sfs_stderr.assign(width, 0.0);
  if (m >= 2) {
    // Leave-one-out estimates of the normalized spectrum.
    std::vector<double> sum(width, 0.0);
    std::vector<double> sumsq(width, 0.0);
    std::vector<double> held(width, 0.0);
    for (const SfsVector* locus : used) {
      for (std::size_t i = 0; i < width; ++i) {
        held[i] = (total[i] - locus->tau[i]) / static_cast<double>(m - 1);
      }
      std::vector<double> theta = normalize_or_zero(held);
      for (std::size_t i = 0; i < width; ++i) {
        sum[i] += theta[i];
        sumsq[i] += theta[i] * theta[i];
      }
    }
    double dm = static_cast<double>(m);
    for (std::size_t i = 0; i < width; ++i) {
      double mean = sum[i] / dm;
      double var = sumsq[i] / dm - mean * mean;
      if (var < 0.0) var = 0.0;
      out.sfs_stderr[i] = std::sqrt((dm - 1.0) * var);
    }
  }
  return out;
}

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw std::invalid_argument("ks_statistic: no samples");
  std::sort(samples.begin(), samples.end());
  double m = static_cast<double>(samples.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    double f = cdf(samples[i]);
    double below = f - static_cast<double>(i) / m;
    double above = static_cast<double>(i + 1) / m - f;
    worst = std::max(worst, std::max(below, above));
  }
  return worst;
}

double ks_critical_value(int count) {
  if (count <= 0) throw std::invalid_argument("ks_critical_value: need a positive count");
  // Threshold at level 1e-3: sqrt(-log(alpha/2) / 2) over sqrt(count).
  return std::sqrt(-std::log(0.0005) / 2.0) / std::sqrt(static_cast<double>(count));
}

double partition_tv_distance(const PartitionHistogram& a, const PartitionHistogram& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("partition_tv_distance: empty histogram");
  int n = a.begin()->first.ground_size();
  double total_a = 0.0;
  double total_b = 0.0;
  for (const auto& [p, c] : a) {
    if (p.ground_size() != n || c < 0) throw std::invalid_argument("partition_tv_distance: bad histogram");
    total_a += static_cast<double>(c);
  }
  for (const auto& [p, c] : b) {
    if (p.ground_size() != n || c < 0) throw std::invalid_argument("partition_tv_distance: bad histogram");
    total_b += static_cast<double>(c);
  }
  if (total_a <= 0.0 || total_b <= 0.0) {
    throw std::invalid_argument("partition_tv_distance: zero-count histogram");
  }
  double dist = 0.0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() || ib != b.end()) {
    if (ib == b.end() || (ia != a.end() && ia->first < ib->first)) {
      dist += static_cast<double>(ia->second) / total_a;
      ++ia;
    } else if (ia == a.end() || ib->first < ia->first) {
      dist += static_cast<double>(ib->second) / total_b;
      ++ib;
    } else {
      dist += std::abs(static_cast<double>(ia->second) / total_a -
                       static_cast<double>(ib->second) / total_b);
      ++ia;
      ++ib;
    }
  }
  return 0.5 * dist;
}

std::string sfs_csv_header() { return "lambda,graph_id,r,tau_mean,sfs_normalized,stderr\n"; }

void append_sfs_rows(std::string& out, double lambda, int graph_id, const QuenchedSfs& sfs) {
  for (std::size_t i = 0; i < sfs.sfs.size(); ++i) {
    append_double(out, lambda);
    out += ',';
    out += std::to_string(graph_id);
    out += ',';
    out += std::to_string(i + 1);
    out += ',';
    append_double(out, sfs.tau_mean[i]);
    out += ',';
    append_double(out, sfs.sfs[i]);
    out += ',';
    append_double(out, sfs.sfs_stderr[i]);
    out += '\n';
  }
}

}  // namespace pedcoal
