#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "pedcoal/genealogy.hpp"
#include "pedcoal/partition.hpp"

namespace pedcoal {

/// Branch-length spectrum of one genealogy: tau[r-1] is the time
/// integral of the number of blocks of size r, for r = 1..n-1.
struct SfsVector {
  int n = 0;
  std::vector<double> tau;
  std::vector<double> normalized;  // tau over its sum; zeros when the sum is zero
  bool truncated = false;
};

/// Integrates the piecewise-constant block-size counts of `path` up to
/// absorption, or up to the horizon for a truncated path (flagged).
/// The path must start at (0, singletons of n).
SfsVector branch_lengths(const GenealogyPath& path, int n);

/// Spectrum averaged over loci: raw tau vectors are averaged first and
/// the mean is normalized afterwards. Truncated loci are dropped from
/// the averages and only counted.
struct QuenchedSfs {
  int n = 0;
  std::vector<double> tau_mean;
  std::vector<double> sfs;         // normalized mean
  std::vector<double> sfs_stderr;  // leave-one-out error bars
  int loci_used = 0;
  int loci_truncated = 0;
};

QuenchedSfs quenched_sfs(const std::vector<SfsVector>& loci);

/// Sup distance between the empirical law of `samples` and a reference
/// distribution function.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);

/// Rejection threshold for that statistic at the 1e-3 level.
double ks_critical_value(int count);

using PartitionHistogram = std::map<Partition, std::int64_t>;

/// Half the L1 distance between the normalized histograms; both must
/// count partitions of the same ground set.
double partition_tv_distance(const PartitionHistogram& a, const PartitionHistogram& b);

/// Spectrum report rows: "lambda,graph_id,r,tau_mean,sfs_normalized,stderr".
std::string sfs_csv_header();
void append_sfs_rows(std::string& out, double lambda, int graph_id, const QuenchedSfs& sfs);

}  // namespace pedcoal
