#include "pedcoal/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace pedcoal {

namespace {

constexpr double kProbSumTol = 1e-12;

void check_rows(int n, const std::vector<DemographyRow>& rows) {
  if (n < 2) throw std::invalid_argument("demography: population size must be at least 2");
  if (rows.empty()) throw std::invalid_argument("demography: no rows");
  double total = 0.0;
  for (const auto& row : rows) {
    if (row.k < 0 || row.k > n)
      throw std::invalid_argument("demography: child count out of range");
    if (row.p < 2 || row.p > n)
      throw std::invalid_argument("demography: potential-parent count out of range");
    if (!(row.prob >= 0.0))
      throw std::invalid_argument("demography: negative row probability");
    total += row.prob;
  }
  if (std::abs(total - 1.0) > kProbSumTol)
    throw std::invalid_argument("demography: row probabilities must sum to 1");
}

/// Uniform ascending k-subset of {0..n-1} (Floyd's method).
void sample_subset(RandomStream& rng, int n, int k, std::vector<std::int32_t>& out) {
  out.clear();
  if (k == n) {
    for (int i = 0; i < n; ++i) out.push_back(i);
    return;
  }
  for (int j = n - k; j < n; ++j) {
    const auto t = static_cast<std::int32_t>(rng.next_below(static_cast<std::uint64_t>(j) + 1));
    auto it = std::lower_bound(out.begin(), out.end(), t);
    if (it != out.end() && *it == t) {
      auto jt = std::lower_bound(out.begin(), out.end(), static_cast<std::int32_t>(j));
      out.insert(jt, static_cast<std::int32_t>(j));
    } else {
      out.insert(it, t);
    }
  }
}

/// Core sampler shared by sample_step and Pedigree extension so both see
/// identical draws. Appends one step to the flat arrays.
void sample_step_into(const ModelParams& params, RandomStream& rng,
                      std::vector<std::int32_t>& child, std::vector<std::int32_t>& pa,
                      std::vector<std::int32_t>& pb, std::vector<std::int32_t>& scratch) {
  const int n = params.n_individuals;
  const auto& rows = params.demography.rows();

  const DemographyRow* row = &rows.back();
  if (rows.size() > 1) {
    const double u = rng.next_double();
    double acc = 0.0;
    for (const auto& r : rows) {
      acc += r.prob;
      if (u < acc) {
        row = &r;
        break;
      }
    }
  }

  sample_subset(rng, n, row->k, scratch);
  child.insert(child.end(), scratch.begin(), scratch.end());

  // Potential parents; identity when the whole population qualifies.
  // Children are already copied out, so the scratch buffer is reusable.
  const int p = row->p;
  const bool identity = (p == n);
  if (!identity) sample_subset(rng, n, p, scratch);
  auto potential = [&](std::uint64_t idx) {
    return identity ? static_cast<std::int32_t>(idx) : scratch[idx];
  };

  for (int c = 0; c < row->k; ++c) {
    const bool selfed = rng.next_double() < params.selfing;
    if (selfed) {
      const auto a = potential(rng.next_below(static_cast<std::uint64_t>(p)));
      pa.push_back(a);
      pb.push_back(a);
    } else {
      const auto i = rng.next_below(static_cast<std::uint64_t>(p));
      auto j = rng.next_below(static_cast<std::uint64_t>(p) - 1);
      if (j >= i) ++j;
      const auto a = potential(i);
      const auto b = potential(j);
      pa.push_back(std::min(a, b));
      pb.push_back(std::max(a, b));
    }
  }
}

double binom2(double m) { return m * (m - 1.0) / 2.0; }
double binom3(double m) { return m * (m - 1.0) * (m - 2.0) / 6.0; }

McEstimate summarize(const std::vector<double>& values) {
  McEstimate est;
  est.reps = static_cast<long>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  est.mean = sum / static_cast<double>(est.reps);
  double ss = 0.0;
  for (double v : values) {
    const double d = v - est.mean;
    ss += d * d;
  }
  if (est.reps > 1)
    est.stderr_ = std::sqrt(ss / (static_cast<double>(est.reps) * (est.reps - 1.0)));
  return est;
}

}  // namespace

Demography::Demography(int n_individuals, std::vector<DemographyRow> rows)
    : rows_(std::move(rows)) {
  check_rows(n_individuals, rows_);
}

double Demography::mean_k() const {
  double m = 0.0;
  for (const auto& row : rows_) m += row.prob * row.k;
  return m;
}

int Demography::max_k() const {
  int m = 0;
  for (const auto& row : rows_) m = std::max(m, row.k);
  return m;
}

ModelParams ModelParams::moran(int n_individuals, double selfing) {
  return {n_individuals, selfing, Demography(n_individuals, {{1, n_individuals, 1.0}})};
}

ModelParams ModelParams::wright_fisher(int n_individuals, double selfing) {
  return {n_individuals, selfing,
          Demography(n_individuals, {{n_individuals, n_individuals, 1.0}})};
}

ModelParams ModelParams::psi(int n_individuals, double psi, double rho, double selfing) {
  if (!(psi > 0.0) || psi > 1.0)
    throw std::invalid_argument("psi preset: fraction must be in (0,1]");
  const double n = n_individuals;
  const double big = rho / (n * (n - 1.0));
  if (!(big >= 0.0) || big > 1.0)
    throw std::invalid_argument("psi preset: event probability out of range");
  // Small slack so fractions like 0.3 * 10 floor to the intended integer.
  const int kbig = static_cast<int>(std::floor(psi * n + 1e-9));
  return {n_individuals, selfing,
          Demography(n_individuals, {{1, n_individuals, 1.0 - big}, {kbig, 2, big}})};
}

ModelParams ModelParams::sw(int n_individuals, double selfing, std::vector<DemographyRow> rows) {
  return {n_individuals, selfing, Demography(n_individuals, std::move(rows))};
}

ModelParams ModelParams::mixture(int n_individuals, double selfing,
                                 std::vector<std::pair<Demography, double>> components) {
  double wsum = 0.0;
  for (const auto& [demo, w] : components) wsum += w;
  if (std::abs(wsum - 1.0) > kProbSumTol)
    throw std::invalid_argument("mixture: component weights must sum to 1");
  std::vector<DemographyRow> rows;
  for (const auto& [demo, w] : components)
    for (const auto& row : demo.rows()) rows.push_back({row.k, row.p, row.prob * w});
  return {n_individuals, selfing, Demography(n_individuals, std::move(rows))};
}

int OffspringStep::selfing_count() const {
  int s = 0;
  for (std::size_t i = 0; i < parent_a.size(); ++i) s += (parent_a[i] == parent_b[i]);
  return s;
}

bool OffspringStep::is_child(int individual) const {
  return std::binary_search(children.begin(), children.end(),
                            static_cast<std::int32_t>(individual));
}

int OffspringStep::child_slot(int individual) const {
  auto it = std::lower_bound(children.begin(), children.end(),
                             static_cast<std::int32_t>(individual));
  if (it == children.end() || *it != individual) return -1;
  return static_cast<int>(it - children.begin());
}

std::vector<ParentTally> parent_tallies(const OffspringStep& step) {
  std::vector<ParentTally> tallies;
  auto bump = [&](std::int32_t indiv, std::int32_t dv, std::int32_t du) {
    for (auto& t : tallies) {
      if (t.individual == indiv) {
        t.selfed += dv;
        t.outcross_slots += du;
        return;
      }
    }
    tallies.push_back({indiv, dv, du});
  };
  for (std::size_t i = 0; i < step.parent_a.size(); ++i) {
    if (step.parent_a[i] == step.parent_b[i]) {
      bump(step.parent_a[i], 1, 0);
    } else {
      bump(step.parent_a[i], 0, 1);
      bump(step.parent_b[i], 0, 1);
    }
  }
  std::sort(tallies.begin(), tallies.end(),
            [](const ParentTally& a, const ParentTally& b) { return a.individual < b.individual; });
  return tallies;
}

OffspringStep sample_step(const ModelParams& params, RandomStream& rng) {
  OffspringStep step;
  std::vector<std::int32_t> scratch;
  sample_step_into(params, rng, step.children, step.parent_a, step.parent_b, scratch);
  return step;
}

Pedigree::Pedigree(ModelParams params, RandomStream stream)
    : params_(std::move(params)), stream_(stream), extendable_(true) {
  check_rows(params_.n_individuals, params_.demography.rows());
  offsets_.push_back(0);
}

Pedigree::Pedigree(ModelParams params, std::vector<OffspringStep> steps)
    : params_(std::move(params)), stream_(0), extendable_(false) {
  check_rows(params_.n_individuals, params_.demography.rows());
  offsets_.push_back(0);
  for (const auto& step : steps) {
    const int n = params_.n_individuals;
    if (step.parent_a.size() != step.children.size() ||
        step.parent_b.size() != step.children.size())
      throw std::invalid_argument("pedigree: ragged step");
    for (std::size_t i = 0; i < step.children.size(); ++i) {
      if (i > 0 && step.children[i] <= step.children[i - 1])
        throw std::invalid_argument("pedigree: children must be strictly ascending");
      if (step.children[i] < 0 || step.children[i] >= n || step.parent_a[i] < 0 ||
          step.parent_a[i] >= n || step.parent_b[i] < 0 || step.parent_b[i] >= n)
        throw std::invalid_argument("pedigree: individual index out of range");
    }
    child_.insert(child_.end(), step.children.begin(), step.children.end());
    for (std::size_t i = 0; i < step.children.size(); ++i) {
      pa_.push_back(std::min(step.parent_a[i], step.parent_b[i]));
      pb_.push_back(std::max(step.parent_a[i], step.parent_b[i]));
    }
    offsets_.push_back(static_cast<std::uint32_t>(child_.size()));
    ++depth_;
  }
}

void Pedigree::ensure_depth(int depth) {
  if (depth <= depth_) return;
  if (!extendable_)
    throw std::logic_error("pedigree: fixed-depth pedigree cannot be extended");
  while (depth_ < depth) {
    sample_step_into(params_, stream_, child_, pa_, pb_, scratch_);
    offsets_.push_back(static_cast<std::uint32_t>(child_.size()));
    ++depth_;
  }
}

Pedigree::StepView Pedigree::step(int k) const {
  if (k < 1 || k > depth_) throw std::out_of_range("pedigree: step index out of range");
  const auto lo = offsets_[k - 1];
  return {child_.data() + lo, pa_.data() + lo, pb_.data() + lo,
          static_cast<int>(offsets_[k] - lo)};
}

OffspringStep Pedigree::step_copy(int k) const {
  const StepView v = step(k);
  OffspringStep out;
  out.children.assign(v.child, v.child + v.count);
  out.parent_a.assign(v.parent_a, v.parent_a + v.count);
  out.parent_b.assign(v.parent_b, v.parent_b + v.count);
  return out;
}

std::string Pedigree::to_text() const {
  std::string out;
  char buf[64];
  for (int k = 1; k <= depth_; ++k) {
    const StepView v = step(k);
    std::snprintf(buf, sizeof(buf), "%d", k);
    out += buf;
    for (int i = 0; i < v.count; ++i) {
      std::snprintf(buf, sizeof(buf), ";%d:%d,%d", v.child[i], v.parent_a[i], v.parent_b[i]);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

Pedigree Pedigree::from_text(ModelParams params, const std::string& text) {
  std::vector<OffspringStep> steps;
  std::istringstream in(text);
  std::string line;
  int expected = 1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string field;
    if (!std::getline(fields, field, ';'))
      throw std::invalid_argument("pedigree text: missing step index");
    if (std::stoi(field) != expected)
      throw std::invalid_argument("pedigree text: steps must be numbered consecutively from 1");
    OffspringStep step;
    while (std::getline(fields, field, ';')) {
      const auto colon = field.find(':');
      const auto comma = field.find(',', colon == std::string::npos ? 0 : colon);
      if (colon == std::string::npos || comma == std::string::npos)
        throw std::invalid_argument("pedigree text: malformed child entry '" + field + "'");
      step.children.push_back(std::stoi(field.substr(0, colon)));
      step.parent_a.push_back(std::stoi(field.substr(colon + 1, comma - colon - 1)));
      step.parent_b.push_back(std::stoi(field.substr(comma + 1)));
    }
    steps.push_back(std::move(step));
    ++expected;
  }
  return Pedigree(std::move(params), std::move(steps));
}

Pedigree build_pedigree(const ModelParams& params, int depth, RandomStream& rng) {
  Pedigree pedigree(params, rng);
  pedigree.ensure_depth(depth);
  return pedigree;
}

double c2_closed_sw(const ModelParams& params) {
  const double n = params.n_individuals;
  double total = 0.0;
  for (const auto& row : params.demography.rows()) {
    const double k = row.k;
    total += row.prob * (k / n * ((n - k) / (n - 1.0)) / n +
                         k * (k - 1.0) / (n * (n - 1.0)) / (2.0 * row.p));
  }
  return total;
}

double d_n(const ModelParams& params) {
  return (1.0 - params.selfing) * params.demography.mean_k() / params.n_individuals;
}

double c2_step_value(const OffspringStep& step, int n_individuals) {
  const double n = n_individuals;
  const double k = step.k();
  double sum = 0.0;
  for (const auto& t : parent_tallies(step)) {
    const double vtilde = 2.0 * t.selfed + t.outcross_slots;
    sum += (vtilde * vtilde - vtilde) / 16.0;
  }
  sum -= step.selfing_count() / 8.0;
  return (n - k) * k / (n * n * (n - 1.0)) + sum / binom2(n);
}

double c3_step_value(const OffspringStep& step, int n_individuals) {
  const double n = n_individuals;
  const double k = step.k();
  // Two shapes of triple merger. Newborn pair meeting their carried-over
  // parent: both transmissions must hit the carried copy (1/2 per selfed
  // slot, 1/4 per outcrossed slot). Three newborns through one parent:
  // all transmissions on one copy, and either copy works, so the product
  // of per-slot factors picks up a factor 2.
  double pair_with_carrier = 0.0;
  double all_newborn = 0.0;
  for (const auto& t : parent_tallies(step)) {
    const double v = t.selfed;
    const double u = t.outcross_slots;
    pair_with_carrier += binom2(v) / 4.0 + v * u / 8.0 + binom2(u) / 16.0;
    all_newborn += binom3(v) / 4.0 + binom2(v) * u / 8.0 + v * binom2(u) / 16.0 +
                   binom3(u) / 32.0;
  }
  return ((n - k) / n * pair_with_carrier + all_newborn) / binom3(n);
}

McEstimate c2_general_mc(const ModelParams& params, long reps, RandomStream& rng) {
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(reps));
  for (long r = 0; r < reps; ++r)
    values.push_back(c2_step_value(sample_step(params, rng), params.n_individuals));
  return summarize(values);
}

McEstimate c3_mc(const ModelParams& params, long reps, RandomStream& rng) {
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(reps));
  for (long r = 0; r < reps; ++r)
    values.push_back(c3_step_value(sample_step(params, rng), params.n_individuals));
  return summarize(values);
}

std::vector<double> empirical_paintbox(const OffspringStep& step, int n_individuals) {
  std::vector<double> out;
  for (const auto& t : parent_tallies(step))
    out.push_back((2.0 * t.selfed + t.outcross_slots) / (2.0 * n_individuals));
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

}  // namespace pedcoal
