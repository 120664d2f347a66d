#include "pedcoal/xi.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace pedcoal {
namespace {

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

void check_paintbox(const std::vector<double>& paintbox) {
  if (paintbox.empty()) throw std::invalid_argument("paintbox: empty");
  double sum = 0.0;
  double prev = 1.0;
  for (double x : paintbox) {
    if (!std::isfinite(x) || x < 0.0 || x > 1.0) {
      throw std::invalid_argument("paintbox: entries must lie in [0,1]");
    }
    if (x > prev + 1e-12) throw std::invalid_argument("paintbox: entries must be nonincreasing");
    prev = x;
    sum += x;
  }
  if (sum > 1.0 + 1e-12) throw std::invalid_argument("paintbox: entries sum past 1");
  if (paintbox.front() <= 0.0) throw std::invalid_argument("paintbox: no positive entry");
}

double self_overlap(const std::vector<double>& paintbox) {
  double dot = 0.0;
  for (double x : paintbox) dot += x * x;
  return dot;
}

struct ValueClass {
  double value = 0.0;
  int count = 0;
};

std::vector<ValueClass> classes_of(const std::vector<double>& paintbox) {
  std::vector<ValueClass> cls;
  for (double x : paintbox) {
    if (x <= 0.0) continue;
    if (!cls.empty() && cls.back().value == x) {
      ++cls.back().count;
    } else {
      cls.push_back({x, 1});
    }
  }
  return cls;
}

double falling(int n, int take) {
  double out = 1.0;
  for (int i = 0; i < take; ++i) out *= static_cast<double>(n - i);
  return out;
}

/// Sum over placements of the singletons: each either falls into the
/// dust mass or occupies a so-far-unused interval alone.
double singleton_factor(const std::vector<ValueClass>& cls, const std::vector<int>& used,
                        double dust, int singles) {
  std::vector<double> elem{1.0};
  for (std::size_t c = 0; c < cls.size(); ++c) {
    const int remaining = cls[c].count - used[c];
    for (int rep = 0; rep < remaining; ++rep) {
      const std::size_t deg = std::min<std::size_t>(elem.size(), static_cast<std::size_t>(singles));
      elem.resize(std::min<std::size_t>(elem.size() + 1, static_cast<std::size_t>(singles) + 1));
      for (std::size_t l = deg; l > 0; --l) elem[l] += cls[c].value * elem[l - 1];
    }
  }
  double total = 0.0;
  for (std::size_t l = 0; l < elem.size(); ++l) {
    total += falling(singles, static_cast<int>(l)) * elem[l] *
             std::pow(dust, static_cast<double>(singles - static_cast<int>(l)));
  }
  return total;
}

void assign_groups(const std::vector<ValueClass>& cls, const std::vector<int>& sizes,
                   std::size_t next, std::vector<int>& used, double factor, double dust,
                   int singles, double& total) {
  if (next == sizes.size()) {
    total += factor * singleton_factor(cls, used, dust, singles);
    return;
  }
  for (std::size_t c = 0; c < cls.size(); ++c) {
    const int remaining = cls[c].count - used[c];
    if (remaining == 0) continue;
    ++used[c];
    assign_groups(cls, sizes, next + 1, used, factor * remaining *
                      std::pow(cls[c].value, static_cast<double>(sizes[next])),
                  dust, singles, total);
    --used[c];
  }
}

/// Probability that throwing the lineages produces exactly this merge
/// configuration: each group lands in its own interval, each singleton
/// in dust or alone in an interval.
double assignment_sum(const std::vector<double>& paintbox, const std::vector<int>& sizes,
                      int singles) {
  const std::vector<ValueClass> cls = classes_of(paintbox);
  double dust = 1.0 - std::accumulate(paintbox.begin(), paintbox.end(), 0.0);
  if (dust < 0.0) dust = 0.0;
  std::vector<int> used(cls.size(), 0);
  double total = 0.0;
  assign_groups(cls, sizes, 0, used, 1.0, dust, singles, total);
  return total;
}

struct Segment {
  double a, b;
};

double kronrod_15(double (*f)(double, const void*), const void* ctx, double a, double b,
                  double& gauss) {
  static const double nodes[8] = {0.0,
                                  0.207784955007898467600689403773245,
                                  0.405845151377397166906606412076961,
                                  0.586087235467691130294144838258730,
                                  0.741531185599394439863864773280788,
                                  0.864864423359769072789712788640926,
                                  0.949107912342758524526189684047851,
                                  0.991455371120812639206854697526329};
  static const double wk[8] = {0.209482141084727828012999174891714,
                               0.204432940075298892414161999234649,
                               0.190350578064785409913256402421014,
                               0.169004726639267902826583426598550,
                               0.140653259715525918745189590510238,
                               0.104790010322250183839876322541518,
                               0.063092092629978553290700663189204,
                               0.022935322010529224963732008058970};
  static const double wg[4] = {0.417959183673469387755102040816327,
                               0.381830050505118944950369775488975,
                               0.279705391489276667901467771423780,
                               0.129484966168869693270611432679082};
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double f_mid = f(mid, ctx);
  double k = wk[0] * f_mid;
  double g = wg[0] * f_mid;
  for (int i = 1; i < 8; ++i) {
    const double lo = f(mid - half * nodes[i], ctx);
    const double hi = f(mid + half * nodes[i], ctx);
    k += wk[i] * (lo + hi);
    if (i % 2 == 0) g += wg[i / 2] * (lo + hi);
  }
  gauss = g * half;
  return k * half;
}

double adaptive_integral(double (*f)(double, const void*), const void* ctx, double a, double b,
                         double rel_tol) {
  double g_whole = 0.0;
  const double k_whole = kronrod_15(f, ctx, a, b, g_whole);
  const double floor_tol = 1e-300;
  double tol = rel_tol * std::abs(k_whole) + floor_tol;

  std::vector<Segment> work{{a, b}};
  double total = 0.0;
  int splits = 0;
  while (!work.empty()) {
    const Segment seg = work.back();
    work.pop_back();
    double g = 0.0;
    const double k = kronrod_15(f, ctx, seg.a, seg.b, g);
    const double width_share = (seg.b - seg.a) / (b - a);
    if (std::abs(k - g) <= tol * width_share || splits > 2000) {
      total += k;
      continue;
    }
    ++splits;
    const double mid = 0.5 * (seg.a + seg.b);
    work.push_back({seg.a, mid});
    work.push_back({mid, seg.b});
  }
  return total;
}

struct BetaCtx {
  double r;
  double (*f)(double, const void*);
  const void* inner_ctx;
};

double beta_integrand(double u, const void* raw) {
  const auto* ctx = static_cast<const BetaCtx*>(raw);
  const double z = 1.0 - std::pow(u, 1.0 / ctx->r);
  return ctx->f(z, ctx->inner_ctx) * std::pow(z, 1.0 - ctx->r) / ctx->r;
}

struct RateCtx {
  const std::vector<int>* sizes;
  int singles;
};

double pair_paintbox_rate(double z, const void* raw) {
  const auto* ctx = static_cast<const RateCtx*>(raw);
  return assignment_sum({z / 2.0, z / 2.0}, *ctx->sizes, ctx->singles);
}

}  // namespace

void XiMeasure::validate() const {
  if (!finite_nonneg(kingman_mass)) {
    throw std::invalid_argument("coalescence measure: bad Kingman mass");
  }
  for (const PaintboxAtom& atom : atoms) {
    if (!std::isfinite(atom.weight) || atom.weight <= 0.0) {
      throw std::invalid_argument("coalescence measure: atom weight must be positive");
    }
    check_paintbox(atom.paintbox);
  }
  if (beta) {
    if (!std::isfinite(beta->r) || beta->r < 0.0 || beta->r > 1.0) {
      throw std::invalid_argument("coalescence measure: beta parameter outside [0,1]");
    }
    if (!finite_nonneg(beta->rate)) {
      throw std::invalid_argument("coalescence measure: bad beta rate");
    }
  }
}

double XiMeasure::merger_mass() const {
  double mass = 0.0;
  for (const PaintboxAtom& atom : atoms) mass += atom.weight;
  if (beta && beta->rate > 0.0) {
    // Mass of rate * integral of z^2/2: the second Beta(2-r, r) moment.
    mass += beta->rate * (2.0 - beta->r) * (3.0 - beta->r) / 12.0;
  }
  return mass;
}

PresetKind PresetKind::arg(double lambda) {
  PresetKind kind;
  kind.tag = Tag::kArg;
  kind.lambda = lambda;
  return kind;
}

PresetKind PresetKind::psi_model(double psi, double rho, double lambda) {
  PresetKind kind;
  kind.tag = Tag::kPsi;
  kind.psi = psi;
  kind.rho = rho;
  kind.lambda = lambda;
  return kind;
}

PresetKind PresetKind::beta_model(double r, double rho, double lambda) {
  PresetKind kind;
  kind.tag = Tag::kBeta;
  kind.r = r;
  kind.rho = rho;
  kind.lambda = lambda;
  return kind;
}

PresetKind PresetKind::sw_mixture(std::vector<SwMixtureRow> rows, double lambda) {
  PresetKind kind;
  kind.tag = Tag::kSwMixture;
  kind.rows = std::move(rows);
  kind.lambda = lambda;
  return kind;
}

PresetKind PresetKind::mixed(std::vector<std::pair<XiMeasure, double>> parts, double lambda) {
  PresetKind kind;
  kind.tag = Tag::kMixed;
  kind.parts = std::move(parts);
  kind.lambda = lambda;
  return kind;
}

XiMeasure preset(const PresetKind& kind) {
  if (!finite_nonneg(kind.lambda)) throw std::invalid_argument("preset: bad fragmentation rate");
  XiMeasure out;
  switch (kind.tag) {
    case PresetKind::Tag::kArg:
      out.kingman_mass = 2.0;
      break;
    case PresetKind::Tag::kPsi: {
      if (!std::isfinite(kind.psi) || kind.psi < 0.0 || kind.psi > 1.0) {
        throw std::invalid_argument("preset: psi outside [0,1]");
      }
      if (!finite_nonneg(kind.rho)) throw std::invalid_argument("preset: bad rho");
      out.kingman_mass = 2.0;
      if (kind.psi > 0.0) {
        out.atoms.push_back({kind.psi * kind.psi / 2.0, {kind.psi / 2.0, kind.psi / 2.0}});
      }
      break;
    }
    case PresetKind::Tag::kBeta: {
      if (!std::isfinite(kind.r) || kind.r < 0.0 || kind.r > 1.0) {
        throw std::invalid_argument("preset: beta parameter outside [0,1]");
      }
      if (!finite_nonneg(kind.rho)) throw std::invalid_argument("preset: bad rho");
      out.kingman_mass = 2.0;
      if (kind.rho > 0.0) out.beta = BetaComponent{kind.r, kind.rho};
      break;
    }
    case PresetKind::Tag::kSwMixture: {
      double merger = 0.0;
      for (const SwMixtureRow& row : kind.rows) {
        if (!std::isfinite(row.x) || row.x <= 0.0 || row.x > 1.0) {
          throw std::invalid_argument("preset: mixture fraction outside (0,1]");
        }
        if (row.m < 1) throw std::invalid_argument("preset: mixture parent count below 1");
        if (!finite_nonneg(row.weight)) throw std::invalid_argument("preset: bad mixture weight");
        if (row.weight == 0.0) continue;
        const double mass = row.weight * row.x * row.x / row.m;
        merger += mass;
        out.atoms.push_back(
            {2.0 * mass, std::vector<double>(static_cast<std::size_t>(row.m), row.x / row.m)});
      }
      if (merger > 1.0 + 1e-12) {
        throw std::invalid_argument("preset: mixture merger mass exceeds 1");
      }
      out.kingman_mass = std::max(0.0, 2.0 * (1.0 - merger));
      break;
    }
    case PresetKind::Tag::kMixed: {
      double beta_r = 0.0;
      double beta_rate = 0.0;
      for (const auto& [measure, scale] : kind.parts) {
        measure.validate();
        if (!finite_nonneg(scale)) throw std::invalid_argument("preset: bad mixture scale");
        if (scale == 0.0) continue;
        out.kingman_mass += scale * measure.kingman_mass;
        for (const PaintboxAtom& atom : measure.atoms) {
          out.atoms.push_back({scale * atom.weight, atom.paintbox});
        }
        if (measure.beta && measure.beta->rate > 0.0) {
          const double scaled = scale * measure.beta->rate;
          if (beta_rate > 0.0 && measure.beta->r != beta_r) {
            throw std::invalid_argument(
                "preset: cannot combine beta families with different parameters");
          }
          beta_r = measure.beta->r;
          beta_rate += scaled;
        }
      }
      if (beta_rate > 0.0) out.beta = BetaComponent{beta_r, beta_rate};
      break;
    }
  }
  out.validate();
  return out;
}

double paintbox_no_merge(const std::vector<double>& paintbox, int count) {
  if (count < 0) throw std::invalid_argument("paintbox_no_merge: negative count");
  const std::vector<ValueClass> cls = classes_of(paintbox);
  double dust = 1.0 - std::accumulate(paintbox.begin(), paintbox.end(), 0.0);
  if (dust < 0.0) dust = 0.0;
  const std::vector<int> used(cls.size(), 0);
  return singleton_factor(cls, used, dust, count);
}

double beta_family_mean(double r, double (*f)(double, const void*), const void* ctx) {
  if (!std::isfinite(r) || r < 0.0 || r > 1.0) {
    throw std::invalid_argument("beta_family_mean: parameter outside [0,1]");
  }
  if (r == 0.0) return f(1.0, ctx);
  const BetaCtx wrapped{r, f, ctx};
  // Tighter than the documented bound so sums of several rates keep
  // their own combined error under it.
  const double raw = adaptive_integral(beta_integrand, &wrapped, 0.0, 1.0, 1e-12);
  return raw / (std::tgamma(2.0 - r) * std::tgamma(r));
}

double xi_rate(int b, std::vector<int> merge_sizes, int s, const XiMeasure& xi) {
  xi.validate();
  if (b < 2) throw std::invalid_argument("xi_rate: need at least two lineages");
  if (merge_sizes.empty()) throw std::invalid_argument("xi_rate: identity transition");
  long covered = 0;
  for (int k : merge_sizes) {
    if (k < 2) throw std::invalid_argument("xi_rate: merge group below size 2");
    covered += k;
  }
  if (s < 0 || covered + s != b) {
    throw std::invalid_argument("xi_rate: sizes and singletons must account for all lineages");
  }
  std::sort(merge_sizes.begin(), merge_sizes.end(), std::greater<int>());

  double rate = 0.0;
  if (merge_sizes.size() == 1 && merge_sizes[0] == 2) rate += xi.kingman_mass;
  for (const PaintboxAtom& atom : xi.atoms) {
    rate += atom.weight / self_overlap(atom.paintbox) *
            assignment_sum(atom.paintbox, merge_sizes, s);
  }
  if (xi.beta && xi.beta->rate > 0.0) {
    const RateCtx ctx{&merge_sizes, s};
    rate += xi.beta->rate * beta_family_mean(xi.beta->r, pair_paintbox_rate, &ctx);
  }
  return rate;
}

}  // namespace pedcoal
