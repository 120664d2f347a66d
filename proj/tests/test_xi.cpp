#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "pedcoal/xi.hpp"

using namespace pedcoal;

namespace {

double moment1(double z, const void*) { return z; }
double moment2(double z, const void*) { return z * z; }
double moment3(double z, const void*) { return z * z * z; }

double pair_survival(double z, const void* raw) {
  const int count = *static_cast<const int*>(raw);
  return 1.0 - paintbox_no_merge({z / 2.0, z / 2.0}, count);
}

// One transition shape: unlabeled merge-group sizes plus singleton count.
struct Shape {
  std::vector<int> groups;
  int singles = 0;
};

void collect_parts(int remaining, int cap, std::vector<int>& cur, int singles,
                   std::vector<Shape>& out) {
  if (remaining == 0) {
    out.push_back({cur, singles});
    return;
  }
  for (int part = std::min(remaining, cap); part >= 2; --part) {
    cur.push_back(part);
    collect_parts(remaining - part, part, cur, singles, out);
    cur.pop_back();
  }
}

std::vector<Shape> merge_shapes(int b) {
  std::vector<Shape> out;
  for (int s = 0; s <= b - 2; ++s) {
    std::vector<int> cur;
    collect_parts(b - s, b - s, cur, s, out);
  }
  return out;
}

double factorial(int n) {
  double out = 1.0;
  for (int i = 2; i <= n; ++i) out *= i;
  return out;
}

// Number of set partitions of b elements realizing the shape.
double shape_count(int b, const Shape& shape) {
  double count = factorial(b) / factorial(shape.singles);
  std::map<int, int> same_size;
  for (int k : shape.groups) {
    count /= factorial(k);
    ++same_size[k];
  }
  for (const auto& [size, times] : same_size) count /= factorial(times);
  return count;
}

}  // namespace

TEST_CASE("preset shapes") {
  const XiMeasure arg = preset(PresetKind::arg(3.0));
  CHECK(arg.kingman_mass == 2.0);
  CHECK(arg.atoms.empty());
  CHECK(!arg.beta.has_value());
  CHECK(arg.merger_mass() == 0.0);

  const XiMeasure psi = preset(PresetKind::psi_model(0.6, 1.3, 2.0));
  CHECK(psi.kingman_mass == 2.0);
  REQUIRE(psi.atoms.size() == 1);
  CHECK(psi.atoms[0].weight == doctest::Approx(0.18).epsilon(1e-12));
  REQUIRE(psi.atoms[0].paintbox.size() == 2);
  CHECK(psi.atoms[0].paintbox[0] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(psi.atoms[0].paintbox[1] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(psi.merger_mass() == doctest::Approx(0.18).epsilon(1e-12));

  // A zero skew fraction degenerates to the pure pairwise measure.
  const XiMeasure plain = preset(PresetKind::psi_model(0.0, 1.3, 2.0));
  CHECK(plain.atoms.empty());
  CHECK(plain.kingman_mass == 2.0);

  const XiMeasure beta = preset(PresetKind::beta_model(0.5, 1.6, 0.0));
  CHECK(beta.kingman_mass == 2.0);
  CHECK(beta.atoms.empty());
  REQUIRE(beta.beta.has_value());
  CHECK(beta.beta->r == 0.5);
  CHECK(beta.beta->rate == 1.6);
  CHECK(beta.merger_mass() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(!preset(PresetKind::beta_model(0.5, 0.0, 0.0)).beta.has_value());
}

TEST_CASE("mixture preset splits mass between sweeps and background") {
  const XiMeasure one = preset(PresetKind::sw_mixture({{0.5, 2, 1.0}}, 0.0));
  CHECK(one.kingman_mass == doctest::Approx(1.75).epsilon(1e-12));
  REQUIRE(one.atoms.size() == 1);
  CHECK(one.atoms[0].weight == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(one.atoms[0].paintbox == std::vector<double>{0.25, 0.25});

  const XiMeasure two = preset(PresetKind::sw_mixture({{0.5, 2, 1.0}, {0.9, 3, 0.5}}, 0.0));
  CHECK(two.kingman_mass == doctest::Approx(1.48).epsilon(1e-12));
  REQUIRE(two.atoms.size() == 2);
  CHECK(two.atoms[1].weight == doctest::Approx(0.27).epsilon(1e-12));
  CHECK(two.atoms[1].paintbox == std::vector<double>(3, 0.3));

  // Zero-weight rows vanish; overweight mixtures are rejected.
  CHECK(preset(PresetKind::sw_mixture({{0.5, 2, 0.0}}, 0.0)).atoms.empty());
  CHECK_THROWS_AS(preset(PresetKind::sw_mixture({{1.0, 1, 1.1}}, 0.0)), std::invalid_argument);
  CHECK_THROWS_AS(preset(PresetKind::sw_mixture({{1.5, 2, 0.5}}, 0.0)), std::invalid_argument);
  CHECK_THROWS_AS(preset(PresetKind::sw_mixture({{0.5, 0, 0.5}}, 0.0)), std::invalid_argument);

  // Any valid mixture keeps the exchangeable pair rate pinned at 2.
  CHECK(xi_rate(2, {2}, 0, one) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(xi_rate(2, {2}, 0, two) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("mixed preset sums components") {
  const XiMeasure psi = preset(PresetKind::psi_model(0.6, 0.0, 0.0));
  const XiMeasure beta = preset(PresetKind::beta_model(0.25, 2.0, 0.0));
  const XiMeasure mixed = preset(PresetKind::mixed({{psi, 0.5}, {beta, 0.25}}, 0.0));
  CHECK(mixed.kingman_mass == doctest::Approx(1.5).epsilon(1e-12));
  REQUIRE(mixed.atoms.size() == 1);
  CHECK(mixed.atoms[0].weight == doctest::Approx(0.09).epsilon(1e-12));
  REQUIRE(mixed.beta.has_value());
  CHECK(mixed.beta->r == 0.25);
  CHECK(mixed.beta->rate == doctest::Approx(0.5).epsilon(1e-12));

  // Matching beta parameters pool their rates, mismatched ones cannot.
  const XiMeasure again = preset(PresetKind::mixed({{beta, 1.0}, {beta, 0.5}}, 0.0));
  CHECK(again.beta->rate == doctest::Approx(3.0).epsilon(1e-12));
  const XiMeasure other = preset(PresetKind::beta_model(0.5, 1.0, 0.0));
  CHECK_THROWS_AS(preset(PresetKind::mixed({{beta, 1.0}, {other, 1.0}}, 0.0)),
                  std::invalid_argument);

  // Zero-scale parts drop out entirely.
  const XiMeasure solo = preset(PresetKind::mixed({{psi, 1.0}, {beta, 0.0}}, 0.0));
  CHECK(!solo.beta.has_value());
  CHECK(solo.atoms.size() == 1);
}

TEST_CASE("measure validation rejects malformed input") {
  XiMeasure bad;
  bad.kingman_mass = -1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.kingman_mass = 2.0;
  CHECK_NOTHROW(bad.validate());

  bad.atoms = {{0.0, {0.5}}};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.atoms = {{1.0, {}}};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.atoms = {{1.0, {0.2, 0.3}}};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.atoms = {{1.0, {0.8, 0.4}}};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.atoms = {{1.0, {0.0}}};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.atoms = {{1.0, {0.6, 0.4}}};
  CHECK_NOTHROW(bad.validate());

  bad.beta = BetaComponent{1.5, 1.0};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.beta = BetaComponent{0.5, -1.0};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.beta = BetaComponent{0.5, 1.0};
  CHECK_NOTHROW(bad.validate());

  CHECK_THROWS_AS(preset(PresetKind::psi_model(1.2, 0.0, 0.0)), std::invalid_argument);
  CHECK_THROWS_AS(preset(PresetKind::psi_model(0.5, -1.0, 0.0)), std::invalid_argument);
  CHECK_THROWS_AS(preset(PresetKind::beta_model(-0.1, 1.0, 0.0)), std::invalid_argument);
  CHECK_THROWS_AS(preset(PresetKind::arg(-1.0)), std::invalid_argument);
}

TEST_CASE("rate argument validation") {
  const XiMeasure arg = preset(PresetKind::arg(0.0));
  CHECK_THROWS_AS(xi_rate(1, {2}, -1, arg), std::invalid_argument);
  CHECK_THROWS_AS(xi_rate(4, {}, 4, arg), std::invalid_argument);
  CHECK_THROWS_AS(xi_rate(4, {1, 3}, 0, arg), std::invalid_argument);
  CHECK_THROWS_AS(xi_rate(4, {2}, 1, arg), std::invalid_argument);
  CHECK_THROWS_AS(xi_rate(4, {2, 2}, -1, arg), std::invalid_argument);
  CHECK_THROWS_AS(xi_rate(4, {2}, 3, arg), std::invalid_argument);
}

TEST_CASE("pairwise-only measure gives binary rates") {
  const XiMeasure arg = preset(PresetKind::arg(7.0));
  CHECK(xi_rate(2, {2}, 0, arg) == 2.0);
  CHECK(xi_rate(4, {2}, 2, arg) == 2.0);
  CHECK(xi_rate(5, {3}, 2, arg) == 0.0);
  CHECK(xi_rate(5, {2, 2}, 1, arg) == 0.0);
  CHECK(xi_rate(6, {2}, 4, arg) == 2.0);
}

TEST_CASE("skewed-offspring rates, frozen values") {
  const double psi = 0.6;
  const XiMeasure xi = preset(PresetKind::psi_model(psi, 0.0, 0.0));

  CHECK(xi_rate(2, {2}, 0, xi) == doctest::Approx(2.18).epsilon(1e-12));

  // Double mergers with no survivors: 2^(1-k1-k2) psi^(k1+k2).
  CHECK(xi_rate(4, {2, 2}, 0, xi) == doctest::Approx(0.0162).epsilon(1e-12));
  CHECK(xi_rate(5, {3, 2}, 0, xi) == doctest::Approx(0.00486).epsilon(1e-12));

  // Single merger with survivors: the survivors either all miss the
  // sweep or one of them lands alone in the unused half.
  for (int l = 3; l <= 7; ++l) {
    for (int k = 3; k <= l; ++k) {
      const int s = l - k;
      const double expect = 2.0 * std::pow(psi / 2.0, k) *
                            (std::pow(1.0 - psi, s) +
                             s * (psi / 2.0) * std::pow(1.0 - psi, s - 1));
      CHECK(xi_rate(l, {k}, s, xi) == doctest::Approx(expect).epsilon(1e-12));
    }
  }
  CHECK(xi_rate(6, {3}, 3, xi) == doctest::Approx(0.011232).epsilon(1e-12));
  CHECK(xi_rate(6, {2}, 4, xi) == doctest::Approx(2.018432).epsilon(1e-12));

  // Probability a sweep leaves l lineages untouched: everyone in the
  // bystander mass, or at most one lineage per half.
  for (int l = 0; l <= 8; ++l) {
    double expect = std::pow(1.0 - psi, l) + l * psi * std::pow(1.0 - psi, l - 1);
    if (l >= 2) {
      expect += l * (l - 1) / 4.0 * psi * psi * std::pow(1.0 - psi, l - 2);
    }
    CHECK(paintbox_no_merge({psi / 2.0, psi / 2.0}, l) ==
          doctest::Approx(expect).epsilon(1e-12));
  }
  CHECK(paintbox_no_merge({0.5, 0.5}, 3) == 0.0);
  CHECK(paintbox_no_merge({0.3, 0.3}, 0) == 1.0);
  CHECK_THROWS_AS(paintbox_no_merge({0.3, 0.3}, -1), std::invalid_argument);
}

TEST_CASE("beta moments through the substituted quadrature") {
  for (double r : {0.123, 0.5, 0.75, 1.0}) {
    CHECK(beta_family_mean(r, moment1, nullptr) ==
          doctest::Approx((2.0 - r) / 2.0).epsilon(1e-8));
    CHECK(beta_family_mean(r, moment2, nullptr) ==
          doctest::Approx((2.0 - r) * (3.0 - r) / 6.0).epsilon(1e-8));
    CHECK(beta_family_mean(r, moment3, nullptr) ==
          doctest::Approx((2.0 - r) * (3.0 - r) * (4.0 - r) / 24.0).epsilon(1e-8));
  }
  CHECK(beta_family_mean(0.0, moment2, nullptr) == 1.0);
  CHECK_THROWS_AS(beta_family_mean(1.5, moment2, nullptr), std::invalid_argument);
}

TEST_CASE("heavy-tail rates, frozen values") {
  const double rho = 1.6;
  const XiMeasure xi = preset(PresetKind::beta_model(0.5, rho, 0.0));

  // Moments of Beta(1.5, 0.5) give the closed forms below.
  CHECK(xi_rate(2, {2}, 0, xi) == doctest::Approx(2.0 + rho * 0.3125).epsilon(1e-8));
  CHECK(xi_rate(3, {3}, 0, xi) == doctest::Approx(rho * 0.13671875).epsilon(1e-8));
  CHECK(xi_rate(3, {2}, 1, xi) == doctest::Approx(2.0 + rho * 0.17578125).epsilon(1e-8));
  CHECK(xi_rate(4, {2, 2}, 0, xi) == doctest::Approx(rho * 0.0615234375).epsilon(1e-8));

  const XiMeasure uniform = preset(PresetKind::beta_model(1.0, 3.0, 0.0));
  CHECK(xi_rate(2, {2}, 0, uniform) == doctest::Approx(2.5).epsilon(1e-8));

  // Degenerate tail: every event is a sweep splitting lineages fifty-fifty.
  const XiMeasure point = preset(PresetKind::beta_model(0.0, 1.0, 0.0));
  CHECK(xi_rate(2, {2}, 0, point) == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(xi_rate(5, {5}, 0, point) == doctest::Approx(2.0 / 32.0).epsilon(1e-12));
  CHECK(xi_rate(5, {2}, 3, point) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("rates ignore merge-group order") {
  const XiMeasure xi = preset(PresetKind::psi_model(0.8, 0.0, 0.0));
  const double base = xi_rate(9, {3, 2, 2}, 2, xi);
  CHECK(xi_rate(9, {2, 3, 2}, 2, xi) == base);
  CHECK(xi_rate(9, {2, 2, 3}, 2, xi) == base);
}

TEST_CASE("rates are consistent under adding a lineage") {
  const std::vector<std::pair<XiMeasure, double>> measures = {
      {preset(PresetKind::arg(0.0)), 1e-12},
      {preset(PresetKind::psi_model(0.6, 0.0, 0.0)), 1e-12},
      {preset(PresetKind::sw_mixture({{0.5, 2, 1.0}, {0.9, 3, 0.5}}, 0.0)), 1e-12},
      {preset(PresetKind::beta_model(0.5, 1.6, 0.0)), 1e-7},
  };
  for (const auto& [xi, tol] : measures) {
    for (int b = 2; b <= 5; ++b) {
      for (const Shape& shape : merge_shapes(b)) {
        const double lhs = xi_rate(b, shape.groups, shape.singles, xi);
        double rhs = 0.0;
        for (std::size_t j = 0; j < shape.groups.size(); ++j) {
          std::vector<int> grown = shape.groups;
          ++grown[j];
          rhs += xi_rate(b + 1, grown, shape.singles, xi);
        }
        rhs += xi_rate(b + 1, shape.groups, shape.singles + 1, xi);
        if (shape.singles > 0) {
          std::vector<int> paired = shape.groups;
          paired.push_back(2);
          rhs += shape.singles * xi_rate(b + 1, paired, shape.singles - 1, xi);
        }
        CHECK(lhs == doctest::Approx(rhs).epsilon(tol));
      }
    }
  }
}

TEST_CASE("total exit rate matches the survival complement") {
  const std::vector<std::pair<XiMeasure, double>> measures = {
      {preset(PresetKind::arg(0.0)), 1e-10},
      {preset(PresetKind::psi_model(0.6, 0.0, 0.0)), 1e-10},
      {preset(PresetKind::sw_mixture({{0.5, 2, 1.0}, {0.9, 3, 0.5}}, 0.0)), 1e-10},
      {preset(PresetKind::beta_model(0.5, 1.6, 0.0)), 1e-6},
  };
  for (const auto& [xi, tol] : measures) {
    for (int b = 2; b <= 5; ++b) {
      double total = 0.0;
      for (const Shape& shape : merge_shapes(b)) {
        total += shape_count(b, shape) * xi_rate(b, shape.groups, shape.singles, xi);
      }
      double expect = xi.kingman_mass * b * (b - 1) / 2.0;
      for (const PaintboxAtom& atom : xi.atoms) {
        double overlap = 0.0;
        for (double x : atom.paintbox) overlap += x * x;
        expect += atom.weight / overlap * (1.0 - paintbox_no_merge(atom.paintbox, b));
      }
      if (xi.beta && xi.beta->rate > 0.0) {
        expect += xi.beta->rate * beta_family_mean(xi.beta->r, pair_survival, &b);
      }
      CHECK(total == doctest::Approx(expect).epsilon(tol));
    }
  }
}
