#include "doctest.h"
#include "pedcoal/rng.hpp"

#include <cmath>
#include <vector>

using namespace pedcoal;

TEST_CASE("streams are deterministic and child derivation is state-free") {
  RandomStream a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  // child() must not depend on how much the parent has consumed.
  RandomStream p1(9), p2(9);
  (void)p2.next_u64();
  (void)p2.next_u64();
  RandomStream c1 = p1.child(3), c2 = p2.child(3);
  for (int i = 0; i < 20; ++i) CHECK(c1.next_u64() == c2.next_u64());
}

TEST_CASE("distinct seeds and child indices give distinct output") {
  RandomStream a(1), b(2);
  CHECK(a.next_u64() != b.next_u64());
  RandomStream p(5);
  CHECK(p.child(0).next_u64() != p.child(1).next_u64());
  CHECK(p.child(0).child(1).next_u64() != p.child(1).child(0).next_u64());
}

TEST_CASE("uniform double moments") {
  RandomStream rng(123);
  const int n = 200000;
  double sum = 0, sumsq = 0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.next_double();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    sum += u;
    sumsq += u * u;
  }
  CHECK(std::abs(sum / n - 0.5) < 0.005);
  CHECK(std::abs(sumsq / n - 1.0 / 3.0) < 0.005);
}

TEST_CASE("next_below is in range and roughly uniform") {
  RandomStream rng(77);
  std::vector<int> counts(7, 0);
  const int n = 70000;
  for (int i = 0; i < n; ++i) ++counts[rng.next_below(7)];
  for (int c : counts) CHECK(std::abs(c - n / 7) < 600);
  CHECK_THROWS_AS(rng.next_below(0), std::invalid_argument);
}

TEST_CASE("exponential and gamma moments") {
  RandomStream rng(2024);
  const int n = 100000;
  double se = 0;
  for (int i = 0; i < n; ++i) se += rng.next_exponential(2.0);
  CHECK(std::abs(se / n - 0.5) < 0.01);

  double sg = 0;
  for (int i = 0; i < n; ++i) sg += rng.next_gamma(0.7);
  CHECK(std::abs(sg / n - 0.7) < 0.02);

  double sb = 0;
  for (int i = 0; i < n; ++i) sb += rng.next_beta(1.5, 0.5);
  CHECK(std::abs(sb / n - 0.75) < 0.01);  // a/(a+b)
}
