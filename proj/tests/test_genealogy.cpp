#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "doctest.h"
#include "pedcoal/genealogy.hpp"
#include "pedcoal/graph.hpp"
#include "pedcoal/model.hpp"
#include "pedcoal/oracle.hpp"

using namespace pedcoal;

namespace {

OffspringStep make_step(std::vector<std::int32_t> children,
                        std::vector<std::pair<std::int32_t, std::int32_t>> parents) {
  OffspringStep step;
  step.children = std::move(children);
  for (auto [a, b] : parents) {
    step.parent_a.push_back(std::min(a, b));
    step.parent_b.push_back(std::max(a, b));
  }
  return step;
}

Pedigree::StepView view_of(const OffspringStep& step) {
  return {step.children.data(), step.parent_a.data(), step.parent_b.data(),
          static_cast<int>(step.children.size())};
}

double rat_to_double(const Rat& r) { return r.convert_to<double>(); }

AncestralState state_of(const std::string& text, std::vector<std::int32_t> hosts) {
  return {MarkedPartition::from_text(text), std::move(hosts)};
}

}  // namespace

TEST_CASE("sample validation") {
  const SampleConfig s = SampleConfig::first_n(3);
  CHECK(s.individuals == std::vector<std::int32_t>{0, 1, 2});
  CHECK_NOTHROW(validate_sample(s, 3));
  CHECK_THROWS_AS(validate_sample(SampleConfig{{0}}, 5), std::invalid_argument);
  CHECK_THROWS_AS(validate_sample(SampleConfig{{0, 0}}, 5), std::invalid_argument);
  CHECK_THROWS_AS(validate_sample(SampleConfig{{0, 5}}, 5), std::invalid_argument);
  CHECK_THROWS_AS(validate_sample(SampleConfig{{-1, 2}}, 5), std::invalid_argument);
  CHECK_THROWS_AS(validate_sample(SampleConfig::first_n(4), 3), std::invalid_argument);
}

TEST_CASE("childless pedigree leaves everything in place") {
  const auto params = ModelParams::sw(4, 0.5, {{0, 2, 1.0}});
  Pedigree ped(params, std::vector<OffspringStep>(10));
  RandomStream rng(5);

  AncestralPath path = trace_lineages(ped, SampleConfig::first_n(3), rng);
  CHECK(path.change_count() == 1);
  CHECK(path.depth() == 10);
  CHECK_FALSE(path.absorbed());
  CHECK(path.absorption_step() == -1);
  CHECK(path.at(7) == path.at(0));
  CHECK_NOTHROW(validate_path(path));

  const AncestralPath same = time_change(path);
  CHECK(same.change_count() == 1);
  CHECK(same.depth() == 10);

  const GenealogyPath scaled = rescale(path, 0.25);
  REQUIRE(scaled.jumps.size() == 1);
  CHECK(scaled.jumps[0].time == 0.0);
  CHECK(scaled.jumps[0].partition == Partition::singletons(3));
  CHECK(scaled.horizon == 2.5);
  CHECK(scaled.truncated);

  AncestralGraph graph = discrete_ancestral_graph(ped, SampleConfig::first_n(3));
  CHECK(graph.event_count() == 0);
  CHECK(graph.live_count() == 3);

  // A model that never coalesces pairs cannot be put on the coalescent
  // time scale.
  CHECK_THROWS_AS(quenched_replicates(ped, SampleConfig::first_n(2), 2, RandomStream(1)),
                  std::invalid_argument);
}

TEST_CASE("fully selfing pedigree pairs then coalesces geometrically") {
  const auto params = ModelParams::sw(2, 1.0, {{1, 2, 1.0}});
  std::vector<OffspringStep> steps;
  steps.push_back(make_step({1}, {{0, 0}}));
  for (int i = 0; i < 59; ++i) steps.push_back(make_step({0}, {{0, 0}}));
  Pedigree ped(params, steps);

  const RandomStream root(4242);
  const long reps = 20000;
  long sum = 0;
  long first_step = 0;
  bool saw_pairing = false;
  for (long i = 0; i < reps; ++i) {
    RandomStream rng = root.child(static_cast<std::uint64_t>(i));
    const AncestralPath path = trace_lineages(ped, SampleConfig::first_n(2), rng);
    REQUIRE(path.absorbed());
    const int t = path.absorption_step();
    REQUIRE(t >= 1);
    sum += t;
    if (t == 1) ++first_step;
    if (t >= 3 && !saw_pairing) {
      saw_pairing = true;
      CHECK(path.at(1) == state_of("{1|2}[(1,2)]", {0, 0}));
      CHECK(path.at(t - 1) == state_of("{1|2}[(1,2)]", {0, 0}));
      CHECK(path.at(t) == state_of("{1,2}", {0}));
      CHECK_NOTHROW(validate_path(path));
    }
  }
  CHECK(saw_pairing);
  const double r = static_cast<double>(reps);
  // Absorption is Geometric(1/2) on {1,2,...}: mean 2, variance 2.
  CHECK(std::abs(static_cast<double>(sum) / r - 2.0) <= 4.0 * std::sqrt(2.0 / r));
  CHECK(std::abs(static_cast<double>(first_step) / r - 0.5) <= 4.0 * std::sqrt(0.25 / r));
}

TEST_CASE("one-step law of the trace matches the exact enumeration") {
  const auto check_state = [](const ModelParams& params, const AncestralState& start,
                              std::uint64_t seed) {
    const OneStepLaw law = one_step_law(OracleParams::from_model(params), start.marked);
    std::map<std::string, double> expected;
    for (const auto& [outcome, mass] : law.outcomes) {
      expected[outcome.to_text()] = rat_to_double(mass);
    }

    const long reps = 30000;
    RandomStream rng(seed);
    std::map<std::string, long> observed;
    for (long i = 0; i < reps; ++i) {
      const OffspringStep step = sample_step(params, rng);
      const AncestralState next = advance_state(start, view_of(step), rng);
      ++observed[next.marked.to_text()];
    }

    for (const auto& [text, count] : observed) {
      REQUIRE_MESSAGE(expected.count(text) == 1, "unexpected outcome ", text);
      const double p = expected[text];
      const double freq = static_cast<double>(count) / static_cast<double>(reps);
      const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(reps));
      CHECK_MESSAGE(std::abs(freq - p) <= 4.0 * se + 1e-9, "outcome ", text, " freq ", freq,
                    " expected ", p);
    }
  };

  const auto wf = ModelParams::wright_fisher(3, 0.4);
  check_state(wf, state_of("{1|2}", {0, 1}), 711);
  check_state(wf, state_of("{1|2}[(1,2)]", {2, 2}), 712);
  check_state(wf, state_of("{1|2|3}", {0, 1, 2}), 713);

  // At full selfing a cohabiting pair can only persist or merge.
  const auto selfing = ModelParams::wright_fisher(3, 1.0);
  const OneStepLaw law = one_step_law(OracleParams::from_model(selfing),
                                      MarkedPartition::from_text("{1|2}[(1,2)]"));
  RandomStream rng(714);
  for (long i = 0; i < 4000; ++i) {
    const OffspringStep step = sample_step(selfing, rng);
    const AncestralState next =
        advance_state(state_of("{1|2}[(1,2)]", {1, 1}), view_of(step), rng);
    const std::string text = next.marked.to_text();
    CHECK((text == "{1|2}[(1,2)]" || text == "{1,2}"));
    CHECK(rat_to_double(law.mass_of(next.marked)) > 0.0);
  }
}

TEST_CASE("annealed absorption matches the exact pair chain") {
  const auto params = ModelParams::wright_fisher(4, 0.3);
  const PairChain chain = pair_chain(OracleParams::from_model(params));
  const double exact_mean = rat_to_double(pair_chain_mean_absorption(chain, false));
  const std::vector<Rat> cdf = pair_chain_absorption_cdf(chain, 16);

  const RandomStream ped_root(91);
  const RandomStream walk_root(92);
  const long reps = 20000;
  const std::vector<int> marks = {1, 2, 3, 5, 8, 13};
  std::vector<long> at_most(marks.size(), 0);
  double sum = 0.0, sumsq = 0.0;
  for (long i = 0; i < reps; ++i) {
    Pedigree ped(params, ped_root.child(static_cast<std::uint64_t>(i)));
    RandomStream walk = walk_root.child(static_cast<std::uint64_t>(i));
    const AncestralPath path = trace_lineages(ped, SampleConfig::first_n(2), walk, 4000);
    REQUIRE(path.absorbed());
    const double t = path.absorption_step();
    sum += t;
    sumsq += t * t;
    for (std::size_t m = 0; m < marks.size(); ++m) {
      if (t <= marks[m]) ++at_most[m];
    }
  }
  const double r = static_cast<double>(reps);
  const double mean = sum / r;
  const double sd = std::sqrt((sumsq - r * mean * mean) / (r - 1.0));
  CHECK_MESSAGE(std::abs(mean - exact_mean) <= 3.0 * sd / std::sqrt(r), "mean ", mean,
                " exact ", exact_mean);
  for (std::size_t m = 0; m < marks.size(); ++m) {
    const double p = rat_to_double(cdf[static_cast<std::size_t>(marks[m])]);
    const double freq = static_cast<double>(at_most[m]) / r;
    const double se = std::sqrt(p * (1.0 - p) / r);
    CHECK_MESSAGE(std::abs(freq - p) <= 4.0 * se, "cdf at ", marks[m], ": ", freq, " vs ", p);
  }
}

TEST_CASE("pairwise coalescence time on big pedigrees is Kingman") {
  // Survival per step is 1 - c, so on the k*c clock absorption is
  // Exp(1) with mean 1. Without selfing a failed host merger disperses;
  // host mergers at rate 2 then produce coalescences at rate 1.
  const auto params = ModelParams::moran(100, 0.0);
  const RandomStream ped_root(300);
  const RandomStream walk_root(301);
  double sum = 0.0, sumsq = 0.0;
  long count = 0;
  for (int p = 0; p < 60; ++p) {
    Pedigree ped(params, ped_root.child(static_cast<std::uint64_t>(p)));
    const auto paths = quenched_replicates(ped, SampleConfig::first_n(2), 40,
                                           walk_root.child(static_cast<std::uint64_t>(p)));
    for (const GenealogyPath& path : paths) {
      REQUIRE_FALSE(path.truncated);
      const double t = path.absorption_time();
      sum += t;
      sumsq += t * t;
      ++count;
    }
  }
  const double r = static_cast<double>(count);
  const double mean = sum / r;
  const double sd = std::sqrt((sumsq - r * mean * mean) / (r - 1.0));
  CHECK_MESSAGE(std::abs(mean - 1.0) <= 3.0 * sd / std::sqrt(r), "mean ", mean, " sd ", sd);
}

TEST_CASE("time change collapses paired stretches") {
  const AncestralState s0 = state_of("{1|2}", {0, 1});
  const AncestralState paired = state_of("{1|2}[(1,2)]", {2, 2});
  const AncestralState dispersed = state_of("{1|2}", {0, 3});
  const AncestralState merged = state_of("{1,2}", {2});

  SUBCASE("pairing resolved by dispersal") {
    AncestralPath path(s0);
    path.push_change(3, paired);
    path.push_change(6, dispersed);
    path.extend_to(8);

    const AncestralPath tc = time_change(path);
    CHECK(tc.change_count() == 2);
    CHECK(tc.change_step(1) == 6);
    CHECK(tc.at(2) == s0);
    CHECK(tc.at(3) == s0);
    CHECK(tc.at(5) == s0);
    CHECK(tc.at(6) == dispersed);
    CHECK(tc.depth() == 8);
    CHECK_NOTHROW(validate_path(tc));

    // Unresolved pairings are invisible to the haploid observer only
    // after the time change; the raw path refines and must be refused.
    CHECK_THROWS_AS(rescale(path, 0.01), std::invalid_argument);
    const GenealogyPath scaled = rescale(tc, 0.25);
    REQUIRE(scaled.jumps.size() == 1);  // dispersal never changes the partition
    CHECK(scaled.horizon == 2.0);
    CHECK(scaled.truncated);
  }

  SUBCASE("pairing resolved by coalescence") {
    AncestralPath path(s0);
    path.push_change(3, paired);
    path.push_change(6, merged);
    path.extend_to(8);

    const AncestralPath tc = time_change(path);
    CHECK(tc.change_count() == 2);
    CHECK(tc.at(5) == s0);
    CHECK(tc.at(6) == merged);
    CHECK(tc.absorption_step() == 6);

    const GenealogyPath scaled = rescale(tc, 0.25);
    REQUIRE(scaled.jumps.size() == 2);
    CHECK(scaled.jumps[1].time == 1.5);
    CHECK(scaled.jumps[1].partition == Partition::one_block(2));
    CHECK_FALSE(scaled.truncated);
    CHECK(scaled.absorption_time() == 1.5);
  }

  SUBCASE("forced arithmetic of the jump time") {
    AncestralPath path(s0);
    path.push_change(200, state_of("{1,2}", {0}));
    const GenealogyPath scaled = rescale(time_change(path), 0.01);
    CHECK(scaled.absorption_time() == 2.0);
  }

  SUBCASE("argument checks") {
    AncestralPath path(s0);
    CHECK_THROWS_AS(rescale(path, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(rescale(path, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(rescale(path, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(path.push_change(0, s0), std::invalid_argument);
    AncestralPath empty;
    CHECK_THROWS_AS(empty.push_change(2, s0), std::invalid_argument);
    CHECK_THROWS_AS(time_change(empty), std::invalid_argument);
    CHECK_THROWS_AS(path.at(300), std::out_of_range);
    CHECK_THROWS_AS(path.at(-1), std::out_of_range);
  }
}

TEST_CASE("quenched replicates share the pedigree deterministically") {
  const auto params = ModelParams::wright_fisher(10, 0.3);

  SUBCASE("same seeds give identical lists") {
    Pedigree ped_a(params, RandomStream(7));
    Pedigree ped_b(params, RandomStream(7));
    const auto runs_a = quenched_replicates(ped_a, SampleConfig::first_n(2), 5, RandomStream(9));
    const auto runs_b = quenched_replicates(ped_b, SampleConfig::first_n(2), 5, RandomStream(9));
    REQUIRE(runs_a.size() == 5);
    CHECK(runs_a == runs_b);
    CHECK(runs_a[0] != runs_a[1]);  // distinct locus substreams
    CHECK_THROWS_AS(
        quenched_replicates(ped_a, SampleConfig::first_n(2), 0, RandomStream(1)),
        std::invalid_argument);
  }

  SUBCASE("shallow pedigrees truncate and report the horizon") {
    const auto wide = ModelParams::wright_fisher(30, 0.0);
    RandomStream build(11);
    Pedigree deep(wide, build);
    deep.ensure_depth(5);
    std::vector<OffspringStep> steps;
    for (int k = 1; k <= 5; ++k) steps.push_back(deep.step_copy(k));
    Pedigree shallow(wide, steps);

    const auto runs = quenched_replicates(shallow, SampleConfig::first_n(2), 60, RandomStream(12));
    long truncated = 0;
    for (const GenealogyPath& path : runs) {
      CHECK(path.horizon == doctest::Approx(5.0 / 60.0));
      CHECK(path.truncated == !path.absorbed());
      if (path.truncated) ++truncated;
    }
    CHECK(truncated >= 1);
    CHECK(truncated < 60);
  }
}

TEST_CASE("full selfing pins every host trajectory") {
  // One parent per individual: where a lineage sits is a function of
  // the pedigree alone, so all loci agree on every host at every step.
  // Merge order within a shared host can still differ between loci.
  const auto params = ModelParams::moran(30, 1.0);
  Pedigree ped(params, RandomStream(21));
  const RandomStream walk_root(22);
  std::vector<AncestralPath> paths;
  for (int j = 0; j < 3; ++j) {
    RandomStream walk = walk_root.child(static_cast<std::uint64_t>(j));
    paths.push_back(trace_lineages(ped, SampleConfig::first_n(3), walk, 20000));
  }
  int first_absorption = paths[0].absorption_step();
  for (const AncestralPath& path : paths) {
    REQUIRE(path.absorbed());
    first_absorption = std::min(first_absorption, path.absorption_step());
  }
  const auto host_of = [](const AncestralState& s, int element) {
    return s.hosts[s.marked.partition().block_of(element)];
  };
  for (int k = 0; k <= first_absorption; ++k) {
    for (int e = 1; e <= 3; ++e) {
      const std::int32_t h = host_of(paths[0].at(k), e);
      CHECK(host_of(paths[1].at(k), e) == h);
      CHECK(host_of(paths[2].at(k), e) == h);
    }
  }

  const auto runs = quenched_replicates(ped, SampleConfig::first_n(2), 8, RandomStream(23));
  bool any_differ = false;
  for (const GenealogyPath& path : runs) {
    REQUIRE(path.absorbed());
    CHECK(path.jumps.back().partition == Partition::one_block(2));
    if (path.absorption_time() != runs[0].absorption_time()) any_differ = true;
  }
  // The shared pedigree fixes the tree shape, not the waiting times.
  // Loci can still tie: they flip coins at the same selfing events.
  CHECK(any_differ);
}

TEST_CASE("loci are exchangeable on one pedigree") {
  const auto params = ModelParams::wright_fisher(12, 0.5);
  Pedigree ped(params, RandomStream(31));
  const auto runs = quenched_replicates(ped, SampleConfig::first_n(2), 120, RandomStream(32));
  std::vector<double> times;
  for (const GenealogyPath& path : runs) {
    REQUIRE(path.absorbed());
    times.push_back(path.absorption_time());
  }

  const auto half_gap = [&](const std::vector<double>& xs) {
    double lo = 0.0, hi = 0.0;
    const std::size_t half = xs.size() / 2;
    for (std::size_t i = 0; i < xs.size(); ++i) (i < half ? lo : hi) += xs[i];
    return std::abs(lo - hi) / static_cast<double>(half);
  };
  const double observed = half_gap(times);

  RandomStream shuffler(33);
  std::vector<double> pool = times;
  long at_least = 0;
  const int perms = 400;
  for (int p = 0; p < perms; ++p) {
    for (std::size_t i = pool.size(); i > 1; --i) {
      std::swap(pool[i - 1], pool[shuffler.next_below(i)]);
    }
    if (half_gap(pool) >= observed) ++at_least;
  }
  // Exchangeability makes the observed split statistic unremarkable.
  CHECK(static_cast<double>(at_least) / perms > 0.01);
}

TEST_CASE("trace invariants hold on rough demographies") {
  const auto params = ModelParams::sw(6, 0.4, {{2, 3, 0.5}, {3, 5, 0.5}});
  const RandomStream ped_root(41);
  const RandomStream walk_root(42);
  const SampleConfig sample{{0, 2, 3, 5}};
  for (int rep = 0; rep < 200; ++rep) {
    Pedigree ped(params, ped_root.child(static_cast<std::uint64_t>(rep)));
    RandomStream walk = walk_root.child(static_cast<std::uint64_t>(rep));
    const AncestralPath path = trace_lineages(ped, sample, walk, 3000);
    REQUIRE_NOTHROW(validate_path(path));
    const AncestralPath tc = time_change(path);
    REQUIRE_NOTHROW(validate_path(tc));
    for (int j = 0; j < tc.change_count(); ++j) {
      CHECK_FALSE(tc.change_state(j).marked.has_pairs());
    }
    // The time change only rewrites paired stretches.
    for (int j = 0; j < path.change_count(); ++j) {
      const int k = path.change_step(j);
      if (!path.change_state(j).marked.has_pairs()) CHECK(tc.at(k) == path.at(k));
    }
    REQUIRE_NOTHROW(rescale(tc, c2_closed_sw(params)));
  }
}

TEST_CASE("quiet steps draw nothing") {
  const OffspringStep step = make_step({0}, {{1, 2}});
  const AncestralState state = state_of("{1|2}", {6, 7});
  RandomStream used(77);
  const AncestralState next = advance_state(state, view_of(step), used);
  CHECK(next == state);
  RandomStream fresh(77);
  CHECK(used.next_u64() == fresh.next_u64());
}

TEST_CASE("discrete graph on a forced pedigree") {
  const auto params = ModelParams::sw(4, 0.5, {{1, 4, 1.0}});
  std::vector<OffspringStep> steps;
  steps.push_back(make_step({0}, {{1, 3}}));
  steps.push_back(make_step({1}, {{2, 2}}));
  Pedigree ped(params, steps);

  AncestralGraph graph = discrete_ancestral_graph(ped, SampleConfig{{0, 2}});
  REQUIRE(graph.event_count() == 2);
  CHECK(graph.event_kind(0) == GraphEventKind::kFragmentation);
  CHECK(graph.event_time(0) == 1.0);
  CHECK(graph.frag_node(0) == 0);
  CHECK(graph.frag_spawned(0) == 2);
  CHECK(graph.event_kind(1) == GraphEventKind::kCoalescence);
  CHECK(graph.event_time(1) == 2.0);
  REQUIRE(graph.group_count(1) == 1);
  const auto members = graph.group(1, 0);
  REQUIRE(members.size() == 2);
  CHECK(members[0] == 0);
  CHECK(members[1] == 1);
  CHECK(graph.node_count() == 3);
  CHECK(graph.live_count() == 2);
  CHECK(graph.live_nodes() == std::vector<std::int32_t>{0, 2});

  const std::string csv = graph.to_csv();
  CHECK(csv ==
        "event_index,time,kind,detail\n"
        "0,1,fragmentation,1\n"
        "1,2,coalescence,\"{1,2|3}\"\n");

  const AncestralGraph parsed = AncestralGraph::from_csv(2, graph.horizon(),
                                                         graph.frag_cutoff(), csv);
  CHECK(parsed.to_csv() == csv);
  CHECK(parsed.live_count() == 2);
  CHECK(parsed.node_count() == 3);
}

TEST_CASE("graph mutation guards") {
  CHECK_THROWS_AS(AncestralGraph(0, 10.0, 10.0), std::invalid_argument);
  CHECK_THROWS_AS(AncestralGraph(2, 0.0, 10.0), std::invalid_argument);
  CHECK_THROWS_AS(AncestralGraph(2, 10.0, -1.0), std::invalid_argument);

  AncestralGraph graph(3, 10.0, 10.0);
  CHECK_THROWS_AS(graph.add_fragmentation(1.0, 5), std::invalid_argument);
  CHECK_THROWS_AS(graph.add_coalescence(1.0, {}), std::invalid_argument);
  CHECK_THROWS_AS(graph.add_coalescence(1.0, {{1}}), std::invalid_argument);
  CHECK_THROWS_AS(graph.add_coalescence(1.0, {{0, 1}, {1, 2}}), std::invalid_argument);
  CHECK_THROWS_AS(graph.add_pair_coalescence(1.0, 2, 2), std::invalid_argument);

  graph.add_pair_coalescence(1.0, 0, 1);
  CHECK(graph.live_count() == 2);
  CHECK_FALSE(graph.is_live(1));
  CHECK_THROWS_AS(graph.add_fragmentation(2.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(graph.add_fragmentation(0.5, 0), std::invalid_argument);  // time ran backward
  const std::int32_t spawned = graph.add_fragmentation(2.0, 2);
  CHECK(spawned == 3);
  CHECK(graph.live_count() == 3);

  CHECK_THROWS_AS(AncestralGraph::from_csv(2, 5.0, 5.0, "0,1,splitting,1\n"),
                  std::invalid_argument);
  CHECK_THROWS_AS(AncestralGraph::from_csv(2, 5.0, 5.0, "0,1,fragmentation,9\n"),
                  std::invalid_argument);
  CHECK_THROWS_AS(AncestralGraph::from_csv(2, 5.0, 5.0, "0,1,coalescence,\"{1}\"\n"),
                  std::invalid_argument);
  CHECK_THROWS_AS(AncestralGraph::from_csv(2, 5.0, 5.0, "bad row\n"), std::invalid_argument);
}

TEST_CASE("discrete graph fragmentation frequency tracks the outcrossing rate") {
  // Each tracked node outcrosses with probability (1-alpha)/N per step,
  // so with alpha = 1 - lambda/N the fragmentation count compensator is
  // lambda * c * sum of live counts.
  const double lambda = 4.0;
  const int n_ind = 200;
  const auto params = ModelParams::moran(n_ind, 1.0 - lambda / n_ind);
  Pedigree ped(params, RandomStream(55));
  const int depth = 400000;
  AncestralGraph graph = discrete_ancestral_graph(ped, SampleConfig::first_n(2), depth);

  long frags = 0;
  double live_sum = 0.0;
  int live = graph.initial_nodes();
  int ev = 0;
  for (int k = 1; k <= depth; ++k) {
    live_sum += live;
    while (ev < graph.event_count() && graph.event_time(ev) == static_cast<double>(k)) {
      if (graph.event_kind(ev) == GraphEventKind::kFragmentation) {
        ++frags;
        ++live;
      } else {
        for (int g = 0; g < graph.group_count(ev); ++g) {
          live -= static_cast<int>(graph.group(ev, g).size()) - 1;
        }
      }
      ++ev;
    }
  }
  CHECK(ev == graph.event_count());
  CHECK(live == graph.live_count());

  const double c = c2_closed_sw(params);
  CHECK(c == doctest::Approx(1.0 / (static_cast<double>(n_ind) * n_ind)).epsilon(1e-12));
  const double compensator = lambda * c * live_sum;
  CHECK_MESSAGE(std::abs(static_cast<double>(frags) - compensator) <=
                    4.0 * std::sqrt(compensator) + 2.0,
                "frags ", frags, " compensator ", compensator);
}
