#include <gtest/gtest.h>

#include <cmath>
#include <deque>
#include <map>
#include <set>

#include "resite/local_search.hpp"
#include "support.hpp"

using namespace resite;
using testkit::site;

namespace {

// Replays scripted draws and checks the range requested for each integer draw.
struct ScriptedRng {
  std::deque<std::pair<std::uint64_t, std::uint64_t>> ints;  // (expected n, value)
  std::deque<double> reals;
  std::uint64_t below(std::uint64_t n) {
    if (ints.empty()) throw std::runtime_error("integer script exhausted");
    auto [want, v] = ints.front();
    ints.pop_front();
    if (want != n) throw std::runtime_error("unexpected draw range " + std::to_string(n));
    return v;
  }
  double unit() {
    if (reals.empty()) throw std::runtime_error("real script exhausted");
    double v = reals.front();
    reals.pop_front();
    return v;
  }
};

SiteCatalog one_partition(std::size_t L, std::size_t legacy = 0) {
  std::vector<Site> s;
  for (std::size_t l = 0; l < L; ++l)
    s.push_back(site("s" + std::to_string(l), "Z", 1000, {0.5}, l < legacy ? 500 : 0));
  return SiteCatalog(s);
}

CardinalityPlan plan_k(const SiteCatalog& c, std::map<std::string, std::size_t> k) {
  return plan_from_counts(c, k);
}

std::size_t exhaustive_best(const CriticalityMatrix& d, std::size_t k) {
  std::size_t best = 0;
  testkit::for_each_subset(d.sites(), k, [&](const std::vector<std::size_t>& s) {
    best = std::max(best, testkit::naive_coverage(d, s));
  });
  return best;
}

}  // namespace

// Windows w0..w4; site columns s0={w0,w1} s1={w2} s2={w0,w1,w2,w3} s3={w4}; k=2, c=1.
// Start {s0,s1}: pools in=[0,1], out=[2,3]. Each neighbour draws an index into `out`
// then into `in`. With I=4 the temperatures are 100, 100e^-2.5, 100e^-5, 100e^-7.5.
//
//  i  neighbours (set, cover, delta)             best  p          u     result
//  0  {0,3} 3 0 | {1,2} 4 +1                     +1    -          -     {1,2} cover 4
//  1  {1,3} 2 -2 | {0,1} 3 -1                    -1    0.885      0.95  reject
//  2  {2,3} 5 +1 | {0,2} 4 0                     +1    -          -     {2,3} cover 5
//  3  {0,2} 4 -1 | {1,2} 4 -1                    -1    1.4e-8     0.0   {0,2} cover 4
TEST(LocalSearch, HandTraceFourSites) {
  auto cat = one_partition(4);
  auto d = CriticalityMatrix::from_dense(
      {{1, 0, 1, 0}, {1, 0, 1, 0}, {0, 1, 1, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}}, 1);
  auto plan = plan_k(cat, {{"Z", 2}});
  auto init = make_comp_solution(d, cat, {0, 1});
  ASSERT_EQ(init.objective, 3.0);

  auto script = [] {
    ScriptedRng r;
    r.ints = {{2, 1}, {2, 1}, {2, 0}, {2, 0},   // i=0
              {2, 1}, {2, 0}, {2, 0}, {2, 0},   // i=1
              {2, 1}, {2, 1}, {2, 0}, {2, 1},   // i=2
              {2, 0}, {2, 1}, {2, 1}, {2, 1}};  // i=3
    r.reals = {0.95, 0.0};
    return r;
  };
  AnnealParams p;
  p.iterations = 4;
  p.neighbors = 2;
  p.return_mode = ReturnMode::final_incumbent;

  auto rng = script();
  SearchTrace trace;
  auto out = local_search(init, d, cat, plan, p, rng, &trace);
  EXPECT_TRUE(rng.ints.empty());
  EXPECT_TRUE(rng.reals.empty());
  ASSERT_EQ(trace.size(), 4u);

  const std::vector<std::vector<std::size_t>> sets{{1, 2}, {1, 2}, {2, 3}, {0, 2}};
  const std::vector<std::size_t> cover{4, 4, 5, 4};
  const std::vector<long> delta{1, -1, 1, -1};
  const std::vector<bool> accepted{true, false, true, true};
  const std::vector<double> temp{100.0, 100.0 * std::exp(-2.5), 100.0 * std::exp(-5.0),
                                 100.0 * std::exp(-7.5)};
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(trace[i].incumbent, sets[i]) << i;
    EXPECT_EQ(trace[i].incumbent_coverage, cover[i]) << i;
    EXPECT_EQ(trace[i].best_delta, delta[i]) << i;
    EXPECT_EQ(trace[i].accepted, accepted[i]) << i;
    EXPECT_NEAR(trace[i].temperature, temp[i], 1e-12 * temp[i]) << i;
  }
  EXPECT_NEAR(trace[1].accept_probability, std::exp(-1.0 / temp[1]), 1e-15);
  EXPECT_NEAR(trace[3].accept_probability, std::exp(-1.0 / temp[3]), 1e-20);
  EXPECT_EQ(out.selected, (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(out.objective, 4.0);

  p.return_mode = ReturnMode::best_visited;
  auto rng2 = script();
  auto best = local_search(init, d, cat, plan, p, rng2);
  EXPECT_EQ(best.selected, (std::vector<std::size_t>{2, 3}));
  EXPECT_EQ(best.objective, 5.0);
}

TEST(LocalSearch, ZeroDeltaIsAlwaysAccepted) {
  auto cat = one_partition(3);
  std::vector<std::vector<std::uint8_t>> ones(6, std::vector<std::uint8_t>(3, 1));
  auto d = CriticalityMatrix::from_dense(ones, 1);
  auto init = make_comp_solution(d, cat, {0});
  ScriptedRng r;
  for (int i = 0; i < 50; ++i) {
    r.ints.push_back({2, 0});
    r.ints.push_back({1, 0});
    r.reals.push_back(0.9999999999);
  }
  AnnealParams p;
  p.iterations = 50;
  p.neighbors = 1;
  SearchTrace trace;
  local_search(init, d, cat, plan_k(cat, {{"Z", 1}}), p, r, &trace);
  for (const auto& s : trace) {
    EXPECT_EQ(s.best_delta, 0);
    EXPECT_TRUE(s.accepted);
  }
}

TEST(LocalSearch, ZeroIterationsReturnsInit) {
  Xoshiro256 rng(1);
  auto cat = one_partition(6);
  auto d = testkit::random_matrix(rng, 30, 6, 1, 0.3);
  auto init = make_comp_solution(d, cat, {1, 4});
  AnnealParams p;
  p.iterations = 0;
  auto out = local_search(init, d, cat, plan_k(cat, {{"Z", 2}}), p, rng);
  EXPECT_EQ(out.selected, init.selected);
  EXPECT_EQ(out.objective, init.objective);
}

TEST(LocalSearch, RejectsInfeasibleInitAndBadParams) {
  Xoshiro256 rng(1);
  auto cat = one_partition(6, 1);
  auto d = testkit::random_matrix(rng, 30, 6, 1, 0.3);
  auto plan = plan_k(cat, {{"Z", 3}});
  EXPECT_THROW(local_search(make_comp_solution(d, cat, {1, 2, 3}), d, cat, plan, {}, rng),
               InvalidInput);
  AnnealParams p;
  p.radius = 3;
  EXPECT_THROW(local_search(make_comp_solution(d, cat, {0, 2, 3}), d, cat, plan, p, rng),
               InvalidInput);
}

TEST(SampleNeighbor, KeepsCountsAndLegacy) {
  Xoshiro256 rng(4);
  for (int rep = 0; rep < 200; ++rep) {
    auto cat = testkit::random_catalog(rng, 6 + rng.below(20), 1 + rng.below(3), 2, 0.2);
    std::vector<std::size_t> sel;
    for (std::size_t l = 0; l < cat.size(); ++l)
      if (cat.site(l).is_legacy || rng.below(2)) sel.push_back(l);
    SwapPools pools(cat, sel);
    std::size_t cap = 0;
    for (std::size_t n = 0; n < pools.in.size(); ++n) cap += pools.capacity(n);
    if (cap == 0) {
      EXPECT_THROW(sample_neighbor(pools, 1, rng), InvalidInput);
      continue;
    }
    const std::size_t r = 1 + rng.below(cap);
    auto mv = sample_neighbor(pools, r, rng);
    ASSERT_EQ(mv.added.size(), r);
    ASSERT_EQ(mv.removed.size(), r);
    std::set<std::size_t> cur(sel.begin(), sel.end());
    for (std::size_t j = 0; j < r; ++j) {
      EXPECT_EQ(cat.partition_of(mv.added[j]), cat.partition_of(mv.removed[j]));
      EXPECT_FALSE(cat.site(mv.removed[j]).is_legacy);
      EXPECT_TRUE(cur.erase(mv.removed[j]));
      EXPECT_TRUE(cur.insert(mv.added[j]).second);
    }
    EXPECT_EQ(count_by_partition(cat, std::vector<std::size_t>(cur.begin(), cur.end())),
              count_by_partition(cat, sel));
  }
}

TEST(SampleNeighbor, AllocationUniformOverCompositions) {
  // two partitions of 4 sites with 2 selected each; radius 2 splits as (2,0),(1,1),(0,2)
  std::vector<Site> s;
  for (int l = 0; l < 8; ++l) s.push_back(site("s" + std::to_string(l), l < 4 ? "A" : "B", 1, {0.1}));
  SiteCatalog cat(s);
  SwapPools pools(cat, std::vector<std::size_t>{0, 1, 4, 5});
  Xoshiro256 rng(99);
  std::map<std::size_t, int> hist;
  const int n = 30000;
  for (int i = 0; i < n; ++i) {
    auto mv = sample_neighbor(pools, 2, rng);
    std::size_t in_a = 0;
    for (auto l : mv.added) in_a += l < 4;
    ++hist[in_a];
  }
  for (std::size_t a = 0; a <= 2; ++a) EXPECT_NEAR(hist[a] / double(n), 1.0 / 3.0, 0.015) << a;
}

TEST(SampleNeighbor, FullPartitionGetsNoSwaps) {
  std::vector<Site> s;
  for (int l = 0; l < 6; ++l) s.push_back(site("s" + std::to_string(l), l < 3 ? "A" : "B", 1, {0.1}));
  SiteCatalog cat(s);
  SwapPools pools(cat, std::vector<std::size_t>{0, 1, 2, 3});
  Xoshiro256 rng(5), again(5);
  for (int i = 0; i < 500; ++i) {
    auto mv = sample_neighbor(pools, 1, rng);
    EXPECT_GE(mv.added[0], 3u);
    EXPECT_EQ(mv, sample_neighbor(pools, 1, again));
  }
}

TEST(Multistart, FindsExhaustiveOptimum) {
  Xoshiro256 gen(2021);
  auto cat = one_partition(10);
  auto d = testkit::random_matrix(gen, 200, 10, 1, 0.12);
  auto plan = plan_k(cat, {{"Z", 3}});
  const std::size_t opt = exhaustive_best(d, 3);
  const double greedy = greedy_init(d, cat, plan).objective;
  AnnealParams p;
  p.iterations = 200;
  p.neighbors = 100;
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto s = run_multistart(d, cat, plan, p, 5, seed * 1000);
    EXPECT_GE(s.objective, greedy);
    EXPECT_TRUE(is_feasible(cat, plan, s.selected));
    hits += s.objective == static_cast<double>(opt);
  }
  EXPECT_GE(hits, 45);
}

TEST(Multistart, BestVisitedNeverWorseThanInit) {
  Xoshiro256 gen(8);
  for (int rep = 0; rep < 30; ++rep) {
    auto cat = testkit::random_catalog(gen, 8 + gen.below(20), 1 + gen.below(3), 2, 0.1);
    std::map<std::string, std::size_t> k;
    for (std::size_t n = 0; n < cat.partitions().size(); ++n)
      k[cat.partitions()[n].id] = std::max<std::size_t>(
          cat.legacy_count(n), std::min<std::size_t>(2, cat.partitions()[n].members.size()));
    auto plan = plan_from_counts(cat, k);
    auto d = testkit::random_matrix(gen, 150, cat.size(), 1 + gen.below(plan.total()), 0.3);
    auto init = greedy_init(d, cat, plan);
    AnnealParams p;
    p.iterations = 50;
    p.neighbors = 5;
    Xoshiro256 rng(rep);
    try {
      auto s = local_search(init, d, cat, plan, p, rng);
      EXPECT_GE(s.objective, init.objective);
      EXPECT_TRUE(is_feasible(cat, plan, s.selected));
      EXPECT_EQ(s.objective, static_cast<double>(testkit::naive_coverage(d, s.selected)));
    } catch (const InvalidInput&) {
      // radius 1 exceeds k - legacy only when nothing is swappable
      EXPECT_EQ(plan.total(), plan.legacy_total());
    }
  }
}

TEST(Multistart, ThreadCountDoesNotChangeResult) {
  Xoshiro256 gen(31);
  auto cat = testkit::random_catalog(gen, 40, 3, 2, 0.1);
  std::map<std::string, std::size_t> k;
  for (std::size_t n = 0; n < 3; ++n) k[cat.partitions()[n].id] = cat.legacy_count(n) + 3;
  auto plan = plan_from_counts(cat, k);
  auto d = testkit::random_matrix(gen, 500, 40, 4, 0.25);
  AnnealParams p;
  p.iterations = 100;
  p.neighbors = 20;
  auto a = run_multistart(d, cat, plan, p, 7, 42, 1);
  auto b = run_multistart(d, cat, plan, p, 7, 42, 4);
  auto c = run_multistart(d, cat, plan, p, 7, 42, 16);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
}

TEST(Multistart, SingleRunEqualsLocalSearch) {
  Xoshiro256 gen(6);
  auto cat = one_partition(12);
  auto d = testkit::random_matrix(gen, 100, 12, 2, 0.3);
  auto plan = plan_k(cat, {{"Z", 4}});
  AnnealParams p;
  p.iterations = 60;
  p.neighbors = 10;
  auto m = run_multistart(d, cat, plan, p, 1, 17);
  Xoshiro256 rng(17);
  auto s = local_search(greedy_init(d, cat, plan), d, cat, plan, p, rng);
  s.rng_seed = 17;
  EXPECT_EQ(m, s);
}

TEST(Multistart, TiesGoToLowestSeed) {
  // every set covers everything, so all runs tie
  auto cat = one_partition(5);
  std::vector<std::vector<std::uint8_t>> ones(10, std::vector<std::uint8_t>(5, 1));
  auto d = CriticalityMatrix::from_dense(ones, 1);
  AnnealParams p;
  p.iterations = 10;
  p.neighbors = 3;
  auto s = run_multistart(d, cat, plan_k(cat, {{"Z", 2}}), p, 6, 100, 3);
  EXPECT_EQ(s.rng_seed, 100u);
  EXPECT_THROW(run_multistart(d, cat, plan_k(cat, {{"Z", 2}}), p, 0, 1), InvalidInput);
}

TEST(AnnealParams, Schedule) {
  AnnealParams p;
  EXPECT_EQ(p.iterations, 5000u);
  EXPECT_EQ(p.neighbors, 500u);
  EXPECT_EQ(p.radius, 1u);
  EXPECT_DOUBLE_EQ(p.temperature(0), 100.0);
  EXPECT_NEAR(p.temperature(2500), 100.0 * std::exp(-5.0), 1e-12);
}
