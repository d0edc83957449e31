#include <gtest/gtest.h>

#include <cmath>

#include "lp_oracle.hpp"
#include "resite/simplex.hpp"

using namespace resite;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST(Simplex, TextbookFacet) {
  CanonicalLp lp;
  lp.add_column("x1", -1);
  lp.add_column("x2", -1);
  lp.add_row("c", RowSense::le, 1);
  lp.add_coef(0, 0, 1);
  lp.add_coef(0, 1, 1);
  auto s = solve_lp(lp);
  ASSERT_EQ(s.status, LpStatus::optimal);
  EXPECT_NEAR(s.objective, -1.0, 1e-12);
  EXPECT_NEAR(s.primal[0] + s.primal[1], 1.0, 1e-12);
  EXPECT_LE(max_infeasibility(lp, s.primal), 1e-12);
}

TEST(Simplex, NonNegativeCostsStayAtZero) {
  CanonicalLp lp;
  for (int j = 0; j < 4; ++j) lp.add_column("x" + std::to_string(j), 1.0 + j);
  lp.add_row("r", RowSense::le, 10);
  for (int j = 0; j < 4; ++j) lp.add_coef(0, j, 1.0);
  auto s = solve_lp(lp);
  ASSERT_EQ(s.status, LpStatus::optimal);
  EXPECT_EQ(s.objective, 0.0);
  for (double v : s.primal) EXPECT_EQ(v, 0.0);
}

TEST(Simplex, InfeasiblePair) {
  CanonicalLp lp;
  lp.add_column("x", 0.0, -kInf, kInf);
  lp.add_row("a", RowSense::le, -1);
  lp.add_row("b", RowSense::ge, 0);
  lp.add_coef(0, 0, 1);
  lp.add_coef(1, 0, 1);
  EXPECT_EQ(solve_lp(lp).status, LpStatus::infeasible);
}

TEST(Simplex, Unbounded) {
  CanonicalLp lp;
  lp.add_column("x", -1.0);
  lp.add_column("y", 0.0);
  lp.add_row("a", RowSense::ge, 1);
  lp.add_coef(0, 0, 1);
  lp.add_coef(0, 1, -1);
  EXPECT_EQ(solve_lp(lp).status, LpStatus::unbounded);
}

TEST(Simplex, EmptyLp) {
  CanonicalLp lp;
  auto s = solve_lp(lp);
  EXPECT_EQ(s.status, LpStatus::optimal);
  EXPECT_EQ(s.objective, 0.0);
}

TEST(Simplex, RejectsIntegerColumns) {
  CanonicalLp lp;
  lp.add_column("x", 1.0, 0, 1, true);
  EXPECT_THROW(solve_lp(lp), InvalidInput);
}

TEST(Simplex, KnownVertexAndDuals) {
  // max 3x + 2y s.t. x + y <= 4, x + 3y <= 7, x <= 3  -> (3, 1), value 11
  CanonicalLp lp;
  lp.add_column("x", -3, 0, 3);
  lp.add_column("y", -2);
  lp.add_row("a", RowSense::le, 4);
  lp.add_row("b", RowSense::le, 7);
  lp.add_coef(0, 0, 1);
  lp.add_coef(0, 1, 1);
  lp.add_coef(1, 0, 1);
  lp.add_coef(1, 1, 3);
  auto s = solve_lp(lp);
  ASSERT_EQ(s.status, LpStatus::optimal);
  EXPECT_NEAR(s.primal[0], 3, 1e-12);
  EXPECT_NEAR(s.primal[1], 1, 1e-12);
  EXPECT_NEAR(s.objective, -11, 1e-12);
  EXPECT_NEAR(s.row_duals[0], -2, 1e-12);
  EXPECT_NEAR(s.row_duals[1], 0, 1e-12);
  EXPECT_NEAR(s.reduced_costs[0], -1, 1e-12);
}

TEST(Simplex, IterationLimitReported) {
  Xoshiro256 rng(3);
  auto lp = testkit::random_boxed_lp(rng, 8, 8, true, false);
  SimplexOptions o;
  o.iteration_limit = 1;
  auto s = solve_lp(lp, o);
  EXPECT_TRUE(s.status == LpStatus::iteration_limit || s.status == LpStatus::optimal);
}

TEST(Simplex, MatchesVertexEnumeration) {
  Xoshiro256 rng(808);
  int optimal = 0, infeasible = 0;
  for (int rep = 0; rep < 120; ++rep) {
    const std::size_t m = 1 + rng.below(8), n = 1 + rng.below(8);
    auto lp = testkit::random_boxed_lp(rng, m, n, rep % 4 != 0, false);
    const auto oracle = testkit::vertex_enumeration(lp);
    const auto s = solve_lp(lp);
    if (!oracle) {
      EXPECT_EQ(s.status, LpStatus::infeasible) << rep;
      ++infeasible;
      continue;
    }
    ASSERT_EQ(s.status, LpStatus::optimal) << rep;
    ++optimal;
    EXPECT_LE(rel(s.objective, *oracle), 1e-8) << rep;
    EXPECT_LE(max_infeasibility(lp, s.primal), 1e-7) << rep;
    EXPECT_LE(rel(s.dual_objective, s.objective), 1e-6) << rep;
    const auto dc = testkit::check_duals(lp, s.row_duals);
    EXPECT_LE(dc.sign_violation, 1e-7) << rep;
    EXPECT_LE(rel(dc.bound, s.objective), 1e-6) << rep;
  }
  EXPECT_GT(optimal, 60);
  EXPECT_GT(infeasible, 0);
}

TEST(Simplex, WeakDualityAlongThePath) {
  Xoshiro256 rng(41);
  for (int rep = 0; rep < 20; ++rep) {
    auto lp = testkit::random_boxed_lp(rng, 12, 15, true, false);
    bool ok = true;
    auto s = solve_lp(lp, {}, [&](std::size_t, double primal, double dual) {
      if (dual > primal + 1e-6 * std::max(1.0, std::abs(primal))) ok = false;
    });
    ASSERT_EQ(s.status, LpStatus::optimal);
    EXPECT_TRUE(ok) << rep;
  }
}

TEST(Simplex, RowScalingKeepsUniqueOptimum) {
  CanonicalLp lp;
  lp.add_column("x", -3, 0, 3);
  lp.add_column("y", -2);
  lp.add_row("a", RowSense::le, 4);
  lp.add_row("b", RowSense::le, 7);
  lp.add_coef(0, 0, 1);
  lp.add_coef(0, 1, 1);
  lp.add_coef(1, 0, 1);
  lp.add_coef(1, 1, 3);
  auto base = solve_lp(lp);
  for (double f : {0.001, 7.0, 1e4}) {
    CanonicalLp sc = lp;
    for (auto& t : sc.triplets)
      if (t.row == 0) t.value *= f;
    sc.rhs[0] *= f;
    auto s = solve_lp(sc);
    ASSERT_EQ(s.status, LpStatus::optimal);
    for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(s.primal[j], base.primal[j], 1e-9);
  }
}

TEST(Simplex, LargerFeasibleFamily) {
  Xoshiro256 rng(55);
  for (int rep = 0; rep < 30; ++rep) {
    auto lp = testkit::random_boxed_lp(rng, 1 + rng.below(30), 1 + rng.below(30), true, false);
    auto s = solve_lp(lp);
    ASSERT_EQ(s.status, LpStatus::optimal);
    EXPECT_LE(max_infeasibility(lp, s.primal), 1e-7);
    EXPECT_LE(rel(s.dual_objective, s.objective), 1e-6);
  }
}

TEST(CanonicalLp, ValidateCatchesProblems) {
  CanonicalLp lp;
  lp.add_column("x", 1.0, 2.0, 1.0);
  EXPECT_THROW(lp.validate(), InvalidInput);
  CanonicalLp dup;
  dup.add_column("x", 1.0);
  dup.add_row("r", RowSense::le, 1);
  dup.add_coef(0, 0, 1);
  dup.add_coef(0, 0, 2);
  EXPECT_THROW(dup.validate(), InvalidInput);
  CanonicalLp nan;
  nan.add_column("x", NAN);
  EXPECT_THROW(nan.validate(), InvalidInput);
}
