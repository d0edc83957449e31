#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "resite/cardinality.hpp"
#include "resite/criticality.hpp"
#include "resite/error.hpp"
#include "resite/site_catalog.hpp"

namespace resite {

enum class Scheme { prod, comp };

inline const char* to_string(Scheme s) { return s == Scheme::prod ? "prod" : "comp"; }

struct SitingSolution {
  std::vector<std::size_t> selected;          // site indices, ascending
  std::vector<std::size_t> partition_counts;  // catalog partition order
  double objective = 0.0;  // mean capacity factor (prod) or covered windows (comp)
  Scheme scheme = Scheme::comp;
  std::uint64_t rng_seed = 0;

  friend bool operator==(const SitingSolution&, const SitingSolution&) = default;
};

inline std::vector<std::size_t> count_by_partition(const SiteCatalog& catalog,
                                                   std::span<const std::size_t> selected) {
  std::vector<std::size_t> counts(catalog.partitions().size(), 0);
  for (auto l : selected) ++counts[catalog.partition_of(l)];
  return counts;
}

// True iff the selection holds exactly k_n sites per partition and every legacy site.
inline bool is_feasible(const SiteCatalog& catalog, const CardinalityPlan& plan,
                        std::span<const std::size_t> selected) {
  std::vector<bool> in(catalog.size(), false);
  for (auto l : selected) {
    if (l >= catalog.size() || in[l]) return false;
    in[l] = true;
  }
  for (std::size_t l = 0; l < catalog.size(); ++l)
    if (catalog.site(l).is_legacy && !in[l]) return false;
  const auto counts = count_by_partition(catalog, selected);
  if (plan.partitions.size() != counts.size()) return false;
  for (std::size_t n = 0; n < counts.size(); ++n)
    if (counts[n] != plan.partitions[n].final_k) return false;
  return true;
}

inline void require_feasible(const SiteCatalog& catalog, const CardinalityPlan& plan,
                             std::span<const std::size_t> selected, const char* what) {
  if (!is_feasible(catalog, plan, selected))
    throw InvalidInput(std::string(what) +
                       " violates the cardinality or legacy constraints of the plan");
}

// ---------------------------------------------------------------------------
// Coverage

// Number of windows covered by at least c of the given sites.
inline std::size_t coverage_count(const CriticalityMatrix& d,
                                  std::span<const std::size_t> sites) {
  const std::size_t words = d.row_words();
  std::vector<std::uint64_t> mask(words, 0);
  for (auto l : sites) {
    if (l >= d.sites()) throw InvalidInput("site index " + std::to_string(l) + " not in matrix");
    mask[l / 64] |= std::uint64_t{1} << (l % 64);
  }
  std::size_t covered = 0;
  for (std::size_t w = 0; w < d.windows(); ++w) {
    const auto row = d.row(w);
    std::size_t n = 0;
    for (std::size_t i = 0; i < words; ++i) n += std::popcount(row[i] & mask[i]);
    covered += n >= d.threshold() ? 1 : 0;
  }
  return covered;
}

inline std::size_t coverage_count(const CriticalityMatrix& d, const SiteCatalog& catalog,
                                  const std::vector<std::string>& ids) {
  std::vector<std::size_t> idx;
  idx.reserve(ids.size());
  for (const auto& id : ids) idx.push_back(catalog.index_of(id));
  return coverage_count(d, idx);
}

// Swap of `removed` sites for `added` sites.
struct SwapMove {
  std::vector<std::size_t> removed;
  std::vector<std::size_t> added;

  friend bool operator==(const SwapMove&, const SwapMove&) = default;
};

// Per-window cover counts of a site set with incremental updates. Two bitsets track
// the windows sitting exactly at c - 1 and at c, which makes single-site swap deltas
// a handful of popcounts per word.
class CoverageState {
public:
  explicit CoverageState(const CriticalityMatrix& d)
      : d_(&d),
        counts_(d.windows(), 0),
        at_c_minus_1_(d.column_words(), 0),
        at_c_(d.column_words(), 0),
        member_(d.sites(), false) {
    for (std::size_t w = 0; w < d.windows(); ++w) refresh_window(w);
  }

  std::size_t covered() const { return covered_; }
  bool contains(std::size_t l) const { return member_[l]; }
  std::span<const std::uint32_t> counts() const { return counts_; }

  void add(std::size_t l) { change(l, +1); }
  void remove(std::size_t l) { change(l, -1); }

  // Coverage gain from adding one site.
  std::size_t gain_if_added(std::size_t l) const {
    const auto col = d_->column(l);
    std::size_t g = 0;
    for (std::size_t i = 0; i < col.size(); ++i) g += std::popcount(col[i] & at_c_minus_1_[i]);
    return g;
  }

  // Change in covered windows if `move` were applied.
  long delta(const SwapMove& move) const {
    if (move.removed.size() == 1 && move.added.size() == 1)
      return delta_single(move.removed.front(), move.added.front());
    return delta_general(move);
  }

  void apply(const SwapMove& move) {
    for (auto l : move.removed) remove(l);
    for (auto l : move.added) add(l);
  }

  std::vector<std::size_t> members() const {
    std::vector<std::size_t> out;
    for (std::size_t l = 0; l < member_.size(); ++l)
      if (member_[l]) out.push_back(l);
    return out;
  }

private:
  long delta_single(std::size_t out, std::size_t in) const {
    const auto a = d_->column(out);
    const auto b = d_->column(in);
    long gained = 0;
    long lost = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      gained += std::popcount(b[i] & ~a[i] & at_c_minus_1_[i]);
      lost += std::popcount(a[i] & ~b[i] & at_c_[i]);
    }
    return gained - lost;
  }

  long delta_general(const SwapMove& move) const {
    const std::size_t words = d_->column_words();
    const std::size_t c = d_->threshold();
    long total = 0;
    for (std::size_t i = 0; i < words; ++i) {
      std::uint64_t touched = 0;
      for (auto l : move.removed) touched |= d_->column(l)[i];
      for (auto l : move.added) touched |= d_->column(l)[i];
      while (touched) {
        const int bit = std::countr_zero(touched);
        touched &= touched - 1;
        const std::size_t w = i * 64 + static_cast<std::size_t>(bit);
        long n = counts_[w];
        const long before = n >= static_cast<long>(c) ? 1 : 0;
        for (auto l : move.removed) n -= (d_->column(l)[i] >> bit) & 1U;
        for (auto l : move.added) n += (d_->column(l)[i] >> bit) & 1U;
        total += (n >= static_cast<long>(c) ? 1 : 0) - before;
      }
    }
    return total;
  }

  void change(std::size_t l, int sign) {
    if (l >= member_.size()) throw InvalidInput("site index out of range");
    if ((sign > 0) == member_[l])
      throw InvalidInput(sign > 0 ? "site already selected" : "site not selected");
    member_[l] = sign > 0;
    const auto col = d_->column(l);
    for (std::size_t i = 0; i < col.size(); ++i) {
      std::uint64_t bits = col[i];
      while (bits) {
        const int b = std::countr_zero(bits);
        bits &= bits - 1;
        const std::size_t w = i * 64 + static_cast<std::size_t>(b);
        const bool was = counts_[w] >= d_->threshold();
        counts_[w] = static_cast<std::uint32_t>(static_cast<long>(counts_[w]) + sign);
        const bool now = counts_[w] >= d_->threshold();
        covered_ = covered_ + (now ? 1 : 0) - (was ? 1 : 0);
        set_levels(w);
      }
    }
  }

  void refresh_window(std::size_t w) {
    if (counts_[w] >= d_->threshold()) ++covered_;
    set_levels(w);
  }

  void set_levels(std::size_t w) {
    const std::uint64_t bit = std::uint64_t{1} << (w % 64);
    const std::size_t c = d_->threshold();
    auto put = [&](std::vector<std::uint64_t>& v, bool on) {
      if (on)
        v[w / 64] |= bit;
      else
        v[w / 64] &= ~bit;
    };
    put(at_c_minus_1_, counts_[w] + 1 == c);
    put(at_c_, counts_[w] == c);
  }

  const CriticalityMatrix* d_;
  std::vector<std::uint32_t> counts_;
  std::vector<std::uint64_t> at_c_minus_1_;
  std::vector<std::uint64_t> at_c_;
  std::vector<bool> member_;
  std::size_t covered_ = 0;
};

// ---------------------------------------------------------------------------
// PROD: maximise the mean capacity factor of the selection.

// (1/k) * sum of selected mean capacity factors. Means are summed in descending
// order so equal multisets of means give bit-identical objectives.
inline double prod_objective(const SiteCatalog& catalog, std::span<const std::size_t> selected) {
  if (selected.empty()) return 0.0;
  std::vector<double> means;
  means.reserve(selected.size());
  for (auto l : selected) means.push_back(catalog.mean_capacity_factor(l));
  std::sort(means.begin(), means.end(), std::greater<>());
  double s = 0.0;
  for (double m : means) s += m;
  return s / static_cast<double>(selected.size());
}

// Legacy sites plus the most productive remaining sites in each partition (ties to
// the lower site index). Globally optimal because the objective is separable and the
// partition constraints are block diagonal.
inline SitingSolution solve_prod(const SiteCatalog& catalog, const CardinalityPlan& plan) {
  check_plan(catalog, plan);
  SitingSolution sol;
  sol.scheme = Scheme::prod;
  for (std::size_t n = 0; n < catalog.partitions().size(); ++n) {
    const auto& members = catalog.partitions()[n].members;
    std::vector<std::size_t> free;
    for (auto l : members) {
      if (catalog.site(l).is_legacy)
        sol.selected.push_back(l);
      else
        free.push_back(l);
    }
    std::stable_sort(free.begin(), free.end(), [&](std::size_t a, std::size_t b) {
      return catalog.mean_capacity_factor(a) > catalog.mean_capacity_factor(b);
    });
    const std::size_t need = plan.partitions[n].final_k - catalog.legacy_count(n);
    sol.selected.insert(sol.selected.end(), free.begin(), free.begin() + need);
  }
  std::sort(sol.selected.begin(), sol.selected.end());
  sol.partition_counts = count_by_partition(catalog, sol.selected);
  sol.objective = prod_objective(catalog, sol.selected);
  return sol;
}

// ---------------------------------------------------------------------------
// COMP initialisation

inline SitingSolution make_comp_solution(const CriticalityMatrix& d, const SiteCatalog& catalog,
                                         std::vector<std::size_t> selected,
                                         std::uint64_t seed = 0) {
  std::sort(selected.begin(), selected.end());
  SitingSolution sol;
  sol.scheme = Scheme::comp;
  sol.rng_seed = seed;
  sol.partition_counts = count_by_partition(catalog, selected);
  sol.objective = static_cast<double>(coverage_count(d, selected));
  sol.selected = std::move(selected);
  return sol;
}

// Starts from the legacy sites and repeatedly adds the site with the largest
// coverage gain among partitions with free quota; ties go to the lower index.
inline SitingSolution greedy_init(const CriticalityMatrix& d, const SiteCatalog& catalog,
                                  const CardinalityPlan& plan) {
  check_plan(catalog, plan);
  if (d.sites() != catalog.size()) throw InvalidInput("matrix and catalog sizes differ");
  CoverageState state(d);
  std::vector<std::size_t> quota(plan.partitions.size());
  std::size_t to_add = 0;
  for (std::size_t n = 0; n < quota.size(); ++n) {
    quota[n] = plan.partitions[n].final_k - catalog.legacy_count(n);
    to_add += quota[n];
  }
  for (std::size_t l = 0; l < catalog.size(); ++l)
    if (catalog.site(l).is_legacy) state.add(l);
  for (std::size_t step = 0; step < to_add; ++step) {
    std::size_t best = catalog.size();
    std::size_t best_gain = 0;
    for (std::size_t l = 0; l < catalog.size(); ++l) {
      if (state.contains(l) || quota[catalog.partition_of(l)] == 0) continue;
      const std::size_t g = state.gain_if_added(l);
      if (best == catalog.size() || g > best_gain) {
        best = l;
        best_gain = g;
      }
    }
    state.add(best);
    --quota[catalog.partition_of(best)];
  }
  return make_comp_solution(d, catalog, state.members());
}

}  // namespace resite
