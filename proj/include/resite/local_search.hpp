#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <optional>
#include <thread>
#include <vector>

#include "resite/rng.hpp"
#include "resite/siting.hpp"

namespace resite {

enum class ReturnMode { final_incumbent, best_visited };

struct AnnealParams {
  std::size_t iterations = 5000;  // I
  std::size_t neighbors = 500;    // N, neighbours drawn per iteration
  std::size_t radius = 1;         // r, sites swapped per neighbour
  double initial_temperature = 100.0;
  double decay = 10.0;
  ReturnMode return_mode = ReturnMode::best_visited;

  // T(i) = T0 * exp(-decay * i / I)
  double temperature(std::size_t i) const {
    if (iterations == 0) return initial_temperature;
    return initial_temperature *
           std::exp(-decay * static_cast<double>(i) / static_cast<double>(iterations));
  }
};

// Non-legacy selected (`in`) and unselected (`out`) sites of each partition. A swap
// writes the incoming site into the slot of the outgoing one and vice versa, so pool
// order only changes where a swap happened.
struct SwapPools {
  std::vector<std::vector<std::size_t>> in;
  std::vector<std::vector<std::size_t>> out;

  SwapPools(const SiteCatalog& catalog, std::span<const std::size_t> selected) {
    const std::size_t B = catalog.partitions().size();
    in.resize(B);
    out.resize(B);
    std::vector<bool> chosen(catalog.size(), false);
    for (auto l : selected) chosen[l] = true;
    for (std::size_t n = 0; n < B; ++n)
      for (auto l : catalog.partitions()[n].members) {
        if (catalog.site(l).is_legacy) continue;
        (chosen[l] ? in[n] : out[n]).push_back(l);
      }
  }

  std::size_t capacity(std::size_t n) const { return std::min(in[n].size(), out[n].size()); }

  void apply(const SiteCatalog& catalog, const SwapMove& move) {
    for (std::size_t j = 0; j < move.removed.size(); ++j) {
      const std::size_t gone = move.removed[j];
      const std::size_t came = move.added[j];
      const std::size_t n = catalog.partition_of(gone);
      auto pos_in = std::find(in[n].begin(), in[n].end(), gone);
      auto pos_out = std::find(out[n].begin(), out[n].end(), came);
      *pos_in = came;
      *pos_out = gone;
    }
  }
};

namespace detail {

// Draws `count` distinct elements of `pool` uniformly (partial Fisher-Yates).
template <SearchRng Rng>
void sample_distinct(const std::vector<std::size_t>& pool, std::size_t count, Rng& rng,
                     std::vector<std::size_t>& sink) {
  if (count == 1) {
    sink.push_back(pool[rng.below(pool.size())]);
    return;
  }
  std::vector<std::size_t> tmp = pool;
  for (std::size_t j = 0; j < count; ++j) {
    const std::size_t pick = j + static_cast<std::size_t>(rng.below(tmp.size() - j));
    std::swap(tmp[j], tmp[pick]);
    sink.push_back(tmp[j]);
  }
}

inline std::uint64_t sat_add(std::uint64_t a, std::uint64_t b, bool& saturated) {
  if (a > std::numeric_limits<std::uint64_t>::max() - b) {
    saturated = true;
    return std::numeric_limits<std::uint64_t>::max();
  }
  return a + b;
}

}  // namespace detail

// Random neighbour sharing all but `radius` sites with the incumbent.
//
// The per-partition swap counts s(n) are drawn uniformly over all integer vectors
// with sum(s) = radius and 0 <= s(n) <= min(|in_n|, |out_n|). For each partition with
// s(n) > 0, in partition order, s(n) incoming sites are drawn from `out` and then
// s(n) outgoing sites from `in`; added[j] replaces removed[j].
template <SearchRng Rng>
SwapMove sample_neighbor(const SwapPools& pools, std::size_t radius, Rng& rng) {
  const std::size_t B = pools.in.size();
  // ways[n][j]: allocations of j swaps over partitions n..B-1
  std::vector<std::vector<std::uint64_t>> ways(B + 1, std::vector<std::uint64_t>(radius + 1, 0));
  std::vector<std::vector<double>> ways_f(B + 1, std::vector<double>(radius + 1, 0.0));
  ways[B][0] = 1;
  ways_f[B][0] = 1.0;
  bool saturated = false;
  for (std::size_t n = B; n-- > 0;) {
    const std::size_t cap = pools.capacity(n);
    for (std::size_t j = 0; j <= radius; ++j)
      for (std::size_t s = 0; s <= std::min(cap, j); ++s) {
        ways[n][j] = detail::sat_add(ways[n][j], ways[n + 1][j - s], saturated);
        ways_f[n][j] += ways_f[n + 1][j - s];
      }
  }
  if (ways[0][radius] == 0)
    throw InvalidInput("no feasible swap of radius " + std::to_string(radius));

  std::vector<std::size_t> alloc(B, 0);
  if (!saturated) {
    std::uint64_t idx = ways[0][radius] > 1 ? rng.below(ways[0][radius]) : 0;
    std::size_t rem = radius;
    for (std::size_t n = 0; n < B; ++n) {
      for (std::size_t s = 0; s <= std::min(pools.capacity(n), rem); ++s) {
        const std::uint64_t w = ways[n + 1][rem - s];
        if (idx < w) {
          alloc[n] = s;
          break;
        }
        idx -= w;
      }
      rem -= alloc[n];
    }
  } else {
    double u = rng.unit() * ways_f[0][radius];
    std::size_t rem = radius;
    for (std::size_t n = 0; n < B; ++n) {
      const std::size_t top = std::min(pools.capacity(n), rem);
      std::size_t chosen = top;
      for (std::size_t s = 0; s <= top; ++s) {
        const double w = ways_f[n + 1][rem - s];
        if (w > 0.0 && (u < w || s == top)) {
          chosen = s;
          break;
        }
        u -= w;
      }
      // keep the remainder reachable by the later partitions
      while (ways_f[n + 1][rem - chosen] == 0.0) --chosen;
      alloc[n] = chosen;
      rem -= chosen;
    }
  }

  SwapMove move;
  for (std::size_t n = 0; n < B; ++n) {
    if (alloc[n] == 0) continue;
    detail::sample_distinct(pools.out[n], alloc[n], rng, move.added);
    detail::sample_distinct(pools.in[n], alloc[n], rng, move.removed);
  }
  return move;
}

struct TraceStep {
  std::size_t iteration = 0;
  long best_delta = 0;
  double temperature = 0.0;
  double accept_probability = 1.0;
  bool accepted = false;
  std::size_t incumbent_coverage = 0;
  std::vector<std::size_t> incumbent;  // including legacy sites
};

using SearchTrace = std::vector<TraceStep>;

inline void validate(const AnnealParams& p, std::size_t k, std::size_t legacy) {
  if (p.neighbors < 1) throw InvalidInput("neighbours per iteration must be >= 1");
  if (!(p.initial_temperature > 0.0)) throw InvalidInput("initial temperature must be > 0");
  if (!(p.decay >= 0.0)) throw InvalidInput("temperature decay must be >= 0");
  if (p.radius < 1 || p.radius > k - legacy)
    throw InvalidInput("neighbourhood radius must lie in [1, k - |legacy|] = [1, " +
                       std::to_string(k - legacy) + "]");
}

// Simulated-annealing style local search over feasible site sets.
//
// Each iteration draws N neighbours, keeps the one with the largest coverage change
// (first drawn wins ties), moves there if the change is positive and otherwise with
// probability exp(change / T(i)). Legacy sites stay fixed throughout. In best_visited
// mode the best set ever evaluated is returned, so the result never falls below the
// starting objective; final_incumbent returns wherever the walk ended.
template <SearchRng Rng>
SitingSolution local_search(const SitingSolution& init, const CriticalityMatrix& d,
                            const SiteCatalog& catalog, const CardinalityPlan& plan,
                            const AnnealParams& params, Rng& rng, SearchTrace* trace = nullptr) {
  require_feasible(catalog, plan, init.selected, "initial solution");
  if (d.sites() != catalog.size()) throw InvalidInput("matrix and catalog sizes differ");
  if (params.iterations == 0) return make_comp_solution(d, catalog, init.selected, init.rng_seed);

  SwapPools pools(catalog, init.selected);
  std::size_t swappable = 0;
  for (std::size_t n = 0; n < pools.in.size(); ++n) swappable += pools.capacity(n);
  if (swappable == 0) return make_comp_solution(d, catalog, init.selected, init.rng_seed);
  validate(params, plan.total(), plan.legacy_total());

  CoverageState state(d);
  for (auto l : init.selected) state.add(l);
  std::size_t best_cover = state.covered();
  std::vector<std::size_t> best_set = init.selected;

  for (std::size_t i = 0; i < params.iterations; ++i) {
    long best_delta = std::numeric_limits<long>::min();
    SwapMove best_move;
    for (std::size_t j = 0; j < params.neighbors; ++j) {
      SwapMove move = sample_neighbor(pools, params.radius, rng);
      const long delta = state.delta(move);
      if (delta > best_delta) {
        best_delta = delta;
        best_move = std::move(move);
      }
    }
    const long candidate_cover = static_cast<long>(state.covered()) + best_delta;
    if (candidate_cover > static_cast<long>(best_cover)) {
      CoverageState probe = state;
      probe.apply(best_move);
      best_cover = probe.covered();
      best_set = probe.members();
    }
    const double temp = params.temperature(i);
    double p = 1.0;
    bool accept;
    if (best_delta > 0) {
      accept = true;
    } else {
      p = std::exp(static_cast<double>(best_delta) / temp);
      accept = rng.unit() < p;
    }
    if (accept) {
      state.apply(best_move);
      pools.apply(catalog, best_move);
    }
    if (trace)
      trace->push_back({i, best_delta, temp, p, accept, state.covered(), state.members()});
  }

  std::vector<std::size_t> result =
      params.return_mode == ReturnMode::best_visited ? best_set : state.members();
  return make_comp_solution(d, catalog, std::move(result), init.rng_seed);
}

// Independent local searches seeded base_seed, base_seed + 1, ...; returns the run
// with the highest coverage, ties to the lowest seed. Runs are distributed over
// `threads` workers but each run owns its generator, so the answer does not depend
// on the thread count.
inline SitingSolution run_multistart(const CriticalityMatrix& d, const SiteCatalog& catalog,
                                     const CardinalityPlan& plan, const AnnealParams& params,
                                     std::size_t n_runs, std::uint64_t base_seed,
                                     unsigned threads = 1,
                                     const std::optional<SitingSolution>& init = std::nullopt) {
  if (n_runs < 1) throw InvalidInput("multistart needs at least one run");
  const SitingSolution start = init ? *init : greedy_init(d, catalog, plan);
  std::vector<std::optional<SitingSolution>> results(n_runs);
  std::vector<std::exception_ptr> errors(n_runs);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n_runs; i = next++) {
      try {
        Xoshiro256 rng(base_seed + i);
        SitingSolution s = local_search(start, d, catalog, plan, params, rng);
        s.rng_seed = base_seed + i;
        results[i] = std::move(s);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t nthreads = std::clamp<std::size_t>(threads, 1, n_runs);
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::size_t best = 0;
  for (std::size_t i = 1; i < n_runs; ++i)
    if (results[i]->objective > results[best]->objective) best = i;
  return *results[best];
}

}  // namespace resite
