#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "resite/criticality.hpp"
#include "resite/rng.hpp"
#include "resite/site_catalog.hpp"

namespace testkit {

inline resite::Site site(const std::string& id, const std::string& part, double potential,
                         std::vector<double> cf, double legacy = 0.0) {
  return resite::Site{id, 0.0, 0.0, part, legacy, potential, resite::TimeSeries(std::move(cf))};
}

// Sites spread round-robin over `parts` partitions; legacy drawn with probability p_legacy.
// CFs are quantised to multiples of 1/8 now and then so mean ties actually happen.
inline resite::SiteCatalog random_catalog(resite::Xoshiro256& rng, std::size_t L,
                                          std::size_t parts, std::size_t T, double p_legacy) {
  std::vector<resite::Site> sites;
  for (std::size_t l = 0; l < L; ++l) {
    std::vector<double> cf(T);
    const bool coarse = rng.below(3) == 0;
    for (auto& x : cf) x = coarse ? static_cast<double>(rng.below(9)) / 8.0 : rng.unit();
    const bool legacy = rng.unit() < p_legacy;
    sites.push_back(site("s" + std::to_string(l), "P" + std::to_string(l % parts), 1000.0,
                         std::move(cf), legacy ? 200.0 : 0.0));
  }
  return resite::SiteCatalog(std::move(sites));
}

inline resite::CriticalityMatrix random_matrix(resite::Xoshiro256& rng, std::size_t W,
                                               std::size_t L, std::size_t c, double density) {
  std::vector<std::vector<std::uint8_t>> dense(W, std::vector<std::uint8_t>(L));
  for (auto& r : dense)
    for (auto& b : r) b = rng.unit() < density;
  return resite::CriticalityMatrix::from_dense(dense, c);
}

inline std::size_t naive_coverage(const resite::CriticalityMatrix& d,
                                  const std::vector<std::size_t>& sel) {
  std::size_t n = 0;
  for (std::size_t w = 0; w < d.windows(); ++w) {
    std::size_t s = 0;
    for (auto l : sel) s += d.get(w, l) ? 1 : 0;
    n += s >= d.threshold() ? 1 : 0;
  }
  return n;
}

// Calls f on every subset of {0..n-1} of size k, in lexicographic order.
inline void for_each_subset(std::size_t n, std::size_t k,
                            const std::function<void(const std::vector<std::size_t>&)>& f) {
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  if (k > n) return;
  while (true) {
    f(idx);
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace testkit
