#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "resite/error.hpp"
#include "resite/site_catalog.hpp"
#include "resite/time_series.hpp"

namespace resite {

// Demand minus the feed-in of `deploy_mw_per_site` MW at each selected site.
inline TimeSeries residual_demand(const TimeSeries& demand, const SiteCatalog& catalog,
                                  std::span<const std::size_t> selected,
                                  double deploy_mw_per_site) {
  if (demand.size() != catalog.time_length())
    throw InvalidInput("demand length differs from the catalog horizon");
  std::vector<double> r(demand.values().begin(), demand.values().end());
  for (auto l : selected) {
    const auto& cf = catalog.site(l).capacity_factors;
    for (std::size_t t = 0; t < r.size(); ++t) r[t] -= deploy_mw_per_site * cf[t];
  }
  return demand.with_values(std::move(r));
}

// max - min over consecutive disjoint blocks; a trailing partial block is dropped.
inline std::vector<double> block_spreads(std::span<const double> values, std::size_t block) {
  if (block == 0) throw InvalidInput("block length must be positive");
  std::vector<double> out;
  for (std::size_t b = 0; b + block <= values.size(); b += block) {
    const auto [lo, hi] = std::minmax_element(values.begin() + b, values.begin() + b + block);
    out.push_back(*hi - *lo);
  }
  return out;
}

// Block length in periods for a span of `hours` at the series resolution.
inline std::size_t periods_per(double hours, double resolution_hours) {
  const double n = hours / resolution_hours;
  const double r = std::round(n);
  if (r < 1.0 || std::abs(n - r) > 1e-9)
    throw InvalidInput("block of " + std::to_string(hours) +
                       " h is not a whole number of periods");
  return static_cast<std::size_t>(r);
}

struct Quartiles {
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
};

inline Quartiles quartiles(std::span<const double> values) {
  return {quantile_linear(values, 0.25), quantile_linear(values, 0.5),
          quantile_linear(values, 0.75)};
}

}  // namespace resite
