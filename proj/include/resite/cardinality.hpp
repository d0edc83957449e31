#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "resite/error.hpp"
#include "resite/site_catalog.hpp"
#include "resite/time_series.hpp"

namespace resite {

// Converts a capacity target into a site count.
struct DensityParams {
  double power_density_mw_per_km2 = 6.0;
  double site_area_km2 = 442.5;
  double utilization = 0.5;

  double capacity_per_site_mw() const {
    return power_density_mw_per_km2 * site_area_km2 * utilization;
  }
};

struct PartitionPlan {
  std::string partition_id;
  double target_capacity_mw = 0.0;
  std::size_t candidate_count = 0;
  std::size_t legacy_count = 0;
  std::size_t raw_k = 0;
  std::size_t final_k = 0;
};

// Per-partition cardinalities, in the catalog's partition order.
struct CardinalityPlan {
  std::vector<PartitionPlan> partitions;

  std::size_t total() const {
    std::size_t k = 0;
    for (const auto& p : partitions) k += p.final_k;
    return k;
  }
  std::size_t total_raw() const {
    std::size_t k = 0;
    for (const auto& p : partitions) k += p.raw_k;
    return k;
  }
  std::size_t legacy_total() const {
    std::size_t k = 0;
    for (const auto& p : partitions) k += p.legacy_count;
    return k;
  }
};

// raw k = ceil(target / (density * area * utilization))
inline std::size_t compute_cardinality(double target_mw, const DensityParams& d = {}) {
  if (!(target_mw > 0.0)) throw InvalidInput("capacity target must be positive");
  if (!(d.power_density_mw_per_km2 > 0.0) || !(d.site_area_km2 > 0.0) || !(d.utilization > 0.0))
    throw InvalidInput("density parameters must be positive");
  return static_cast<std::size_t>(ceil_tolerant(target_mw / d.capacity_per_site_mw()));
}

inline std::vector<std::size_t> compute_cardinalities(const std::vector<double>& targets_mw,
                                                      const DensityParams& d = {}) {
  std::vector<std::size_t> out;
  out.reserve(targets_mw.size());
  for (double t : targets_mw) out.push_back(compute_cardinality(t, d));
  return out;
}

// k = min(candidates, max(legacy, raw))
inline std::size_t adjust_cardinality(std::size_t raw, std::size_t candidates,
                                      std::size_t legacy) {
  if (legacy > candidates)
    throw InvalidInput("partition has more legacy sites (" + std::to_string(legacy) +
                       ") than candidates (" + std::to_string(candidates) + ")");
  return std::min(candidates, std::max(legacy, raw));
}

// Plan from capacity targets keyed by partition id. Every catalog partition needs a
// target.
inline CardinalityPlan plan_from_targets(const SiteCatalog& catalog,
                                         const std::map<std::string, double>& targets_mw,
                                         const DensityParams& d = {}) {
  CardinalityPlan plan;
  for (std::size_t n = 0; n < catalog.partitions().size(); ++n) {
    const auto& part = catalog.partitions()[n];
    auto it = targets_mw.find(part.id);
    if (it == targets_mw.end())
      throw InvalidInput("no capacity target for partition '" + part.id + "'");
    PartitionPlan p;
    p.partition_id = part.id;
    p.target_capacity_mw = it->second;
    p.candidate_count = part.members.size();
    p.legacy_count = catalog.legacy_count(n);
    p.raw_k = compute_cardinality(it->second, d);
    p.final_k = adjust_cardinality(p.raw_k, p.candidate_count, p.legacy_count);
    plan.partitions.push_back(p);
  }
  return plan;
}

// Plan from explicit per-partition counts. Counts must satisfy
// legacy <= k <= candidates; no adjustment is applied.
inline CardinalityPlan plan_from_counts(const SiteCatalog& catalog,
                                        const std::map<std::string, std::size_t>& counts) {
  CardinalityPlan plan;
  for (std::size_t n = 0; n < catalog.partitions().size(); ++n) {
    const auto& part = catalog.partitions()[n];
    auto it = counts.find(part.id);
    if (it == counts.end()) throw InvalidInput("no site count for partition '" + part.id + "'");
    PartitionPlan p;
    p.partition_id = part.id;
    p.candidate_count = part.members.size();
    p.legacy_count = catalog.legacy_count(n);
    p.raw_k = it->second;
    p.final_k = it->second;
    plan.partitions.push_back(p);
  }
  return plan;
}

// Collapses a plan onto a single partition holding the summed count.
inline CardinalityPlan merge_plan(const CardinalityPlan& plan, const SiteCatalog& merged) {
  if (merged.partitions().size() != 1) throw InvalidInput("merged catalog must have one partition");
  PartitionPlan p;
  p.partition_id = merged.partitions().front().id;
  for (const auto& q : plan.partitions) p.target_capacity_mw += q.target_capacity_mw;
  p.candidate_count = merged.size();
  p.legacy_count = merged.legacy_count(0);
  p.raw_k = plan.total_raw();
  p.final_k = plan.total();
  return {{p}};
}

// Throws unless the plan lines up with the catalog and every partition satisfies
// legacy <= k <= candidates.
inline void check_plan(const SiteCatalog& catalog, const CardinalityPlan& plan) {
  if (plan.partitions.size() != catalog.partitions().size())
    throw InvalidInput("cardinality plan has " + std::to_string(plan.partitions.size()) +
                       " partitions, catalog has " +
                       std::to_string(catalog.partitions().size()));
  std::string report;
  for (std::size_t n = 0; n < plan.partitions.size(); ++n) {
    const auto& p = plan.partitions[n];
    const auto& part = catalog.partitions()[n];
    if (p.partition_id != part.id)
      throw InvalidInput("plan partition '" + p.partition_id + "' does not match catalog '" +
                         part.id + "'");
    const std::size_t legacy = catalog.legacy_count(n);
    if (p.final_k > part.members.size() || p.final_k < legacy)
      report += " " + part.id + ": k=" + std::to_string(p.final_k) +
                " candidates=" + std::to_string(part.members.size()) +
                " legacy=" + std::to_string(legacy) + ";";
  }
  if (!report.empty()) throw InvalidInput("infeasible cardinality plan:" + report);
}

}  // namespace resite
