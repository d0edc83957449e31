#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "resite/error.hpp"
#include "resite/time_series.hpp"

namespace resite {

inline constexpr double kDefaultLegacyThresholdMw = 100.0;

struct Site {
  std::string id;
  double longitude = 0.0;
  double latitude = 0.0;
  std::string partition_id;
  double legacy_capacity_mw = 0.0;
  double technical_potential_mw = 1.0;
  TimeSeries capacity_factors;
  bool is_legacy = false;  // assigned by SiteCatalog from the legacy threshold
};

struct Partition {
  std::string id;
  std::vector<std::size_t> members;  // site indices, ascending
};

// Candidate locations grouped into disjoint partitions. Partitions are listed in
// order of first appearance; site order is preserved and defines site indices.
class SiteCatalog {
public:
  explicit SiteCatalog(std::vector<Site> sites,
                       double legacy_threshold_mw = kDefaultLegacyThresholdMw)
      : sites_(std::move(sites)), legacy_threshold_mw_(legacy_threshold_mw) {
    if (sites_.empty()) throw InvalidInput("site catalog is empty");
    const std::size_t T = sites_.front().capacity_factors.size();
    const double res = sites_.front().capacity_factors.resolution_hours();
    std::map<std::string, std::size_t> partition_index;
    for (std::size_t i = 0; i < sites_.size(); ++i) {
      Site& s = sites_[i];
      if (s.id.empty()) throw InvalidInput("site at row " + std::to_string(i) + " has no id");
      if (!index_.emplace(s.id, i).second) throw InvalidInput("duplicate site id '" + s.id + "'");
      if (!(s.technical_potential_mw > 0.0))
        throw InvalidInput("site '" + s.id + "' needs a positive technical potential");
      if (!(s.legacy_capacity_mw >= 0.0) || s.legacy_capacity_mw > s.technical_potential_mw)
        throw InvalidInput("site '" + s.id + "' legacy capacity must lie in [0, potential]");
      if (s.capacity_factors.size() != T || s.capacity_factors.resolution_hours() != res)
        throw InvalidInput("site '" + s.id + "' series length or resolution differs");
      for (double v : s.capacity_factors.values())
        if (v < 0.0 || v > 1.0)
          throw InvalidInput("site '" + s.id + "' capacity factors must lie in [0, 1]");
      s.is_legacy = s.legacy_capacity_mw >= legacy_threshold_mw_;
      auto [it, inserted] = partition_index.emplace(s.partition_id, partitions_.size());
      if (inserted) partitions_.push_back({s.partition_id, {}});
      partitions_[it->second].members.push_back(i);
      partition_of_.push_back(it->second);
      mean_cf_.push_back(s.capacity_factors.mean());
    }
  }

  std::size_t size() const { return sites_.size(); }
  const Site& site(std::size_t i) const { return sites_.at(i); }
  const std::vector<Site>& sites() const { return sites_; }
  const std::vector<Partition>& partitions() const { return partitions_; }
  std::size_t partition_of(std::size_t site) const { return partition_of_.at(site); }
  double mean_capacity_factor(std::size_t site) const { return mean_cf_.at(site); }
  std::size_t time_length() const { return sites_.front().capacity_factors.size(); }
  double resolution_hours() const { return sites_.front().capacity_factors.resolution_hours(); }
  double legacy_threshold_mw() const { return legacy_threshold_mw_; }

  std::optional<std::size_t> find(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t index_of(const std::string& id) const {
    auto i = find(id);
    if (!i) throw InvalidInput("unknown site id '" + id + "'");
    return *i;
  }

  std::size_t legacy_count(std::size_t partition) const {
    std::size_t n = 0;
    for (auto i : partitions_.at(partition).members) n += sites_[i].is_legacy ? 1 : 0;
    return n;
  }

  // Same sites collapsed into a single partition (the unpartitioned B = 1 setting).
  SiteCatalog merged(const std::string& partition_id = "ALL") const {
    std::vector<Site> copy = sites_;
    for (auto& s : copy) s.partition_id = partition_id;
    return SiteCatalog(std::move(copy), legacy_threshold_mw_);
  }

private:
  std::vector<Site> sites_;
  double legacy_threshold_mw_;
  std::vector<Partition> partitions_;
  std::vector<std::size_t> partition_of_;
  std::vector<double> mean_cf_;
  std::map<std::string, std::size_t> index_;
};

}  // namespace resite
