#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include "json.hpp"
#include "resite/cardinality.hpp"
#include "resite/error.hpp"
#include "resite/residual.hpp"
#include "resite/site_catalog.hpp"
#include "resite/siting.hpp"

namespace resite {

using Json = nlohmann::json;

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write '" + path.string() + "'");
  f << text;
  if (!f) throw IoError("failed writing '" + path.string() + "'");
}

inline Json read_json(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path.string() + "'");
  try {
    return Json::parse(f);
  } catch (const Json::parse_error& e) {
    throw InvalidInput("malformed JSON in '" + path.string() + "': " + e.what());
  }
}

inline Json to_json(const SitingSolution& s, const SiteCatalog& catalog) {
  Json j;
  j["scheme"] = to_string(s.scheme);
  j["seed"] = s.rng_seed;
  j["objective"] = s.objective;
  Json counts = Json::object();
  for (std::size_t n = 0; n < catalog.partitions().size(); ++n)
    counts[catalog.partitions()[n].id] = s.partition_counts.at(n);
  j["partition_counts"] = counts;
  Json ids = Json::array();
  for (auto l : s.selected) ids.push_back(catalog.site(l).id);
  j["sites"] = ids;
  return j;
}

inline SitingSolution siting_from_json(const Json& j, const SiteCatalog& catalog) {
  try {
    SitingSolution s;
    const std::string scheme = j.at("scheme").get<std::string>();
    if (scheme == "prod") s.scheme = Scheme::prod;
    else if (scheme == "comp") s.scheme = Scheme::comp;
    else throw InvalidInput("unknown siting scheme '" + scheme + "'");
    s.rng_seed = j.at("seed").get<std::uint64_t>();
    s.objective = j.at("objective").get<double>();
    for (const auto& id : j.at("sites")) s.selected.push_back(catalog.index_of(id.get<std::string>()));
    std::sort(s.selected.begin(), s.selected.end());
    s.partition_counts = count_by_partition(catalog, s.selected);
    return s;
  } catch (const Json::exception& e) {
    throw InvalidInput(std::string("malformed siting solution: ") + e.what());
  }
}

inline Json plan_to_json(const CardinalityPlan& plan) {
  Json arr = Json::array();
  for (const auto& p : plan.partitions)
    arr.push_back({{"partition", p.partition_id},
                   {"target_MW", p.target_capacity_mw},
                   {"candidates", p.candidate_count},
                   {"legacy", p.legacy_count},
                   {"raw_k", p.raw_k},
                   {"k", p.final_k}});
  return arr;
}

// Point collection of the selected sites.
inline Json to_geojson(const SitingSolution& s, const SiteCatalog& catalog) {
  Json features = Json::array();
  for (auto l : s.selected) {
    const Site& site = catalog.site(l);
    features.push_back({{"type", "Feature"},
                        {"geometry",
                         {{"type", "Point"}, {"coordinates", {site.longitude, site.latitude}}}},
                        {"properties",
                         {{"id", site.id},
                          {"partition", site.partition_id},
                          {"legacy", site.is_legacy},
                          {"mean_cf", catalog.mean_capacity_factor(l)}}}});
  }
  return {{"type", "FeatureCollection"}, {"features", features}};
}

struct ResidualStats {
  Quartiles level;
  Quartiles spread_12h;
  Quartiles spread_daily;
};

inline ResidualStats residual_stats(const TimeSeries& residual) {
  const double res = residual.resolution_hours();
  ResidualStats s;
  s.level = quartiles(residual.values());
  auto spreads = [&](double hours) {
    const auto b = block_spreads(residual.values(), periods_per(hours, res));
    if (b.empty()) return Quartiles{};
    return quartiles(b);
  };
  s.spread_12h = spreads(12.0);
  s.spread_daily = spreads(24.0);
  return s;
}

}  // namespace resite
