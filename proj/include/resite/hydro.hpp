#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "resite/error.hpp"
#include "resite/time_series.hpp"

namespace resite {

inline constexpr double kWaterDensity = 1000.0;  // kg/m3
inline constexpr double kGravity = 9.81;         // m/s2
inline constexpr double kJoulesPerMWh = 3.6e9;

struct RunoffCell {
  std::string id;
  std::string country;
  double area_km2 = 1.0;
  TimeSeries runoff;  // metres of water per period
};

// Cells keyed by id; per-country sums run in ascending id order.
class RunoffGrid {
 public:
  explicit RunoffGrid(std::vector<RunoffCell> cells) : cells_(std::move(cells)) {
    if (cells_.empty()) throw InvalidInput("runoff grid has no cells");
    std::sort(cells_.begin(), cells_.end(),
              [](const RunoffCell& a, const RunoffCell& b) { return a.id < b.id; });
    const std::size_t T = cells_.front().runoff.size();
    for (std::size_t i = 0; i < cells_.size(); ++i) {
      const auto& c = cells_[i];
      if (i > 0 && cells_[i - 1].id == c.id) throw InvalidInput("duplicate cell id '" + c.id + "'");
      if (!(c.area_km2 > 0.0)) throw InvalidInput("cell '" + c.id + "' has non-positive area");
      if (c.runoff.size() != T) throw InvalidInput("cell '" + c.id + "' has a different length");
      for (double v : c.runoff.values())
        if (v < 0.0) throw InvalidInput("cell '" + c.id + "' has negative runoff");
      countries_[c.country].push_back(i);
    }
  }

  const std::vector<RunoffCell>& cells() const { return cells_; }
  std::vector<std::string> countries() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : countries_) out.push_back(k);
    return out;
  }
  const std::vector<std::size_t>& cells_of(const std::string& country) const {
    auto it = countries_.find(country);
    if (it == countries_.end()) throw InvalidInput("no runoff cells for country '" + country + "'");
    return it->second;
  }
  std::size_t time_length() const { return cells_.front().runoff.size(); }

 private:
  std::vector<RunoffCell> cells_;
  std::map<std::string, std::vector<std::size_t>> countries_;
};

struct HydroCountryParams {
  std::string country;
  double flood_threshold = 0.9;  // f_c
  double ror_capacity_mw = 0.0;
  double sto_capacity_mw = 0.0;
  double sto_energy_mwh = 0.0;
  double yearly_energy_mwh = 0.0;         // E_HYDRO
  std::optional<double> flow_multiplier;  // fm_c
  double head_m = 1.0;                    // h_c
};

// Sum of runoff over the cells of a country.
inline std::vector<double> country_runoff(const RunoffGrid& grid, const std::string& country) {
  std::vector<double> s(grid.time_length(), 0.0);
  for (auto i : grid.cells_of(country)) {
    const auto& r = grid.cells()[i].runoff;
    for (std::size_t t = 0; t < s.size(); ++t) s[t] += r[t];
  }
  return s;
}

// Normalised runoff clipped at its f_c quantile. With `renormalize` the clip level
// maps to 1.
inline std::vector<double> clip_normalized(std::span<const double> normalized, double threshold,
                                           bool renormalize = true) {
  if (!(threshold > 0.0 && threshold <= 1.0))
    throw InvalidInput("flood threshold must lie in (0, 1]");
  const double level = quantile_linear(normalized, threshold);
  std::vector<double> out(normalized.begin(), normalized.end());
  for (double& v : out) v = std::min(v, level);
  if (renormalize && level > 0.0)
    for (double& v : out) v /= level;
  return out;
}

inline TimeSeries ror_capacity_factors(const RunoffGrid& grid, const HydroCountryParams& p,
                                       bool renormalize = true) {
  std::vector<double> s = country_runoff(grid, p.country);
  const double peak = *std::max_element(s.begin(), s.end());
  if (!(peak > 0.0)) throw InvalidInput("runoff of '" + p.country + "' is zero everywhere");
  for (double& v : s) v /= peak;
  const auto& first = grid.cells()[grid.cells_of(p.country).front()].runoff;
  return first.with_values(clip_normalized(s, p.flood_threshold, renormalize));
}

// Unit-head inflow energy in MWh per period: runoff depth * area * rho * g * h.
inline TimeSeries sto_inflow_init(const RunoffGrid& grid, const HydroCountryParams& p) {
  std::vector<double> e(grid.time_length(), 0.0);
  for (auto i : grid.cells_of(p.country)) {
    const auto& c = grid.cells()[i];
    const double area_m2 = c.area_km2 * 1e6;
    for (std::size_t t = 0; t < e.size(); ++t)
      e[t] += c.runoff[t] * area_m2 * kWaterDensity * kGravity * p.head_m / kJoulesPerMWh;
  }
  return grid.cells()[grid.cells_of(p.country).front()].runoff.with_values(std::move(e));
}

struct FlowMultiplier {
  double value = 0.0;
  bool clamped = false;  // E_STO was negative
};

// fm = (E_HYDRO - sum ROR) / sum i_init, clamped at 0.
inline FlowMultiplier calibrate_flow_multiplier(double yearly_energy_mwh,
                                                std::span<const double> ror_production,
                                                std::span<const double> inflow_init) {
  double total_in = 0.0;
  for (double v : inflow_init) total_in += v;
  if (!(total_in > 0.0)) throw InvalidInput("inflow integral is zero; flow multiplier undefined");
  double ror = 0.0;
  for (double v : ror_production) ror += v;
  const double e_sto = yearly_energy_mwh - ror;
  if (e_sto < 0.0) return {0.0, true};
  return {e_sto / total_in, false};
}

inline TimeSeries sto_inflows(const RunoffGrid& grid, const HydroCountryParams& p) {
  if (!p.flow_multiplier)
    throw InvalidInput("flow multiplier fm missing for country '" + p.country + "'");
  const TimeSeries init = sto_inflow_init(grid, p);
  std::vector<double> v = init.vector();
  for (double& x : v) x *= *p.flow_multiplier;
  return init.with_values(std::move(v));
}

// Energy rating of a pumped-hydro plant: plant data, else country duration, else
// the default duration.
inline double phs_storage(double power_mw, std::optional<double> plant_energy_mwh = std::nullopt,
                          std::optional<double> country_duration_h = std::nullopt,
                          double default_duration_h = 6.0) {
  if (!(power_mw > 0.0)) throw InvalidInput("PHS power must be positive");
  if (plant_energy_mwh) return *plant_energy_mwh;
  if (country_duration_h) return power_mw * *country_duration_h;
  return power_mw * default_duration_h;
}

// Published defaults by ISO2 code. Unlisted countries get 0.9 as flood threshold.
inline double default_flood_threshold(const std::string& iso2) {
  static const std::map<std::string, double> table = {
      {"BE", 0.8}, {"DE", 0.7}, {"GB", 0.85}, {"IE", 0.85}};
  auto it = table.find(iso2);
  return it == table.end() ? 0.9 : it->second;
}

inline std::optional<double> published_flow_multiplier(const std::string& iso2) {
  static const std::map<std::string, double> table = {
      {"AT", 114.3}, {"BE", 64.3},  {"BG", 116.9}, {"CH", 191.3}, {"CZ", 96.3},
      {"DE", 48.7},  {"ES", 279.2}, {"FI", 22.7},  {"FR", 118.9}, {"GB", 9.8},
      {"GR", 82.7},  {"HR", 123.9}, {"HU", 11.3},  {"IE", 0.07},  {"IT", 83.9},
      {"LT", 44.4},  {"LU", 499.1}, {"LV", 3.6},   {"NO", 279.3}, {"PL", 33.9},
      {"PT", 194.5}, {"RO", 168.1}, {"RS", 392.6}, {"SE", 159.9}, {"SI", 103.1},
      {"SK", 129.5}};
  auto it = table.find(iso2);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

struct PhsCapacity {
  double power_gw = 0.0;
  double energy_gwh = 0.0;
};

inline std::optional<PhsCapacity> published_phs(const std::string& iso2) {
  static const std::map<std::string, PhsCapacity> table = {
      {"AT", {3.6, 159.4}}, {"BE", {1.3, 5.7}},  {"BG", {1.4, 41.1}}, {"CH", {4.5, 648.5}},
      {"CZ", {1.2, 5.57}},  {"DE", {7.8, 45.6}}, {"ES", {7.9, 83.1}}, {"FR", {5.3, 85.6}},
      {"GB", {2.9, 26.7}},  {"GR", {0.7, 5.1}},  {"HR", {0.5, 4.4}},  {"IE", {0.3, 1.8}},
      {"IT", {7.9, 81.0}},  {"LT", {0.9, 10.8}}, {"NO", {1.3, 472.6}}, {"PL", {1.7, 7.3}},
      {"PT", {3.9, 130.7}}, {"RS", {0.6, 3.6}},  {"SE", {0.1, 116.5}}, {"SI", {0.2, 0.5}},
      {"SK", {1.0, 4.6}}};
  auto it = table.find(iso2);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

}  // namespace resite
