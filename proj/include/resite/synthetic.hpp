#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "resite/csv.hpp"
#include "resite/error.hpp"
#include "resite/hydro.hpp"
#include "resite/power_curve.hpp"
#include "resite/rng.hpp"
#include "resite/siting_io.hpp"

namespace resite {

struct SyntheticSpec {
  std::uint64_t seed = 42;
  std::size_t sites = 8;
  std::size_t partitions = 2;
  std::size_t hours = 96;
  std::size_t runoff_cells = 3;
  std::size_t resample_factor = 3;
  std::string hydro_country = "NO";
};

namespace detail {

constexpr double kTwoPi = 6.283185307179586;

// Unit-variance AR(1) path.
inline std::vector<double> ar1(Xoshiro256& rng, std::size_t n, double phi) {
  std::vector<double> x(n);
  const double scale = std::sqrt(1.0 - phi * phi);
  double prev = rng.normal();
  for (std::size_t t = 0; t < n; ++t) {
    prev = phi * prev + scale * rng.normal();
    x[t] = prev;
  }
  return x;
}

// Cubic ramp between cut-in and rated, sampled every 0.5 m/s.
inline PowerCurve synthetic_curve(double cut_in, double rated, double cut_out) {
  std::vector<CurvePoint> pts{{0.0, 0.0}};
  for (double v = cut_in; v < rated; v += 0.5) {
    const double p = (v * v * v - cut_in * cut_in * cut_in) /
                     (rated * rated * rated - cut_in * cut_in * cut_in);
    pts.push_back({v, p});
  }
  pts.push_back({rated, 1.0});
  pts.push_back({cut_out, 1.0});
  return PowerCurve(std::move(pts), cut_in, rated, cut_out);
}

inline std::string bus_name(std::size_t n) { return "Z" + std::to_string(n + 1); }

}  // namespace detail

// Writes a reproducible dataset into `dir`: wind speeds, turbine curves, catalog,
// bus demand, runoff grid, hydro parameters, a CEP instance and a pipeline config.
inline void generate_synthetic(const SyntheticSpec& spec, const std::filesystem::path& dir) {
  if (spec.sites == 0 || spec.partitions == 0 || spec.hours == 0 || spec.runoff_cells == 0 ||
      spec.resample_factor == 0)
    throw InvalidInput("synthetic sizes must be positive");
  if (spec.partitions > spec.sites) throw InvalidInput("more partitions than sites");
  if (spec.hours % spec.resample_factor != 0)
    throw InvalidInput("hours must be a multiple of the resample factor");
  std::filesystem::create_directories(dir / "curves");
  const std::map<std::string, std::string> meta{{"generator_seed", std::to_string(spec.seed)}};
  Xoshiro256 rng(spec.seed);
  const std::size_t H = spec.hours;
  const std::size_t P = spec.partitions;

  write_power_curve(dir / "curves" / "V90.csv", detail::synthetic_curve(3.5, 15.0, 25.0));
  write_power_curve(dir / "curves" / "V164.csv", detail::synthetic_curve(4.0, 13.0, 25.0));

  // wind: regional and local AR(1) components on a diurnal and seasonal mean
  std::vector<std::vector<double>> regional;
  for (std::size_t p = 0; p < P; ++p) regional.push_back(detail::ar1(rng, H, 0.95));
  std::vector<CatalogRow> rows;
  SeriesTable wind;
  for (std::size_t l = 0; l < spec.sites; ++l) {
    const std::size_t p = l * P / spec.sites;
    const double mean = 6.5 + 4.0 * rng.unit();
    const auto local = detail::ar1(rng, H, 0.8);
    std::vector<double> v(H);
    for (std::size_t t = 0; t < H; ++t) {
      const double th = static_cast<double>(t);
      const double shape = (1.0 + 0.1 * std::sin(detail::kTwoPi * (th - 4.0) / 24.0)) *
                           (1.0 + 0.15 * std::cos(detail::kTwoPi * th / 8760.0));
      v[t] = std::max(0.0, mean * shape + 3.0 * (0.75 * regional[p][t] + 0.5 * local[t]));
      v[t] = std::round(v[t] * 1000.0) / 1000.0;
    }
    CatalogRow r;
    r.id = "S" + std::to_string(l + 1);
    r.lon = std::round((2.0 + 4.0 * static_cast<double>(p) + 2.0 * rng.unit()) * 1e4) / 1e4;
    r.lat = std::round((54.0 + 2.0 * rng.unit()) * 1e4) / 1e4;
    r.partition = detail::bus_name(p);
    r.potential_mw = std::round(600.0 + 900.0 * rng.unit());
    r.legacy_mw = l == 0 ? 300.0 : 0.0;
    rows.push_back(r);
    wind.ids.push_back(r.id);
    wind.series.emplace_back(std::move(v), 1.0, "2010-01-01T00:00");
  }
  write_catalog_rows(dir / "catalog.csv", rows, meta);
  write_series(dir / "wind.csv", wind, meta);

  SeriesTable demand;
  double total_energy = 0.0;
  for (std::size_t n = 0; n < P; ++n) {
    const double base = 2500.0 + 1000.0 * rng.unit();
    const auto noise = detail::ar1(rng, H, 0.9);
    std::vector<double> d(H);
    for (std::size_t t = 0; t < H; ++t) {
      const double th = static_cast<double>(t);
      d[t] = base * (1.0 + 0.12 * std::sin(detail::kTwoPi * (th - 9.0) / 24.0)) *
                 (1.0 + 0.1 * std::cos(detail::kTwoPi * th / 8760.0)) +
             60.0 * noise[t];
      d[t] = std::round(d[t] * 10.0) / 10.0;
      total_energy += d[t];
    }
    demand.ids.push_back(detail::bus_name(n));
    demand.series.emplace_back(std::move(d), 1.0, "2010-01-01T00:00");
  }
  write_series(dir / "demand.csv", demand, meta);

  // onshore wind and solar profiles per bus (fixed legacy fleets in the CEP)
  SeriesTable profiles;
  for (std::size_t n = 0; n < P; ++n) {
    const auto gust = detail::ar1(rng, H, 0.9);
    const auto cloud = detail::ar1(rng, H, 0.8);
    std::vector<double> on(H), pv(H);
    for (std::size_t t = 0; t < H; ++t) {
      const double th = static_cast<double>(t);
      on[t] = std::clamp(0.3 + 0.15 * gust[t], 0.0, 1.0);
      const double sun = std::max(0.0, std::sin(detail::kTwoPi * (th - 6.0) / 24.0));
      pv[t] = std::clamp(0.6 * sun * (1.0 + 0.2 * cloud[t]), 0.0, 1.0);
      on[t] = std::round(on[t] * 1e4) / 1e4;
      pv[t] = std::round(pv[t] * 1e4) / 1e4;
    }
    profiles.ids.push_back("onshore_" + detail::bus_name(n));
    profiles.series.emplace_back(std::move(on), 1.0, "2010-01-01T00:00");
    profiles.ids.push_back("pv_" + detail::bus_name(n));
    profiles.series.emplace_back(std::move(pv), 1.0, "2010-01-01T00:00");
  }
  write_series(dir / "res_profiles.csv", profiles, meta);

  // runoff depth in metres per hour, log-normal around 2e-5
  SeriesTable runoff;
  csv::Writer grid;
  grid.meta("schema", std::string("runoff_grid/") + kSchemaVersion);
  grid.meta("generator_seed", std::to_string(spec.seed));
  grid.row({"cell", "country", "area_km2", "series"});
  const auto basin = detail::ar1(rng, H, 0.98);
  for (std::size_t c = 0; c < spec.runoff_cells; ++c) {
    const std::string id = "C" + std::to_string(c + 1);
    const auto local = detail::ar1(rng, H, 0.9);
    std::vector<double> r(H);
    for (std::size_t t = 0; t < H; ++t) r[t] = 2e-5 * std::exp(0.4 * basin[t] + 0.2 * local[t]);
    runoff.ids.push_back(id);
    runoff.series.emplace_back(std::move(r), 1.0, "2010-01-01T00:00");
    grid.row({id, spec.hydro_country, csv::format(std::round(200.0 + 600.0 * rng.unit())),
              "runoff.csv"});
  }
  write_series(dir / "runoff.csv", runoff, meta);
  grid.save(dir / "runoff_grid.csv");

  const double ror_mw = 300.0, sto_mw = 800.0, sto_mwh = 80000.0, phs_mw = 1000.0;
  csv::Writer hydro;
  hydro.meta("schema", std::string("hydro/") + kSchemaVersion);
  hydro.meta("generator_seed", std::to_string(spec.seed));
  hydro.row({"country", "flood_threshold", "flow_multiplier", "head_m", "ror_capacity_MW",
             "sto_capacity_MW", "sto_energy_MWh", "yearly_energy_MWh", "phs_power_MW",
             "phs_energy_MWh", "phs_duration_h"});
  hydro.row({spec.hydro_country, "", "", "1", csv::format(ror_mw), csv::format(sto_mw),
             csv::format(sto_mwh), "4100000", csv::format(phs_mw), "", ""});
  hydro.save(dir / "hydro.csv");

  using nlohmann::json;
  const std::string hb = detail::bus_name(0);
  json techs = {
      {"offshore_wind",
       {{"kind", "sited_res"}, {"capex", 1881080}, {"connection_share", 0.2}, {"lifetime", 25},
        {"fixed_om", 49110}}},
      {"ocgt",
       {{"kind", "dispatchable"}, {"capex", 838870}, {"lifetime", 30}, {"fixed_om", 3030},
        {"variable_om", 7.6}, {"fuel_cost", 26.5}, {"efficiency", 0.41},
        {"emission_factor", 0.2}, {"firm", true}}},
      {"ccgt",
       {{"kind", "dispatchable"}, {"capex", 1005270}, {"lifetime", 30}, {"fixed_om", 7580},
        {"variable_om", 5.3}, {"fuel_cost", 26.5}, {"efficiency", 0.58},
        {"emission_factor", 0.2}, {"firm", true}}},
      {"nuclear",
       {{"kind", "dispatchable"}, {"capex", nullptr}, {"fixed_om", 106250},
        {"variable_om", 1.8}, {"fuel_cost", 3.0}, {"efficiency", 0.36}, {"ramp_up", 0.1},
        {"ramp_down", 0.1}, {"must_run", 0.8}, {"firm", true}}},
      {"onshore_wind", {{"kind", "res"}, {"capex", nullptr}, {"fixed_om", 29470}}},
      {"pv", {{"kind", "res"}, {"capex", nullptr}, {"fixed_om", 7140}}},
      {"ror", {{"kind", "res"}, {"capex", nullptr}, {"variable_om", 11.9}}},
      {"sto",
       {{"kind", "storage"}, {"capex", nullptr}, {"variable_om", 15.2}, {"charge_ratio", 0},
        {"eta_discharge", 0.85}, {"firm", true}}},
      {"phs",
       {{"kind", "storage"}, {"capex", nullptr}, {"fixed_om", 14200}, {"variable_om", 0.2},
        {"eta_charge", 0.9}, {"eta_discharge", 0.9}}},
      {"li_ion",
       {{"kind", "storage"}, {"capex", 100000}, {"energy_capex", 94000}, {"lifetime", 10},
        {"fixed_om", 540}, {"variable_om", 1.7}, {"eta_charge", 0.93},
        {"eta_discharge", 0.93}, {"eta_self", 0.995}}}};
  json plants = json::array();
  for (std::size_t n = 0; n < P; ++n) {
    const std::string b = detail::bus_name(n);
    plants.push_back({{"bus", b}, {"technology", "ocgt"}});
    plants.push_back({{"bus", b}, {"technology", "ccgt"}});
    plants.push_back({{"bus", b}, {"technology", "li_ion"}});
    plants.push_back({{"bus", b}, {"technology", "onshore_wind"}, {"legacy", 3000},
                      {"potential", 3000},
                      {"availability", {{"file", "res_profiles.csv"}, {"column", "onshore_" + b}}}});
    plants.push_back({{"bus", b}, {"technology", "pv"}, {"legacy", 2000}, {"potential", 2000},
                      {"availability", {{"file", "res_profiles.csv"}, {"column", "pv_" + b}}}});
  }
  plants.push_back({{"bus", detail::bus_name(P - 1)}, {"technology", "nuclear"}, {"legacy", 800},
                    {"potential", 800}});
  plants.push_back({{"bus", hb}, {"technology", "ror"}, {"legacy", ror_mw}, {"potential", ror_mw},
                    {"availability", {{"hydro_ror", spec.hydro_country}}}});
  plants.push_back({{"bus", hb}, {"technology", "sto"}, {"legacy", sto_mw}, {"potential", sto_mw},
                    {"legacy_energy", sto_mwh}, {"energy_potential", sto_mwh},
                    {"inflow", {{"hydro_sto", spec.hydro_country}}}});
  const double phs_mwh = phs_storage(phs_mw);
  plants.push_back({{"bus", hb}, {"technology", "phs"}, {"legacy", phs_mw}, {"potential", phs_mw},
                    {"legacy_energy", phs_mwh}, {"energy_potential", phs_mwh}});
  json buses = json::array();
  json bus_map = json::object();
  for (std::size_t n = 0; n < P; ++n) {
    buses.push_back({{"id", detail::bus_name(n)}, {"reserve_margin", 0.2}});
    bus_map[detail::bus_name(n)] = detail::bus_name(n);
  }
  json lines = json::array();
  for (std::size_t n = 0; n + 1 < P; ++n)
    lines.push_back({{"id", "L" + std::to_string(n + 1)},
                     {"from", detail::bus_name(n)},
                     {"to", detail::bus_name(n + 1)},
                     {"kind", "ac"},
                     {"legacy", 500},
                     {"capex_per_km", 2220},
                     {"lifetime", 40},
                     {"fixed_om", 17},
                     {"length_km", 300},
                     {"efficiency_per_1000km", 0.93}});
  // reference emissions: the whole demand met by gas at 0.5 t/MWh
  const double reference = std::round(total_energy * 0.5);
  const json cep = {{"schema", "cep/1"},
                    {"demand", "demand.csv"},
                    {"buses", buses},
                    {"technologies", techs},
                    {"plants", plants},
                    {"sited", {{"technology", "offshore_wind"}, {"bus_of_partition", bus_map}}},
                    {"lines", lines},
                    {"co2_budget", {{"reduction", 0.9}, {"reference", reference}}},
                    {"co2_price", 41.85},
                    {"shedding_penalty", 3000},
                    {"capacity_credit_top_fraction", 0.05},
                    {"transmission_losses", true}};
  write_text(dir / "cep.json", cep.dump(2) + "\n");

  json targets = json::object();
  for (std::size_t n = 0; n < P; ++n) targets[detail::bus_name(n)] = 2500;
  const json config = {
      {"schema", "pipeline/1"},
      {"seed", spec.seed},
      {"paths",
       {{"catalog", "catalog.csv"},
        {"wind", "wind.csv"},
        {"curves", {{"V90", "curves/V90.csv"}, {"V164", "curves/V164.csv"}}},
        {"demand", "demand.csv"},
        {"runoff", "runoff_grid.csv"},
        {"hydro", "hydro.csv"},
        {"cep", "cep.json"},
        {"output", "out"}}},
      {"resource",
       {{"resample_factor", spec.resample_factor},
        {"smoothing", true},
        {"turbine_classes", json::array({{{"min_speed", 0.0}, {"curve", "V90"}},
                                         {{"min_speed", 8.0}, {"curve", "V164"}}})},
        {"legacy_threshold_MW", 100}}},
      {"siting",
       {{"scheme", "comp"},
        {"partitioned", true},
        {"targets_MW", targets},
        {"varsigma", 0.3},
        {"delta", 2},
        {"c", "half"},
        {"anneal", {{"iterations", 200}, {"neighbors", 50}, {"radius", 1},
                    {"return", "best_visited"}}},
        {"n_runs", 8}}},
      {"cep", {{"solver", "embedded"}}}};
  write_text(dir / "config.json", config.dump(2) + "\n");
}

}  // namespace resite
