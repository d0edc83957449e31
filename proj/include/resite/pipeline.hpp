#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "json.hpp"
#include "resite/cardinality.hpp"
#include "resite/cep.hpp"
#include "resite/cep_io.hpp"
#include "resite/comp_mir.hpp"
#include "resite/criticality.hpp"
#include "resite/csv.hpp"
#include "resite/hydro.hpp"
#include "resite/local_search.hpp"
#include "resite/mps.hpp"
#include "resite/power_curve.hpp"
#include "resite/residual.hpp"
#include "resite/simplex.hpp"
#include "resite/siting.hpp"
#include "resite/siting_io.hpp"

// Pipeline configuration (JSON, paths relative to the file):
//   seed                          default seed; base_seed of the multistart
//   paths.catalog                 catalog CSV
//   paths.wind | paths.capacity_factors
//                                 wind speeds (converted through paths.curves) or
//                                 capacity factors, one column per site
//   paths.curves                  {curve id: power curve CSV}
//   paths.demand                  time series; siting uses the sum of all columns
//   paths.runoff, paths.hydro     runoff grid and hydro parameters (optional)
//   paths.cep                     CEP instance (optional for siting)
//   paths.output                  output directory
//   resource   resample_factor (1), smoothing (true), sigma_factor (0.15),
//              turbine_classes [{min_speed, curve}], legacy_threshold_MW (100)
//   siting     scheme prod|comp, partitioned (true), targets_MW | counts,
//              density {power_density, site_area_km2, utilization}, varsigma (0.3),
//              delta (1), c ("half" or a number), anneal {iterations, neighbors,
//              radius, return best_visited|final_incumbent}, n_runs (1), base_seed,
//              deploy_MW_per_site, init ("greedy" or an MPS solution file)
//   cep        solver embedded|mps-export, discount_rate (0.07), iteration_limit

namespace resite {

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

struct PipelineConfig {
  std::filesystem::path base;
  Json raw;
  std::uint64_t seed = 0;
  std::filesystem::path output;
  std::string hash;

  std::filesystem::path path(const std::string& key) const {
    return (base / raw.at("paths").at(key).get<std::string>()).lexically_normal();
  }
  bool has_path(const std::string& key) const {
    return raw.contains("paths") && raw.at("paths").contains(key);
  }
  const Json& section(const char* name) const {
    static const Json empty = Json::object();
    return raw.contains(name) ? raw.at(name) : empty;
  }
};

namespace detail {

inline void require_file(const std::filesystem::path& p, const std::string& key) {
  if (!std::filesystem::exists(p))
    throw IoError("path '" + key + "' points to missing file '" + p.string() + "'");
}

inline void check_range(const Json& sec, const char* key, double lo, double hi, bool open_lo) {
  if (!sec.contains(key)) return;
  if (!sec.at(key).is_number()) throw InvalidInput(std::string("'") + key + "' must be a number");
  const double v = sec.at(key).get<double>();
  if ((open_lo ? !(v > lo) : !(v >= lo)) || v > hi)
    throw InvalidInput(std::string("'") + key + "' = " + std::to_string(v) + " is out of range");
}

}  // namespace detail

// The hash covers the canonical config with the effective seed and without the
// output location.
inline std::string config_hash(Json j, std::uint64_t seed) {
  j["seed"] = seed;
  if (j.contains("paths")) j["paths"].erase("output");
  return hex64(fnv1a64(j.dump()));
}

inline PipelineConfig load_config(const std::filesystem::path& file,
                                  std::optional<std::uint64_t> seed_override = std::nullopt,
                                  std::optional<std::filesystem::path> out_override = std::nullopt) {
  PipelineConfig cfg;
  cfg.raw = read_json(file);
  cfg.base = file.parent_path();
  try {
    if (!cfg.raw.is_object() || !cfg.raw.contains("paths"))
      throw InvalidInput("config needs a 'paths' section");
    cfg.seed = seed_override ? *seed_override : cfg.raw.value("seed", std::uint64_t{0});
    for (const auto& [key, v] : cfg.raw.at("paths").items()) {
      if (key == "output") continue;
      if (key == "curves") {
        for (const auto& [id, p] : v.items())
          detail::require_file(cfg.base / p.get<std::string>(), "curves." + id);
        continue;
      }
      detail::require_file(cfg.base / v.get<std::string>(), key);
    }
    for (const char* k : {"catalog", "demand"})
      if (!cfg.has_path(k)) throw InvalidInput(std::string("config misses paths.") + k);
    if (!cfg.has_path("wind") && !cfg.has_path("capacity_factors"))
      throw InvalidInput("config needs paths.wind or paths.capacity_factors");
    const auto& s = cfg.section("siting");
    detail::check_range(s, "varsigma", 0.0, 1.0, true);
    detail::check_range(s, "delta", 1.0, 1e9, false);
    detail::check_range(s, "n_runs", 1.0, 1e6, false);
    if (s.contains("scheme") && s.at("scheme") != "prod" && s.at("scheme") != "comp")
      throw InvalidInput("siting.scheme must be 'prod' or 'comp'");
    const auto& r = cfg.section("resource");
    detail::check_range(r, "resample_factor", 1.0, 1e6, false);
    detail::check_range(r, "sigma_factor", 0.0, 10.0, false);
    const auto& c = cfg.section("cep");
    if (c.contains("solver") && c.at("solver") != "embedded" && c.at("solver") != "mps-export")
      throw InvalidInput("cep.solver must be 'embedded' or 'mps-export'");
    detail::check_range(c, "discount_rate", 0.0, 1.0, false);
  } catch (const Json::exception& e) {
    throw InvalidInput(std::string("malformed config: ") + e.what());
  }
  cfg.output = out_override ? *out_override
                            : cfg.base / cfg.raw.at("paths").value("output", std::string("out"));
  cfg.hash = config_hash(cfg.raw, cfg.seed);
  return cfg;
}

// ---------------------------------------------------------------------------
// resource stage

struct ResourceData {
  SiteCatalog catalog;
  TimeSeries demand;  // system total, resampled
  std::map<std::string, std::string> turbine;  // site -> curve id
};

inline ResourceData load_resource(const PipelineConfig& cfg) {
  const auto& res = cfg.section("resource");
  const std::size_t factor = res.value("resample_factor", std::size_t{1});
  const auto rows = read_catalog_rows(cfg.path("catalog"));
  SeriesTable cf;
  std::map<std::string, std::string> turbine;
  if (cfg.has_path("capacity_factors")) {
    cf = read_series(cfg.path("capacity_factors"));
  } else {
    const auto wind = read_series(cfg.path("wind"));
    std::map<std::string, PowerCurve> curves;
    for (const auto& [id, p] : cfg.raw.at("paths").at("curves").items())
      curves.emplace(id, read_power_curve(cfg.base / p.get<std::string>()));
    TurbineClassTable classes;
    if (res.contains("turbine_classes")) {
      for (const auto& c : res.at("turbine_classes"))
        classes.push_back({c.at("min_speed").get<double>(), c.at("curve").get<std::string>()});
    } else {
      classes = default_turbine_classes();
    }
    const bool smooth = res.value("smoothing", true);
    const double sigma_factor = res.value("sigma_factor", 0.15);
    for (const auto& r : rows) {
      const TimeSeries& v = wind.get(r.id);
      const std::string id = select_turbine(v.mean(), classes);
      auto it = curves.find(id);
      if (it == curves.end()) throw InvalidInput("no power curve '" + id + "' for site " + r.id);
      const PowerCurve curve = smooth ? smooth_power_curve(it->second, sigma_factor * v.mean())
                                      : it->second;
      cf.ids.push_back(r.id);
      cf.series.push_back(apply_transfer(curve, v));
      turbine[r.id] = id;
    }
  }
  for (auto& s : cf.series) s = resample_mean(s, factor);
  const auto demand_table = read_series(cfg.path("demand"));
  std::vector<double> total(demand_table.series.front().size(), 0.0);
  for (const auto& s : demand_table.series)
    for (std::size_t t = 0; t < total.size(); ++t) total[t] += s[t];
  TimeSeries demand = resample_mean(demand_table.series.front().with_values(std::move(total)), factor);
  SiteCatalog catalog = make_catalog(rows, cf, res.value("legacy_threshold_MW", kDefaultLegacyThresholdMw));
  if (demand.size() != catalog.time_length())
    throw InvalidInput("demand and capacity factor horizons differ");
  return {std::move(catalog), std::move(demand), std::move(turbine)};
}

// ---------------------------------------------------------------------------
// siting stage

struct SitingRun {
  ResourceData resource;
  SiteCatalog working;  // merged into one partition when unpartitioned
  CardinalityPlan plan;
  CriticalityMatrix matrix;
  SitingSolution solution;
  std::size_t coverage = 0;
};

inline CardinalityPlan plan_from_config(const Json& s, const SiteCatalog& catalog) {
  if (s.contains("counts"))
    return plan_from_counts(catalog, s.at("counts").get<std::map<std::string, std::size_t>>());
  if (!s.contains("targets_MW")) throw InvalidInput("siting needs 'targets_MW' or 'counts'");
  DensityParams d;
  if (s.contains("density")) {
    const auto& j = s.at("density");
    d.power_density_mw_per_km2 = j.value("power_density", d.power_density_mw_per_km2);
    d.site_area_km2 = j.value("site_area_km2", d.site_area_km2);
    d.utilization = j.value("utilization", d.utilization);
  }
  return plan_from_targets(catalog, s.at("targets_MW").get<std::map<std::string, double>>(), d);
}

inline std::size_t threshold_from_config(const Json& s, std::size_t k) {
  if (!s.contains("c") || s.at("c") == "half") return (k + 1) / 2;
  if (!s.at("c").is_number_unsigned()) throw InvalidInput("siting.c must be \"half\" or a count");
  const std::size_t c = s.at("c").get<std::size_t>();
  if (c < 1 || c > k) throw InvalidInput("siting.c must lie in [1, k]");
  return c;
}

// Resource data, plan and criticality matrix; the solution is left empty.
inline SitingRun prepare_siting(const PipelineConfig& cfg, unsigned threads = 1) {
  const auto& s = cfg.section("siting");
  ResourceData resource = load_resource(cfg);
  const bool partitioned = s.value("partitioned", true);
  CardinalityPlan plan = plan_from_config(s, resource.catalog);
  check_plan(resource.catalog, plan);
  SiteCatalog working = partitioned ? resource.catalog : resource.catalog.merged();
  if (!partitioned) plan = merge_plan(plan, working);
  check_plan(working, plan);

  CriticalityParams cp;
  cp.varsigma = s.value("varsigma", 0.3);
  cp.k = plan.total();
  cp.delta = s.value("delta", std::size_t{1});
  cp.threshold_c = threshold_from_config(s, cp.k);
  CriticalityMatrix d = build_criticality_matrix(working, resource.demand, cp, threads);
  return {std::move(resource), std::move(working), std::move(plan), std::move(d), {}, 0};
}

inline SitingRun run_siting(const PipelineConfig& cfg, unsigned threads = 1) {
  const auto& s = cfg.section("siting");
  SitingRun run = prepare_siting(cfg, threads);
  const auto& d = run.matrix;
  const auto& working = run.working;
  const auto& plan = run.plan;

  SitingSolution sol;
  const std::string scheme = s.value("scheme", "comp");
  if (scheme == "prod") {
    sol = solve_prod(working, plan);
  } else {
    AnnealParams ap;
    if (s.contains("anneal")) {
      const auto& a = s.at("anneal");
      ap.iterations = a.value("iterations", ap.iterations);
      ap.neighbors = a.value("neighbors", ap.neighbors);
      ap.radius = a.value("radius", ap.radius);
      ap.initial_temperature = a.value("initial_temperature", ap.initial_temperature);
      ap.decay = a.value("decay", ap.decay);
      const std::string mode = a.value("return", "best_visited");
      if (mode == "best_visited") ap.return_mode = ReturnMode::best_visited;
      else if (mode == "final_incumbent") ap.return_mode = ReturnMode::final_incumbent;
      else throw InvalidInput("anneal.return must be best_visited or final_incumbent");
    }
    std::optional<SitingSolution> init;
    const std::string init_mode = s.value("init", "greedy");
    if (init_mode != "greedy")
      init = import_comp_init((cfg.base / init_mode).string(), d, working, plan);
    sol = run_multistart(d, working, plan, ap, s.value("n_runs", std::size_t{1}),
                         s.value("base_seed", cfg.seed), threads, init);
  }
  run.coverage = coverage_count(d, sol.selected);
  run.solution = std::move(sol);
  return run;
}

inline void write_siting_outputs(const PipelineConfig& cfg, const SitingRun& run) {
  const auto& out = cfg.output;
  std::filesystem::create_directories(out);
  const auto& s = cfg.section("siting");

  Json j = to_json(run.solution, run.working);
  j["config_hash"] = cfg.hash;
  j["partitioned"] = s.value("partitioned", true);
  j["plan"] = plan_to_json(run.plan);
  j["windows"] = run.matrix.windows();
  j["threshold_c"] = run.matrix.threshold();
  j["coverage"] = run.coverage;
  j["mean_capacity_factor"] = prod_objective(run.working, run.solution.selected);
  write_text(out / "solution.json", j.dump(2) + "\n");

  Json g = to_geojson(run.solution, run.working);
  g["config_hash"] = cfg.hash;
  write_text(out / "solution.geojson", g.dump(2) + "\n");

  const double per_site =
      s.value("deploy_MW_per_site", DensityParams{}.capacity_per_site_mw());
  const TimeSeries residual =
      residual_demand(run.resource.demand, run.working, run.solution.selected, per_site);
  SeriesTable series;
  series.ids = {"demand", "residual"};
  series.series = {run.resource.demand, residual};
  write_series(out / "residual.csv", series, {{"config_hash", cfg.hash}});

  const ResidualStats st = residual_stats(residual);
  csv::Writer w;
  w.meta("schema", std::string("residual_stats/") + kSchemaVersion);
  w.meta("config_hash", cfg.hash);
  w.row({"statistic", "q1", "median", "q3"});
  for (const auto& [name, q] : {std::pair{"level", st.level}, std::pair{"spread_12h", st.spread_12h},
                                std::pair{"spread_daily", st.spread_daily}})
    w.row({name, csv::format(q.q1), csv::format(q.median), csv::format(q.q3)});
  w.save(out / "residual_stats.csv");
}

// ---------------------------------------------------------------------------
// CEP stage

struct CepRun {
  CepDocument document;
  std::optional<CepSolution> solution;  // absent in mps-export mode
  std::filesystem::path mps;
  std::map<std::string, FlowMultiplier> flow_multipliers;
};

// Supplies {"hydro_ror": c} and {"hydro_sto": c} series from the runoff grid.
class HydroSeries {
 public:
  HydroSeries(const PipelineConfig& cfg, std::size_t factor) : factor_(factor) {
    if (!cfg.has_path("runoff") || !cfg.has_path("hydro")) return;
    grid_.emplace(read_runoff_grid(cfg.path("runoff")));
    for (auto& r : read_hydro_params(cfg.path("hydro"))) params_[r.params.country] = r.params;
  }

  TimeSeries operator()(const Json& spec) {
    if (!grid_) throw InvalidInput("named hydro series need paths.runoff and paths.hydro");
    if (spec.contains("hydro_ror")) return resample_mean(ror(spec.at("hydro_ror")), factor_);
    if (spec.contains("hydro_sto")) {
      // inflow is energy per period, so blocks are summed
      TimeSeries hourly = sto(spec.at("hydro_sto"));
      TimeSeries m = resample_mean(hourly, factor_);
      std::vector<double> v = m.vector();
      for (double& x : v) x *= static_cast<double>(factor_);
      return m.with_values(std::move(v));
    }
    throw InvalidInput("unknown named series " + spec.dump());
  }

  const std::map<std::string, FlowMultiplier>& calibrations() const { return calibrated_; }

 private:
  const HydroCountryParams& params(const std::string& c) const {
    auto it = params_.find(c);
    if (it == params_.end()) throw InvalidInput("no hydro parameters for country '" + c + "'");
    return it->second;
  }
  TimeSeries ror(const std::string& c) const { return ror_capacity_factors(*grid_, params(c)); }
  TimeSeries sto(const std::string& c) {
    HydroCountryParams p = params(c);
    if (!p.flow_multiplier) {
      const TimeSeries cf = ror(c);
      std::vector<double> prod(cf.size());
      for (std::size_t t = 0; t < cf.size(); ++t)
        prod[t] = p.ror_capacity_mw * cf[t] * cf.resolution_hours();
      // the yearly target is scaled to the horizon
      const double hours = static_cast<double>(cf.size()) * cf.resolution_hours();
      const auto fm = calibrate_flow_multiplier(p.yearly_energy_mwh * hours / 8760.0, prod,
                                                sto_inflow_init(*grid_, p).values());
      calibrated_[c] = fm;
      p.flow_multiplier = fm.value;
    }
    return sto_inflows(*grid_, p);
  }

  std::size_t factor_;
  std::optional<RunoffGrid> grid_;
  std::map<std::string, HydroCountryParams> params_;
  std::map<std::string, FlowMultiplier> calibrated_;
};

inline CepDocument build_cep_document(const PipelineConfig& cfg, const SitingRun& siting,
                                      std::map<std::string, FlowMultiplier>* calibrations = nullptr) {
  if (!cfg.has_path("cep")) throw InvalidInput("config misses paths.cep");
  const std::size_t factor = cfg.section("resource").value("resample_factor", std::size_t{1});
  HydroSeries hydro(cfg, factor);
  CepDocument doc = load_cep_document(cfg.path("cep"), factor, std::ref(hydro),
                                      cfg.section("cep").value("discount_rate", 0.07));
  // sites keep the bus of their original partition
  attach_sites(doc, siting.resource.catalog, siting.solution.selected);
  if (calibrations) *calibrations = hydro.calibrations();
  return doc;
}

// Solves the CEP (or exports it) for a siting result and writes the reports.
inline CepRun run_cep(const PipelineConfig& cfg, const SitingRun& siting) {
  CepRun run;
  run.document = build_cep_document(cfg, siting, &run.flow_multipliers);
  const auto& out = cfg.output;
  std::filesystem::create_directories(out);
  const auto& c = cfg.section("cep");
  const CepInstance& inst = run.document.instance;
  const CepModel model = build_lp(inst);

  if (!run.flow_multipliers.empty()) {
    csv::Writer w;
    w.meta("schema", std::string("flow_multipliers/") + kSchemaVersion);
    w.meta("config_hash", cfg.hash);
    w.row({"country", "flow_multiplier", "clamped"});
    for (const auto& [country, fm] : run.flow_multipliers)
      w.row({country, csv::format(fm.value), fm.clamped ? "1" : "0"});
    w.save(out / "flow_multipliers.csv");
  }

  if (c.value("solver", "embedded") == "mps-export") {
    run.mps = out / "cep.mps";
    export_mps(model.lp, run.mps.string(), {"config_hash=" + cfg.hash});
    return run;
  }
  SimplexOptions opt;
  opt.iteration_limit = c.value("iteration_limit", opt.iteration_limit);
  const LpSolution lp = solve_lp(model.lp, opt);
  run.solution = decode_solution(lp, model, inst);

  csv::Writer report = cep_report(inst, *run.solution);
  csv::Writer w;
  w.meta("schema", std::string("cep_report/") + kSchemaVersion);
  w.meta("config_hash", cfg.hash);
  write_text(out / "cep_report.csv", w.str() + report.str());

  Json summary = cep_summary(*run.solution);
  summary["config_hash"] = cfg.hash;
  summary["iterations"] = lp.iterations;
  summary["dual_objective"] = lp.dual_objective;
  summary["max_balance_residual"] = max_balance_residual(inst, *run.solution);
  write_text(out / "cep_summary.json", summary.dump(2) + "\n");

  SeriesTable dispatch;
  const auto& bus0 = inst.buses.front().demand;
  for (const auto& r : run.solution->sited) {
    dispatch.ids.push_back(r.name);
    dispatch.series.push_back(bus0.with_values(r.dispatch));
  }
  for (const auto& r : run.solution->plants) {
    dispatch.ids.push_back(r.name);
    dispatch.series.push_back(bus0.with_values(r.dispatch));
    if (!r.charge.empty()) {
      dispatch.ids.push_back(r.name + ":charge");
      dispatch.series.push_back(bus0.with_values(r.charge));
      dispatch.ids.push_back(r.name + ":soc");
      dispatch.series.push_back(bus0.with_values(r.soc));
    }
  }
  for (const auto& l : run.solution->lines) {
    dispatch.ids.push_back(l.id);
    dispatch.series.push_back(bus0.with_values(l.flow));
  }
  for (std::size_t n = 0; n < inst.buses.size(); ++n) {
    dispatch.ids.push_back("shed[" + inst.buses[n].id + "]");
    dispatch.series.push_back(bus0.with_values(run.solution->shed[n]));
  }
  write_series(out / "cep_dispatch.csv", dispatch, {{"config_hash", cfg.hash}});
  return run;
}

// Rebuilds the siting result from a stored solution.json.
inline SitingRun load_siting(const PipelineConfig& cfg, const std::filesystem::path& solution_path,
                             unsigned threads = 1) {
  if (!std::filesystem::exists(solution_path))
    throw IoError("siting output '" + solution_path.string() + "' not found; run 'site' first");
  SitingRun run = prepare_siting(cfg, threads);
  run.solution = siting_from_json(read_json(solution_path), run.working);
  require_feasible(run.working, run.plan, run.solution.selected, "stored siting solution");
  run.coverage = coverage_count(run.matrix, run.solution.selected);
  return run;
}

}  // namespace resite
