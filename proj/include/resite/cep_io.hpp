#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <string>

#include "json.hpp"
#include "resite/cep.hpp"
#include "resite/csv.hpp"
#include "resite/error.hpp"
#include "resite/site_catalog.hpp"
#include "resite/siting.hpp"
#include "resite/siting_io.hpp"

// CEP instance document (JSON), paths relative to the document:
//   demand          time-series file with one column per bus
//   buses           [{id, demand (column, default id), reserve_margin}]
//   technologies    {id: {kind, capex | capex_annuity, lifetime, discount_rate,
//                         connection_share, fixed_om, variable_om, fuel_cost,
//                         efficiency, emission_factor, ramp_up, ramp_down, must_run,
//                         firm, charge_ratio, eta_self, eta_charge, eta_discharge,
//                         energy_capex | energy_annuity, min_soc}}
//                   capex null marks a technology that cannot be expanded
//   plants          [{bus, technology, legacy, potential, availability, inflow,
//                     capacity_credit, legacy_energy, energy_potential}]
//                   series: {"file": path, "column": id} or a named series
//                   ({"hydro_ror": ISO2}, {"hydro_sto": ISO2}) supplied by the caller
//   sited           {technology, bus_of_partition: {partition: bus}}
//   lines           [{id, from, to, kind, legacy, potential, capex | capex_per_km |
//                     capex_annuity, lifetime, discount_rate, fixed_om, variable_om,
//                     length_km, efficiency_per_1000km}]
//   co2_budget      number, or {reduction, reference}
//   co2_price, shedding_penalty, capacity_credit_top_fraction, cyclic_soc,
//   transmission_losses, weights, storage_weight
//   prorate          scale yearly investment and fixed costs to the horizon length
//                    (default true)

namespace resite {

using Json = nlohmann::json;
using SeriesResolver = std::function<TimeSeries(const Json& spec)>;

struct CepDocument {
  CepInstance instance;
  std::string sited_technology;
  std::map<std::string, std::string> bus_of_partition;
};

namespace detail {

inline double num(const Json& j, const char* key, double fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  if (!j.at(key).is_number()) throw InvalidInput(std::string("field '") + key + "' must be a number");
  return j.at(key).get<double>();
}

inline double potential(const Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return kInf;
  return num(j, key, kInf);
}

inline double annuity_of(const Json& j, const char* direct, const char* overnight,
                         double overnight_scale, double default_rate, bool& expandable) {
  expandable = true;
  if (j.contains(direct) && !j.at(direct).is_null()) return num(j, direct, 0.0);
  if (!j.contains(overnight) || j.at(overnight).is_null()) {
    expandable = false;
    return 0.0;
  }
  const double capex = num(j, overnight, 0.0) * overnight_scale *
                       (1.0 + num(j, "connection_share", 0.0));
  const double life = num(j, "lifetime", 0.0);
  return annualize(capex, life, num(j, "discount_rate", default_rate));
}

}  // namespace detail

inline TechKind tech_kind_from_string(const std::string& s) {
  if (s == "sited_res") return TechKind::sited_res;
  if (s == "res") return TechKind::res;
  if (s == "dispatchable") return TechKind::dispatchable;
  if (s == "storage") return TechKind::storage;
  throw InvalidInput("unknown technology kind '" + s + "'");
}

// Loads an instance; every series is mean-resampled by `resample_factor`.
inline CepDocument load_cep_document(const std::filesystem::path& path, std::size_t resample_factor = 1,
                                     const SeriesResolver& named = {}, double default_rate = 0.07) {
  const Json doc = [&] {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path.string() + "'");
    try {
      return Json::parse(f);
    } catch (const Json::parse_error& e) {
      throw InvalidInput("malformed JSON in '" + path.string() + "': " + e.what());
    }
  }();
  const auto base = path.parent_path();
  std::map<std::string, SeriesTable> cache;
  auto file_series = [&](const std::string& file, const std::string& column) {
    const auto p = (base / file).lexically_normal().string();
    auto it = cache.find(p);
    if (it == cache.end()) it = cache.emplace(p, read_series(p)).first;
    return resample_mean(it->second.get(column), resample_factor);
  };
  auto series = [&](const Json& spec) -> TimeSeries {
    if (spec.contains("file")) return file_series(spec.at("file"), spec.at("column"));
    if (!named) throw InvalidInput("named series " + spec.dump() + " cannot be resolved here");
    return named(spec);
  };

  CepDocument out;
  CepInstance& inst = out.instance;
  try {
    const std::string demand_file = doc.at("demand");
    for (const auto& b : doc.at("buses")) {
      Bus bus{b.at("id"), file_series(demand_file, b.value("demand", b.at("id").get<std::string>())),
              std::nullopt};
      if (b.contains("reserve_margin") && !b.at("reserve_margin").is_null())
        bus.reserve_margin = b.at("reserve_margin").get<double>();
      inst.buses.push_back(std::move(bus));
    }
    for (const auto& [id, t] : doc.at("technologies").items()) {
      Technology tech;
      tech.id = id;
      tech.kind = tech_kind_from_string(t.at("kind"));
      tech.capex_annuity = detail::annuity_of(t, "capex_annuity", "capex", 1.0, default_rate,
                                              tech.expandable);
      tech.fixed_om = detail::num(t, "fixed_om", 0.0);
      tech.variable_om = detail::num(t, "variable_om", 0.0);
      tech.fuel_cost = detail::num(t, "fuel_cost", 0.0);
      tech.efficiency = detail::num(t, "efficiency", 1.0);
      tech.emission_factor = detail::num(t, "emission_factor", 0.0);
      tech.ramp_up = detail::num(t, "ramp_up", 1.0);
      tech.ramp_down = detail::num(t, "ramp_down", 1.0);
      tech.must_run = detail::num(t, "must_run", 0.0);
      tech.firm = t.value("firm", false);
      tech.charge_ratio = detail::num(t, "charge_ratio", 1.0);
      tech.eta_self = detail::num(t, "eta_self", 1.0);
      tech.eta_charge = detail::num(t, "eta_charge", 1.0);
      tech.eta_discharge = detail::num(t, "eta_discharge", 1.0);
      tech.min_soc = detail::num(t, "min_soc", 0.0);
      if (tech.kind == TechKind::storage) {
        bool energy_expandable = true;
        tech.energy_annuity = detail::annuity_of(t, "energy_annuity", "energy_capex", 1.0,
                                                 default_rate, energy_expandable);
        if (!energy_expandable && tech.expandable)
          throw InvalidInput("storage '" + id + "' has power capex but no energy capex");
      }
      inst.technologies[id] = tech;
    }
    for (const auto& p : doc.value("plants", Json::array())) {
      PlantAttachment a;
      a.bus = p.at("bus");
      a.technology = p.at("technology");
      a.legacy = detail::num(p, "legacy", 0.0);
      a.potential = detail::potential(p, "potential");
      a.legacy_energy = detail::num(p, "legacy_energy", 0.0);
      a.energy_potential = detail::potential(p, "energy_potential");
      if (p.contains("availability")) a.availability = series(p.at("availability"));
      if (p.contains("inflow")) a.inflow = series(p.at("inflow"));
      if (p.contains("capacity_credit")) a.capacity_credit = p.at("capacity_credit").get<double>();
      inst.plants.push_back(std::move(a));
    }
    for (const auto& c : doc.value("lines", Json::array())) {
      Line line;
      line.id = c.at("id");
      line.from = c.at("from");
      line.to = c.at("to");
      const std::string kind = c.value("kind", "ac");
      if (kind == "ac") line.kind = LineKind::ac;
      else if (kind == "dc") line.kind = LineKind::dc;
      else throw InvalidInput("unknown line kind '" + kind + "'");
      line.legacy = detail::num(c, "legacy", 0.0);
      line.potential = detail::potential(c, "potential");
      line.length_km = detail::num(c, "length_km", 0.0);
      if (c.contains("capex_per_km") && !c.contains("capex")) {
        Json tmp = c;
        tmp["capex"] = c.at("capex_per_km").get<double>() * line.length_km;
        line.capex_annuity =
            detail::annuity_of(tmp, "capex_annuity", "capex", 1.0, default_rate, line.expandable);
      } else {
        line.capex_annuity =
            detail::annuity_of(c, "capex_annuity", "capex", 1.0, default_rate, line.expandable);
      }
      line.fixed_om = detail::num(c, "fixed_om", 0.0);
      line.variable_om = detail::num(c, "variable_om", 0.0);
      line.efficiency_per_1000km = detail::num(c, "efficiency_per_1000km", 1.0);
      inst.lines.push_back(std::move(line));
    }
    if (doc.contains("co2_budget") && !doc.at("co2_budget").is_null()) {
      const auto& b = doc.at("co2_budget");
      if (b.is_number()) inst.co2_budget = b.get<double>();
      else inst.co2_budget = (1.0 - b.at("reduction").get<double>()) * b.at("reference").get<double>();
    }
    inst.co2_price = detail::num(doc, "co2_price", 0.0);
    if (doc.contains("shedding_penalty") && !doc.at("shedding_penalty").is_null())
      inst.shedding_penalty = doc.at("shedding_penalty").get<double>();
    inst.capacity_credit_top_fraction = detail::num(doc, "capacity_credit_top_fraction", 0.05);
    inst.cyclic_soc = doc.value("cyclic_soc", true);
    inst.transmission_losses = doc.value("transmission_losses", false);
    if (doc.contains("weights")) inst.weights = doc.at("weights").get<std::vector<double>>();
    if (doc.contains("storage_weight")) inst.storage_weight = doc.at("storage_weight").get<double>();
    if (doc.value("prorate", true)) {
      double hours = 0.0;
      if (inst.weights)
        for (double w : *inst.weights) hours += w;
      else
        hours = static_cast<double>(inst.horizon()) * inst.resolution_hours();
      const double f = hours / 8760.0;
      for (auto& [id, t] : inst.technologies) {
        t.capex_annuity *= f;
        t.fixed_om *= f;
        t.energy_annuity *= f;
      }
      for (auto& c : inst.lines) {
        c.capex_annuity *= f;
        c.fixed_om *= f;
      }
    }
    if (doc.contains("sited")) {
      const auto& s = doc.at("sited");
      out.sited_technology = s.at("technology");
      if (s.contains("bus_of_partition"))
        out.bus_of_partition = s.at("bus_of_partition").get<std::map<std::string, std::string>>();
    }
  } catch (const Json::exception& e) {
    throw InvalidInput("malformed CEP document '" + path.string() + "': " + e.what());
  }
  return out;
}

// Adds the selected sites as sited plants. Capacity factors come from the catalog;
// a partition maps to the bus of the same name unless remapped.
inline void attach_sites(CepDocument& doc, const SiteCatalog& catalog,
                         std::span<const std::size_t> selected) {
  if (doc.sited_technology.empty())
    throw InvalidInput("CEP document has no 'sited' technology for the selected sites");
  for (auto l : selected) {
    const Site& s = catalog.site(l);
    SitedPlant p{s.id, s.partition_id, doc.sited_technology, s.legacy_capacity_mw,
                 s.technical_potential_mw, s.capacity_factors, std::nullopt};
    if (auto it = doc.bus_of_partition.find(s.partition_id); it != doc.bus_of_partition.end())
      p.bus = it->second;
    doc.instance.sited.push_back(std::move(p));
  }
}

// One row per technology (summed over buses and sites), transmission, shedding and
// the total, with annual cost per row.
inline csv::Writer cep_report(const CepInstance& inst, const CepSolution& sol) {
  struct Agg {
    std::string kind;
    double legacy = 0, added = 0, energy = 0, produced = 0, cost = 0;
  };
  std::map<std::string, Agg> rows;
  std::vector<std::string> order;
  auto touch = [&](const std::string& id, const std::string& kind) -> Agg& {
    if (!rows.count(id)) order.push_back(id);
    auto& a = rows[id];
    a.kind = kind;
    return a;
  };
  auto cost_of = [&](const Technology& t, const CapacityResult& r) {
    double c = (t.capex_annuity + t.fixed_om) * r.added + t.energy_annuity * r.energy_added;
    const double vc = detail::effective_variable_cost(t, inst.co2_price);
    double moved = r.produced;
    if (!r.charge.empty()) {
      const std::size_t T = r.charge.size();
      std::vector<double> w = inst.weights ? *inst.weights
                                           : std::vector<double>(T, inst.resolution_hours());
      for (std::size_t t = 0; t < T; ++t) moved += w[t] * r.charge[t];
    }
    return c + vc * moved;
  };
  for (const auto& r : sol.sited) {
    const auto& t = inst.technologies.at(r.technology);
    auto& a = touch(r.technology, to_string(t.kind));
    a.legacy += r.legacy;
    a.added += r.added;
    a.produced += r.produced;
    a.cost += cost_of(t, r);
  }
  for (const auto& r : sol.plants) {
    const auto& t = inst.technologies.at(r.technology);
    auto& a = touch(r.technology, to_string(t.kind));
    a.legacy += r.legacy;
    a.added += r.added;
    a.energy += r.energy_legacy + r.energy_added;
    a.produced += r.produced;
    a.cost += cost_of(t, r);
  }
  Agg tx;
  tx.kind = "line";
  const auto& w_line = inst.weights ? *inst.weights
                                    : std::vector<double>(inst.horizon(), inst.resolution_hours());
  for (std::size_t i = 0; i < sol.lines.size(); ++i) {
    const auto& c = inst.lines[i];
    const auto& r = sol.lines[i];
    tx.legacy += r.legacy;
    tx.added += r.added;
    double moved = 0;
    for (std::size_t t = 0; t < r.forward.size(); ++t) moved += w_line[t] * (r.forward[t] + r.backward[t]);
    tx.produced += moved;
    tx.cost += (c.capex_annuity + c.fixed_om) * r.added + c.variable_om * moved;
  }
  csv::Writer w;
  w.row({"item", "kind", "capacity_legacy", "capacity_added", "capacity_total", "energy_capacity",
         "energy", "annual_cost"});
  for (const auto& id : order) {
    const auto& a = rows[id];
    w.row({id, a.kind, csv::format(a.legacy), csv::format(a.added), csv::format(a.legacy + a.added),
           csv::format(a.energy), csv::format(a.produced), csv::format(a.cost)});
  }
  if (!inst.lines.empty())
    w.row({"transmission", tx.kind, csv::format(tx.legacy), csv::format(tx.added),
           csv::format(tx.legacy + tx.added), "0", csv::format(tx.produced), csv::format(tx.cost)});
  w.row({"shedding", "shed", "0", "0", "0", "0", csv::format(sol.shed_energy),
         csv::format(sol.costs.shedding)});
  w.row({"total", "total", "", "", "", "", "", csv::format(sol.costs.total())});
  return w;
}

inline Json cep_summary(const CepSolution& sol) {
  return {{"objective", sol.objective},
          {"costs",
           {{"investment", sol.costs.investment},
            {"fixed_om", sol.costs.fixed_om},
            {"variable_om", sol.costs.variable_om},
            {"shedding", sol.costs.shedding},
            {"total", sol.costs.total()}}},
          {"emissions", sol.emissions},
          {"shed_energy", sol.shed_energy}};
}

}  // namespace resite
