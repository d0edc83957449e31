#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "resite/error.hpp"
#include "resite/lp.hpp"
#include "resite/simplex.hpp"
#include "resite/time_series.hpp"

namespace resite {

// Equivalent annual payment of an overnight cost.
inline double annualize(double overnight_cost, double lifetime_years, double discount_rate) {
  if (!(lifetime_years > 0.0)) throw InvalidInput("lifetime must be positive");
  if (!(discount_rate >= 0.0)) throw InvalidInput("discount rate must be >= 0");
  if (discount_rate == 0.0) return overnight_cost / lifetime_years;
  return overnight_cost * discount_rate / (1.0 - std::pow(1.0 + discount_rate, -lifetime_years));
}

// Mean capacity factor over the ceil(top_fraction * T) periods of highest demand;
// equal demands rank the earlier period first.
inline double capacity_credit(std::span<const double> cf, std::span<const double> demand,
                              double top_fraction = 0.05) {
  if (cf.size() != demand.size()) throw InvalidInput("capacity factor and demand lengths differ");
  if (cf.empty()) throw InvalidInput("empty series");
  if (!(top_fraction > 0.0 && top_fraction <= 1.0))
    throw InvalidInput("top fraction must lie in (0, 1]");
  std::vector<std::size_t> order(cf.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return demand[a] > demand[b]; });
  const auto n = static_cast<std::size_t>(
      std::max(1.0, ceil_tolerant(top_fraction * static_cast<double>(cf.size()))));
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += cf[order[i]];
  return s / static_cast<double>(n);
}

enum class TechKind { sited_res, res, dispatchable, storage };

inline const char* to_string(TechKind k) {
  switch (k) {
    case TechKind::sited_res: return "sited_res";
    case TechKind::res: return "res";
    case TechKind::dispatchable: return "dispatchable";
    case TechKind::storage: return "storage";
  }
  return "unknown";
}

// Techno-economic data shared by every plant of a technology. Costs are per unit of
// power (or energy) per year; variable costs per unit of energy.
struct Technology {
  std::string id;
  TechKind kind = TechKind::dispatchable;
  bool expandable = true;      // false: capacity fixed at legacy
  double capex_annuity = 0.0;  // zeta
  double fixed_om = 0.0;       // theta_f
  double variable_om = 0.0;    // theta_v
  double fuel_cost = 0.0;      // per unit of primary energy
  double efficiency = 1.0;     // eta
  double emission_factor = 0.0;  // per unit of primary energy
  double ramp_up = 1.0;        // fraction of capacity per hour
  double ramp_down = 1.0;
  double must_run = 0.0;       // mu
  bool firm = false;           // counts fully towards the reserve margin
  // storage only
  double charge_ratio = 1.0;   // phi
  double eta_self = 1.0;
  double eta_charge = 1.0;
  double eta_discharge = 1.0;
  double energy_annuity = 0.0;  // zeta_S
  double min_soc = 0.0;         // mu_s
};

// A technology installed at a bus.
struct PlantAttachment {
  std::string bus;
  std::string technology;
  double legacy = 0.0;
  double potential = kInf;
  std::optional<TimeSeries> availability;  // required for res
  std::optional<double> capacity_credit;   // computed from availability when absent
  // storage only
  double legacy_energy = 0.0;
  double energy_potential = kInf;
  std::optional<TimeSeries> inflow;  // energy per period
};

// A site chosen in the siting stage.
struct SitedPlant {
  std::string site_id;
  std::string bus;
  std::string technology;
  double legacy = 0.0;
  double potential = kInf;
  TimeSeries capacity_factors;
  std::optional<double> capacity_credit;
};

struct Bus {
  std::string id;
  TimeSeries demand;
  std::optional<double> reserve_margin;  // Phi; no adequacy row when absent

  double peak_demand() const { return demand.max(); }
};

enum class LineKind { ac, dc };

struct Line {
  std::string id;
  std::string from;
  std::string to;
  LineKind kind = LineKind::ac;
  double legacy = 0.0;
  double potential = kInf;
  bool expandable = true;
  double capex_annuity = 0.0;
  double fixed_om = 0.0;
  double variable_om = 0.0;
  double length_km = 0.0;
  double efficiency_per_1000km = 1.0;
};

struct CepInstance {
  std::vector<Bus> buses;
  std::map<std::string, Technology> technologies;
  std::vector<PlantAttachment> plants;
  std::vector<SitedPlant> sited;
  std::vector<Line> lines;
  std::optional<std::vector<double>> weights;  // omega_t, default resolution hours
  std::optional<double> storage_weight;        // omega_s, default resolution hours
  std::optional<double> co2_budget;            // Psi
  double co2_price = 0.0;
  std::optional<double> shedding_penalty;      // theta_ens; no shedding when absent
  double capacity_credit_top_fraction = 0.05;
  bool cyclic_soc = true;
  bool transmission_losses = false;

  std::size_t horizon() const { return buses.empty() ? 0 : buses.front().demand.size(); }
  double resolution_hours() const {
    return buses.empty() ? 1.0 : buses.front().demand.resolution_hours();
  }
};

inline constexpr std::size_t kNoIndex = static_cast<std::size_t>(-1);

// Column and row indices of the LP built from an instance.
struct CepLayout {
  struct PlantCols {
    std::size_t capacity = kNoIndex;
    std::size_t energy = kNoIndex;     // storage
    std::vector<std::size_t> output;   // p, or discharge for storage
    std::vector<std::size_t> charge;   // storage
    std::vector<std::size_t> soc;      // storage
    std::vector<std::size_t> spill;    // storage with inflow
  };
  struct LineCols {
    std::size_t capacity = kNoIndex;
    std::vector<std::size_t> forward;
    std::vector<std::size_t> backward;
  };
  std::vector<PlantCols> sited;
  std::vector<PlantCols> plants;
  std::vector<LineCols> lines;
  std::vector<std::vector<std::size_t>> shed;      // [bus][t], empty without shedding
  std::vector<std::vector<std::size_t>> balance;   // rows [bus][t]
  std::size_t co2_row = kNoIndex;
  std::vector<std::size_t> adequacy_rows;          // per bus, kNoIndex if none
  std::vector<double> weights;
  double storage_weight = 1.0;
  std::vector<double> sited_credit;
  std::vector<double> plant_credit;
};

namespace detail {

inline double per_period_ramp(double per_hour, double hours) {
  return std::min(1.0, per_hour * hours);
}

inline double effective_variable_cost(const Technology& t, double co2_price) {
  return t.variable_om + (t.fuel_cost + co2_price * t.emission_factor) / t.efficiency;
}

inline std::size_t bus_index(const CepInstance& inst, const std::string& id,
                             const std::string& what) {
  for (std::size_t n = 0; n < inst.buses.size(); ++n)
    if (inst.buses[n].id == id) return n;
  throw InvalidInput(what + " refers to unknown bus '" + id + "'");
}

inline const Technology& technology(const CepInstance& inst, const std::string& id,
                                    const std::string& what) {
  auto it = inst.technologies.find(id);
  if (it == inst.technologies.end())
    throw InvalidInput(what + " refers to unknown technology '" + id + "'");
  return it->second;
}

inline void check_fraction(double v, bool open_zero, const std::string& symbol,
                           const std::string& owner) {
  const bool ok = open_zero ? (v > 0.0 && v <= 1.0) : (v >= 0.0 && v <= 1.0);
  if (!ok) throw InvalidInput("parameter " + symbol + " of '" + owner + "' out of range");
}

inline void check_bounds(double legacy, double potential, const std::string& owner) {
  if (!(legacy >= 0.0) || std::isinf(legacy))
    throw InvalidInput("legacy capacity kappa_lower of '" + owner + "' must be finite and >= 0");
  if (!(potential >= legacy))
    throw InvalidInput("potential kappa_upper of '" + owner + "' is below its legacy capacity");
}

}  // namespace detail

inline void validate(const CepInstance& inst) {
  if (inst.buses.empty()) throw InvalidInput("instance has no buses");
  const std::size_t T = inst.horizon();
  const double res = inst.resolution_hours();
  for (const auto& b : inst.buses) {
    if (b.demand.size() != T) throw InvalidInput("demand lambda of bus '" + b.id + "' has wrong length");
    if (b.demand.resolution_hours() != res)
      throw InvalidInput("demand lambda of bus '" + b.id + "' has a different resolution");
    if (b.reserve_margin && !(*b.reserve_margin >= 0.0))
      throw InvalidInput("reserve margin Phi of bus '" + b.id + "' must be >= 0");
  }
  for (const auto& [id, t] : inst.technologies) {
    detail::check_fraction(t.efficiency, true, "eta", id);
    detail::check_fraction(t.must_run, false, "mu", id);
    detail::check_fraction(t.ramp_up, false, "Delta_plus", id);
    detail::check_fraction(t.ramp_down, false, "Delta_minus", id);
    if (t.kind == TechKind::storage) {
      detail::check_fraction(t.eta_self, true, "eta_SD", id);
      detail::check_fraction(t.eta_charge, true, "eta_C", id);
      detail::check_fraction(t.eta_discharge, true, "eta_D", id);
      detail::check_fraction(t.min_soc, false, "mu_s", id);
      if (!(t.charge_ratio >= 0.0) || std::isinf(t.charge_ratio))
        throw InvalidInput("charge ratio phi of '" + id + "' must be finite and >= 0");
    }
    for (double v : {t.capex_annuity, t.fixed_om, t.variable_om, t.fuel_cost, t.emission_factor,
                     t.energy_annuity})
      if (!(v >= 0.0) || std::isinf(v))
        throw InvalidInput("cost or emission parameter of '" + id + "' must be finite and >= 0");
  }
  for (const auto& p : inst.plants) {
    const std::string owner = p.technology + "@" + p.bus;
    detail::bus_index(inst, p.bus, "plant " + owner);
    const auto& t = detail::technology(inst, p.technology, "plant " + owner);
    if (t.kind == TechKind::sited_res)
      throw InvalidInput("technology '" + t.id + "' is sited; attach it through sited plants");
    detail::check_bounds(p.legacy, p.potential, owner);
    if (t.kind == TechKind::res && !p.availability)
      throw InvalidInput("availability series pi missing for '" + owner + "'");
    if (p.availability) {
      if (p.availability->size() != T)
        throw InvalidInput("availability series pi of '" + owner + "' has wrong length");
      for (double v : p.availability->values())
        if (v < 0.0 || v > 1.0) throw InvalidInput("availability pi of '" + owner + "' outside [0,1]");
    }
    if (t.kind == TechKind::storage) {
      detail::check_bounds(p.legacy_energy, p.energy_potential, owner + " (energy)");
      if (p.inflow) {
        if (p.inflow->size() != T) throw InvalidInput("inflow series of '" + owner + "' has wrong length");
        for (double v : p.inflow->values())
          if (v < 0.0) throw InvalidInput("inflow of '" + owner + "' is negative");
      }
    } else if (p.inflow) {
      throw InvalidInput("inflow given for non-storage plant '" + owner + "'");
    }
  }
  for (const auto& s : inst.sited) {
    detail::bus_index(inst, s.bus, "site " + s.site_id);
    const auto& t = detail::technology(inst, s.technology, "site " + s.site_id);
    if (t.kind != TechKind::sited_res)
      throw InvalidInput("site '" + s.site_id + "' uses non-sited technology '" + t.id + "'");
    detail::check_bounds(s.legacy, s.potential, s.site_id);
    if (s.capacity_factors.size() != T)
      throw InvalidInput("capacity factors pi of site '" + s.site_id + "' have wrong length");
  }
  for (const auto& c : inst.lines) {
    const auto a = detail::bus_index(inst, c.from, "line " + c.id);
    const auto b = detail::bus_index(inst, c.to, "line " + c.id);
    if (a == b) throw InvalidInput("line '" + c.id + "' connects a bus to itself");
    detail::check_bounds(c.legacy, c.potential, c.id);
    for (double v : {c.capex_annuity, c.fixed_om, c.variable_om})
      if (!(v >= 0.0) || std::isinf(v))
        throw InvalidInput("cost parameter of line '" + c.id + "' must be finite and >= 0");
    if (inst.transmission_losses) {
      detail::check_fraction(c.efficiency_per_1000km, true, "eta_c", c.id);
      if (!(c.length_km >= 0.0)) throw InvalidInput("length of line '" + c.id + "' must be >= 0");
    }
  }
  if (inst.weights) {
    if (inst.weights->size() != T) throw InvalidInput("weights omega have wrong length");
    for (double w : *inst.weights)
      if (!(w > 0.0) || std::isinf(w)) throw InvalidInput("weights omega must be positive");
  }
  if (inst.storage_weight && !(*inst.storage_weight > 0.0))
    throw InvalidInput("storage weight omega_s must be positive");
  if (inst.co2_budget && !(*inst.co2_budget >= 0.0))
    throw InvalidInput("CO2 budget Psi_CO2 must be >= 0");
  if (inst.shedding_penalty && (!(*inst.shedding_penalty >= 0.0) || std::isinf(*inst.shedding_penalty)))
    throw InvalidInput("shedding penalty theta_ens must be finite and >= 0");
  if (!(inst.co2_price >= 0.0)) throw InvalidInput("CO2 price must be >= 0");
}

// Delivery efficiency of a line; 1 unless losses are enabled.
inline double line_efficiency(const CepInstance& inst, const Line& c) {
  if (!inst.transmission_losses) return 1.0;
  return std::pow(c.efficiency_per_1000km, c.length_km / 1000.0);
}

struct CepModel {
  CanonicalLp lp;
  CepLayout layout;
};

inline CepModel build_lp(const CepInstance& inst) {
  validate(inst);
  CepModel model;
  CanonicalLp& lp = model.lp;
  CepLayout& L = model.layout;
  lp.name = "CEP";
  lp.objective_name = "COST";
  const std::size_t T = inst.horizon();
  const std::size_t B = inst.buses.size();
  const double res = inst.resolution_hours();
  L.weights = inst.weights ? *inst.weights : std::vector<double>(T, res);
  L.storage_weight = inst.storage_weight ? *inst.storage_weight : res;
  const auto& w = L.weights;
  auto ts = [](std::size_t t) { return "[" + std::to_string(t) + "]"; };

  L.balance.assign(B, {});
  for (std::size_t n = 0; n < B; ++n)
    for (std::size_t t = 0; t < T; ++t)
      L.balance[n].push_back(
          lp.add_row("balance[" + inst.buses[n].id + "]" + ts(t), RowSense::eq,
                     inst.buses[n].demand[t]));

  // shedding
  L.shed.assign(B, {});
  if (inst.shedding_penalty)
    for (std::size_t n = 0; n < B; ++n)
      for (std::size_t t = 0; t < T; ++t) {
        const auto j = lp.add_column("shed[" + inst.buses[n].id + "]" + ts(t),
                                     w[t] * *inst.shedding_penalty, 0.0,
                                     std::max(0.0, inst.buses[n].demand[t]));
        lp.add_coef(L.balance[n][t], j, 1.0);
        L.shed[n].push_back(j);
      }

  // CO2 terms collected while building generators
  std::vector<std::pair<std::size_t, double>> co2_terms;

  // sited RES
  for (const auto& s : inst.sited) {
    const auto& tech = inst.technologies.at(s.technology);
    const std::size_t n = detail::bus_index(inst, s.bus, "site");
    CepLayout::PlantCols pc;
    const std::string tag = s.technology + "[" + s.site_id + "]";
    pc.capacity = lp.add_column("K_" + tag, tech.capex_annuity + tech.fixed_om, 0.0,
                                tech.expandable ? s.potential - s.legacy : 0.0);
    const double vc = detail::effective_variable_cost(tech, inst.co2_price);
    for (std::size_t t = 0; t < T; ++t) {
      const auto j = lp.add_column("p_" + tag + ts(t), w[t] * vc);
      pc.output.push_back(j);
      lp.add_coef(L.balance[n][t], j, 1.0);
      const double pi = s.capacity_factors[t];
      const auto r = lp.add_row("avail_" + tag + ts(t), RowSense::le, pi * s.legacy);
      lp.add_coef(r, j, 1.0);
      lp.add_coef(r, pc.capacity, -pi);
    }
    L.sited.push_back(std::move(pc));
  }

  // plants
  for (const auto& p : inst.plants) {
    const auto& tech = inst.technologies.at(p.technology);
    const std::size_t n = detail::bus_index(inst, p.bus, "plant");
    const std::string tag = p.technology + "[" + p.bus + "]";
    CepLayout::PlantCols pc;
    pc.capacity = lp.add_column("K_" + tag, tech.capex_annuity + tech.fixed_om, 0.0,
                                tech.expandable ? p.potential - p.legacy : 0.0);
    const double vc = detail::effective_variable_cost(tech, inst.co2_price);
    if (tech.kind != TechKind::storage) {
      for (std::size_t t = 0; t < T; ++t) {
        const auto j = lp.add_column("p_" + tag + ts(t), w[t] * vc);
        pc.output.push_back(j);
        lp.add_coef(L.balance[n][t], j, 1.0);
        const double pi = p.availability ? (*p.availability)[t] : 1.0;
        const auto r = lp.add_row("avail_" + tag + ts(t), RowSense::le, pi * p.legacy);
        lp.add_coef(r, j, 1.0);
        lp.add_coef(r, pc.capacity, -pi);
        if (tech.must_run > 0.0) {
          const auto m = lp.add_row("minrun_" + tag + ts(t), RowSense::ge, tech.must_run * p.legacy);
          lp.add_coef(m, j, 1.0);
          lp.add_coef(m, pc.capacity, -tech.must_run);
        }
        if (tech.emission_factor > 0.0)
          co2_terms.emplace_back(j, w[t] * tech.emission_factor / tech.efficiency);
      }
      const double up = detail::per_period_ramp(tech.ramp_up, res);
      const double down = detail::per_period_ramp(tech.ramp_down, res);
      for (std::size_t t = 1; t < T; ++t) {
        if (up < 1.0) {
          const auto r = lp.add_row("rampup_" + tag + ts(t), RowSense::le, up * p.legacy);
          lp.add_coef(r, pc.output[t], 1.0);
          lp.add_coef(r, pc.output[t - 1], -1.0);
          lp.add_coef(r, pc.capacity, -up);
        }
        if (down < 1.0) {
          const auto r = lp.add_row("rampdown_" + tag + ts(t), RowSense::ge, -down * p.legacy);
          lp.add_coef(r, pc.output[t], 1.0);
          lp.add_coef(r, pc.output[t - 1], -1.0);
          lp.add_coef(r, pc.capacity, down);
        }
      }
    } else {
      pc.energy = lp.add_column("S_" + tag, tech.energy_annuity, 0.0,
                                tech.expandable ? p.energy_potential - p.legacy_energy : 0.0);
      const double ws = L.storage_weight;
      for (std::size_t t = 0; t < T; ++t) {
        const auto d = lp.add_column("pd_" + tag + ts(t), w[t] * vc);
        const auto c = lp.add_column("pc_" + tag + ts(t), w[t] * vc);
        const auto e = lp.add_column("e_" + tag + ts(t), 0.0);
        pc.output.push_back(d);
        pc.charge.push_back(c);
        pc.soc.push_back(e);
        lp.add_coef(L.balance[n][t], d, 1.0);
        lp.add_coef(L.balance[n][t], c, -1.0);
        auto r = lp.add_row("dis_" + tag + ts(t), RowSense::le, p.legacy);
        lp.add_coef(r, d, 1.0);
        lp.add_coef(r, pc.capacity, -1.0);
        r = lp.add_row("chg_" + tag + ts(t), RowSense::le, tech.charge_ratio * p.legacy);
        lp.add_coef(r, c, 1.0);
        lp.add_coef(r, pc.capacity, -tech.charge_ratio);
        r = lp.add_row("socmax_" + tag + ts(t), RowSense::le, p.legacy_energy);
        lp.add_coef(r, e, 1.0);
        lp.add_coef(r, pc.energy, -1.0);
        if (tech.min_soc > 0.0) {
          r = lp.add_row("socmin_" + tag + ts(t), RowSense::ge, tech.min_soc * p.legacy_energy);
          lp.add_coef(r, e, 1.0);
          lp.add_coef(r, pc.energy, -tech.min_soc);
        }
        if (p.inflow) pc.spill.push_back(lp.add_column("spill_" + tag + ts(t), 0.0));
      }
      // e_t - eta_SD e_{t-1} - ws eta_C pc_t + (ws / eta_D) pd_t + spill_t = inflow_t
      for (std::size_t t = 0; t < T; ++t) {
        const auto r = lp.add_row("soc_" + tag + ts(t), RowSense::eq, p.inflow ? (*p.inflow)[t] : 0.0);
        if (t > 0 || inst.cyclic_soc) {
          const std::size_t prev = t > 0 ? t - 1 : T - 1;
          if (prev == t) {
            lp.add_coef(r, pc.soc[t], 1.0 - tech.eta_self);
          } else {
            lp.add_coef(r, pc.soc[t], 1.0);
            lp.add_coef(r, pc.soc[prev], -tech.eta_self);
          }
        } else {
          lp.add_coef(r, pc.soc[t], 1.0);
        }
        lp.add_coef(r, pc.charge[t], -ws * tech.eta_charge);
        lp.add_coef(r, pc.output[t], ws / tech.eta_discharge);
        if (p.inflow) lp.add_coef(r, pc.spill[t], 1.0);
      }
    }
    L.plants.push_back(std::move(pc));
  }

  // lines: forward flows from -> to, backward flows to -> from
  for (const auto& c : inst.lines) {
    const std::size_t a = detail::bus_index(inst, c.from, "line");
    const std::size_t b = detail::bus_index(inst, c.to, "line");
    const double eta = line_efficiency(inst, c);
    CepLayout::LineCols lc;
    lc.capacity = lp.add_column("K_line[" + c.id + "]", c.capex_annuity + c.fixed_om, 0.0,
                                c.expandable ? c.potential - c.legacy : 0.0);
    for (std::size_t t = 0; t < T; ++t) {
      const auto f = lp.add_column("fwd[" + c.id + "]" + ts(t), w[t] * c.variable_om);
      const auto g = lp.add_column("bwd[" + c.id + "]" + ts(t), w[t] * c.variable_om);
      lc.forward.push_back(f);
      lc.backward.push_back(g);
      lp.add_coef(L.balance[a][t], f, -1.0);
      lp.add_coef(L.balance[b][t], f, eta);
      lp.add_coef(L.balance[b][t], g, -1.0);
      lp.add_coef(L.balance[a][t], g, eta);
      auto r = lp.add_row("flowf[" + c.id + "]" + ts(t), RowSense::le, c.legacy);
      lp.add_coef(r, f, 1.0);
      lp.add_coef(r, lc.capacity, -1.0);
      r = lp.add_row("flowb[" + c.id + "]" + ts(t), RowSense::le, c.legacy);
      lp.add_coef(r, g, 1.0);
      lp.add_coef(r, lc.capacity, -1.0);
    }
    L.lines.push_back(std::move(lc));
  }

  if (inst.co2_budget && !co2_terms.empty()) {
    L.co2_row = lp.add_row("co2", RowSense::le, *inst.co2_budget);
    for (auto [j, v] : co2_terms) lp.add_coef(L.co2_row, j, v);
  }

  // reserve margin
  L.sited_credit.assign(inst.sited.size(), 0.0);
  L.plant_credit.assign(inst.plants.size(), 0.0);
  for (std::size_t i = 0; i < inst.sited.size(); ++i) {
    const auto& s = inst.sited[i];
    const auto& bus = inst.buses[detail::bus_index(inst, s.bus, "site")];
    L.sited_credit[i] = s.capacity_credit
                            ? *s.capacity_credit
                            : capacity_credit(s.capacity_factors.values(), bus.demand.values(),
                                              inst.capacity_credit_top_fraction);
  }
  for (std::size_t i = 0; i < inst.plants.size(); ++i) {
    const auto& p = inst.plants[i];
    const auto& tech = inst.technologies.at(p.technology);
    const auto& bus = inst.buses[detail::bus_index(inst, p.bus, "plant")];
    if (tech.firm) L.plant_credit[i] = 1.0;
    else if (p.capacity_credit) L.plant_credit[i] = *p.capacity_credit;
    else if (tech.kind == TechKind::res)
      L.plant_credit[i] = capacity_credit(p.availability->values(), bus.demand.values(),
                                          inst.capacity_credit_top_fraction);
  }
  L.adequacy_rows.assign(B, kNoIndex);
  for (std::size_t n = 0; n < B; ++n) {
    const auto& bus = inst.buses[n];
    if (!bus.reserve_margin) continue;
    double rhs = (1.0 + *bus.reserve_margin) * bus.peak_demand();
    std::vector<std::pair<std::size_t, double>> terms;
    for (std::size_t i = 0; i < inst.sited.size(); ++i)
      if (inst.sited[i].bus == bus.id && L.sited_credit[i] != 0.0) {
        terms.emplace_back(L.sited[i].capacity, L.sited_credit[i]);
        rhs -= L.sited_credit[i] * inst.sited[i].legacy;
      }
    for (std::size_t i = 0; i < inst.plants.size(); ++i)
      if (inst.plants[i].bus == bus.id && L.plant_credit[i] != 0.0) {
        terms.emplace_back(L.plants[i].capacity, L.plant_credit[i]);
        rhs -= L.plant_credit[i] * inst.plants[i].legacy;
      }
    L.adequacy_rows[n] = lp.add_row("adequacy[" + bus.id + "]", RowSense::ge, rhs);
    for (auto [j, v] : terms) lp.add_coef(L.adequacy_rows[n], j, v);
  }
  return model;
}

struct CostBreakdown {
  double investment = 0.0;
  double fixed_om = 0.0;
  double variable_om = 0.0;  // including fuel and CO2 price
  double shedding = 0.0;
  double total() const { return investment + fixed_om + variable_om + shedding; }
};

struct CapacityResult {
  std::string name;       // technology[bus], technology[site] or line id
  std::string technology;
  std::string bus;
  double legacy = 0.0;
  double added = 0.0;
  double total() const { return legacy + added; }
  double energy_legacy = 0.0;  // storage
  double energy_added = 0.0;
  double produced = 0.0;       // weighted output (discharge for storage)
  std::vector<double> dispatch;
  std::vector<double> charge;
  std::vector<double> soc;
  std::vector<double> spill;
  std::vector<double> curtailment;  // sited RES
};

struct LineResult {
  std::string id;
  double legacy = 0.0;
  double added = 0.0;
  std::vector<double> forward;
  std::vector<double> backward;
  std::vector<double> flow;  // forward minus backward
  double total() const { return legacy + added; }
};

struct CepSolution {
  std::vector<CapacityResult> sited;
  std::vector<CapacityResult> plants;
  std::vector<LineResult> lines;
  std::vector<std::vector<double>> shed;  // [bus][t]
  CostBreakdown costs;
  double objective = 0.0;  // solver objective
  double emissions = 0.0;
  double shed_energy = 0.0;  // weighted
};

inline CepSolution decode_solution(const LpSolution& sol, const CepModel& model,
                                   const CepInstance& inst) {
  if (sol.status != LpStatus::optimal)
    throw SolverError(to_string(sol.status), std::string("CEP LP not solved to optimality: ") +
                                                 to_string(sol.status));
  const auto& L = model.layout;
  const auto& x = sol.primal;
  const std::size_t T = inst.horizon();
  const auto& w = L.weights;
  CepSolution out;
  out.objective = sol.objective;
  auto series = [&](const std::vector<std::size_t>& cols) {
    std::vector<double> v;
    v.reserve(cols.size());
    for (auto j : cols) v.push_back(x[j]);
    return v;
  };
  auto weighted = [&](const std::vector<double>& v) {
    double s = 0.0;
    for (std::size_t t = 0; t < v.size(); ++t) s += w[t] * v[t];
    return s;
  };

  for (std::size_t i = 0; i < inst.sited.size(); ++i) {
    const auto& s = inst.sited[i];
    const auto& tech = inst.technologies.at(s.technology);
    CapacityResult r;
    r.name = s.technology + "[" + s.site_id + "]";
    r.technology = s.technology;
    r.bus = s.bus;
    r.legacy = s.legacy;
    r.added = x[L.sited[i].capacity];
    r.dispatch = series(L.sited[i].output);
    r.produced = weighted(r.dispatch);
    for (std::size_t t = 0; t < T; ++t)
      r.curtailment.push_back(s.capacity_factors[t] * r.total() - r.dispatch[t]);
    out.costs.investment += tech.capex_annuity * r.added;
    out.costs.fixed_om += tech.fixed_om * r.added;
    out.costs.variable_om += detail::effective_variable_cost(tech, inst.co2_price) * r.produced;
    out.sited.push_back(std::move(r));
  }
  for (std::size_t i = 0; i < inst.plants.size(); ++i) {
    const auto& p = inst.plants[i];
    const auto& tech = inst.technologies.at(p.technology);
    const auto& pc = L.plants[i];
    CapacityResult r;
    r.name = p.technology + "[" + p.bus + "]";
    r.technology = p.technology;
    r.bus = p.bus;
    r.legacy = p.legacy;
    r.added = x[pc.capacity];
    r.dispatch = series(pc.output);
    r.produced = weighted(r.dispatch);
    const double vc = detail::effective_variable_cost(tech, inst.co2_price);
    out.costs.investment += tech.capex_annuity * r.added;
    out.costs.fixed_om += tech.fixed_om * r.added;
    if (tech.kind == TechKind::storage) {
      r.charge = series(pc.charge);
      r.soc = series(pc.soc);
      r.spill = series(pc.spill);
      r.energy_legacy = p.legacy_energy;
      r.energy_added = x[pc.energy];
      out.costs.investment += tech.energy_annuity * r.energy_added;
      out.costs.variable_om += vc * (r.produced + weighted(r.charge));
    } else {
      out.costs.variable_om += vc * r.produced;
      out.emissions += tech.emission_factor / tech.efficiency * r.produced;
    }
    out.plants.push_back(std::move(r));
  }
  for (std::size_t i = 0; i < inst.lines.size(); ++i) {
    const auto& c = inst.lines[i];
    const auto& lc = L.lines[i];
    LineResult r;
    r.id = c.id;
    r.legacy = c.legacy;
    r.added = x[lc.capacity];
    double moved = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      r.forward.push_back(x[lc.forward[t]]);
      r.backward.push_back(x[lc.backward[t]]);
      r.flow.push_back(x[lc.forward[t]] - x[lc.backward[t]]);
      moved += w[t] * (x[lc.forward[t]] + x[lc.backward[t]]);
    }
    out.costs.investment += c.capex_annuity * r.added;
    out.costs.fixed_om += c.fixed_om * r.added;
    out.costs.variable_om += c.variable_om * moved;
    out.lines.push_back(std::move(r));
  }
  out.shed.assign(inst.buses.size(), std::vector<double>(T, 0.0));
  for (std::size_t n = 0; n < L.shed.size(); ++n)
    for (std::size_t t = 0; t < L.shed[n].size(); ++t) {
      out.shed[n][t] = x[L.shed[n][t]];
      out.shed_energy += w[t] * out.shed[n][t];
    }
  if (inst.shedding_penalty) out.costs.shedding = *inst.shedding_penalty * out.shed_energy;

  const double total = out.costs.total();
  if (std::abs(total - sol.objective) > 1e-6 * std::max(1.0, std::abs(sol.objective)))
    throw SolverError("inconsistent", "recomputed cost " + std::to_string(total) +
                                          " differs from solver objective " +
                                          std::to_string(sol.objective));
  return out;
}

// Largest |supply - demand| over all bus-periods, scaled by max(1, demand).
inline double max_balance_residual(const CepInstance& inst, const CepSolution& s) {
  const std::size_t T = inst.horizon();
  double worst = 0.0;
  for (std::size_t n = 0; n < inst.buses.size(); ++n) {
    const auto& bus = inst.buses[n];
    for (std::size_t t = 0; t < T; ++t) {
      double net = s.shed[n][t];
      for (const auto& r : s.sited)
        if (r.bus == bus.id) net += r.dispatch[t];
      for (const auto& r : s.plants)
        if (r.bus == bus.id) {
          net += r.dispatch[t];
          if (!r.charge.empty()) net -= r.charge[t];
        }
      for (std::size_t i = 0; i < inst.lines.size(); ++i) {
        const auto& c = inst.lines[i];
        const double eta = line_efficiency(inst, c);
        const double fwd = s.lines[i].forward[t], bwd = s.lines[i].backward[t];
        if (c.from == bus.id) net += -fwd + eta * bwd;
        if (c.to == bus.id) net += eta * fwd - bwd;
      }
      worst = std::max(worst, std::abs(net - bus.demand[t]) / std::max(1.0, bus.demand[t]));
    }
  }
  return worst;
}

// Builds, solves with the embedded simplex and decodes.
inline CepSolution solve_cep(const CepInstance& inst, const SimplexOptions& opt = {}) {
  const CepModel model = build_lp(inst);
  const LpSolution sol = solve_lp(model.lp, opt);
  return decode_solution(sol, model, inst);
}

}  // namespace resite
