#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "resite/cardinality.hpp"
#include "resite/criticality.hpp"
#include "resite/lp.hpp"
#include "resite/mps.hpp"
#include "resite/siting.hpp"

namespace resite {

// Mixed-integer relaxation of the coverage problem: binary x_l per site, y_w in [0, 1]
// per window,
//   min -sum_w y_w
//   s.t. sum_l D_lw x_l - c y_w >= 0          (row cov{w})
//        sum_{l in L_n} x_l = k_n            (row card{n})
//        x_l = 1 for legacy sites.
// Columns are x0..x{L-1} followed by y0..y{W-1}.
inline CanonicalLp build_comp_mir(const CriticalityMatrix& d, const SiteCatalog& catalog,
                                  const CardinalityPlan& plan) {
  check_plan(catalog, plan);
  if (d.sites() != catalog.size()) throw InvalidInput("matrix and catalog sizes differ");
  CanonicalLp lp;
  lp.name = "COMPMIR";
  lp.objective_name = "COVER";
  for (std::size_t l = 0; l < d.sites(); ++l) {
    const double lo = catalog.site(l).is_legacy ? 1.0 : 0.0;
    lp.add_column("x" + std::to_string(l), 0.0, lo, 1.0, true);
  }
  const std::size_t y0 = lp.num_cols();
  for (std::size_t w = 0; w < d.windows(); ++w) lp.add_column("y" + std::to_string(w), -1.0, 0.0, 1.0);
  const double c = static_cast<double>(d.threshold());
  for (std::size_t w = 0; w < d.windows(); ++w) {
    const std::size_t r = lp.add_row("cov" + std::to_string(w), RowSense::ge, 0.0);
    for (std::size_t l = 0; l < d.sites(); ++l)
      if (d.get(w, l)) lp.add_coef(r, l, 1.0);
    lp.add_coef(r, y0 + w, -c);
  }
  for (std::size_t n = 0; n < plan.partitions.size(); ++n) {
    const std::size_t r = lp.add_row("card" + std::to_string(n), RowSense::eq,
                                     static_cast<double>(plan.partitions[n].final_k));
    for (auto l : catalog.partitions()[n].members) lp.add_coef(r, l, 1.0);
  }
  return lp;
}

// Reads x back from an external solution (values rounded at 0.5) and returns it as a
// COMP solution; throws if the result violates the plan.
inline SitingSolution comp_init_from_solution(const CriticalityMatrix& d,
                                              const SiteCatalog& catalog,
                                              const CardinalityPlan& plan,
                                              const std::vector<double>& x) {
  if (x.size() < catalog.size()) throw InvalidInput("solution has fewer x values than sites");
  std::vector<std::size_t> selected;
  for (std::size_t l = 0; l < catalog.size(); ++l)
    if (x[l] > 0.5) selected.push_back(l);
  require_feasible(catalog, plan, selected, "imported MIR solution");
  return make_comp_solution(d, catalog, std::move(selected));
}

inline SitingSolution import_comp_init(const std::string& solution_path,
                                       const CriticalityMatrix& d, const SiteCatalog& catalog,
                                       const CardinalityPlan& plan) {
  const CanonicalLp mir = build_comp_mir(d, catalog, plan);
  const MpsNames names = mangle_names(mir);
  const auto imported = import_solution(solution_path, names.cols);
  return comp_init_from_solution(d, catalog, plan, imported.solution.primal);
}

}  // namespace resite
