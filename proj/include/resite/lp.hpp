#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <tuple>
#include <vector>

#include "resite/error.hpp"

namespace resite {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class RowSense : char { le = 'L', eq = 'E', ge = 'G' };

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;

  friend bool operator==(const Triplet&, const Triplet&) = default;
};

// Minimisation LP in row form:
//   min c'x  s.t.  a_i x (<=|=|>=) b_i,  lower <= x <= upper
// Integer flags are carried for MPS export only; the embedded solver ignores MIPs.
struct CanonicalLp {
  std::string name = "RESITE";
  std::string objective_name = "COST";
  std::vector<double> objective;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<bool> integer;
  std::vector<std::string> col_names;
  std::vector<RowSense> senses;
  std::vector<double> rhs;
  std::vector<std::string> row_names;
  std::vector<Triplet> triplets;

  std::size_t num_cols() const { return objective.size(); }
  std::size_t num_rows() const { return rhs.size(); }

  std::size_t add_column(std::string col_name, double cost, double lo = 0.0, double hi = kInf,
                         bool is_integer = false) {
    objective.push_back(cost);
    lower.push_back(lo);
    upper.push_back(hi);
    integer.push_back(is_integer);
    col_names.push_back(std::move(col_name));
    return objective.size() - 1;
  }

  std::size_t add_row(std::string row_name, RowSense sense, double b) {
    senses.push_back(sense);
    rhs.push_back(b);
    row_names.push_back(std::move(row_name));
    return rhs.size() - 1;
  }

  // Exact zeros are not stored.
  void add_coef(std::size_t row, std::size_t col, double value) {
    if (value != 0.0) triplets.push_back({row, col, value});
  }

  // Throws on duplicate (row, col) entries, non-finite data, or lower > upper.
  void validate() const {
    const std::size_t n = num_cols();
    const std::size_t m = num_rows();
    if (lower.size() != n || upper.size() != n || integer.size() != n || col_names.size() != n)
      throw InvalidInput("LP column arrays have inconsistent sizes");
    if (senses.size() != m || row_names.size() != m)
      throw InvalidInput("LP row arrays have inconsistent sizes");
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::isfinite(objective[j]))
        throw InvalidInput("non-finite objective coefficient on " + col_names[j]);
      if (std::isnan(lower[j]) || std::isnan(upper[j]) || lower[j] > upper[j] ||
          lower[j] == kInf || upper[j] == -kInf)
        throw InvalidInput("invalid bounds on " + col_names[j]);
    }
    for (std::size_t i = 0; i < m; ++i)
      if (!std::isfinite(rhs[i])) throw InvalidInput("non-finite rhs on " + row_names[i]);
    std::vector<std::pair<std::size_t, std::size_t>> keys;
    keys.reserve(triplets.size());
    for (const auto& t : triplets) {
      if (t.row >= m || t.col >= n) throw InvalidInput("triplet index out of range");
      if (!std::isfinite(t.value)) throw InvalidInput("non-finite matrix coefficient");
      keys.emplace_back(t.row, t.col);
    }
    std::sort(keys.begin(), keys.end());
    if (std::adjacent_find(keys.begin(), keys.end()) != keys.end())
      throw InvalidInput("duplicate (row, col) triplet in LP");
  }

  // Triplets in (row, col) order; used for structural comparisons.
  std::vector<Triplet> sorted_triplets() const {
    auto t = triplets;
    std::sort(t.begin(), t.end(), [](const Triplet& a, const Triplet& b) {
      return std::tie(a.row, a.col) < std::tie(b.row, b.col);
    });
    return t;
  }
};

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
    case LpStatus::iteration_limit: return "iteration_limit";
  }
  return "unknown";
}

inline LpStatus lp_status_from_string(const std::string& s) {
  if (s == "optimal") return LpStatus::optimal;
  if (s == "infeasible") return LpStatus::infeasible;
  if (s == "unbounded") return LpStatus::unbounded;
  if (s == "iteration_limit") return LpStatus::iteration_limit;
  throw InvalidInput("unknown LP status '" + s + "'");
}

struct LpSolution {
  LpStatus status = LpStatus::optimal;
  std::vector<double> primal;
  std::vector<double> row_duals;      // y: c_j - y'A_j = reduced cost
  std::vector<double> reduced_costs;
  double objective = 0.0;
  double dual_objective = 0.0;  // Lagrangian bound b'y + sum_j min over bounds of d_j x_j
  std::size_t iterations = 0;
};

// Row activities A x.
inline std::vector<double> row_activity(const CanonicalLp& lp, const std::vector<double>& x) {
  std::vector<double> act(lp.num_rows(), 0.0);
  for (const auto& t : lp.triplets) act[t.row] += t.value * x[t.col];
  return act;
}

// Largest bound or row violation of x.
inline double max_infeasibility(const CanonicalLp& lp, const std::vector<double>& x) {
  double worst = 0.0;
  for (std::size_t j = 0; j < lp.num_cols(); ++j) {
    worst = std::max(worst, lp.lower[j] - x[j]);
    worst = std::max(worst, x[j] - lp.upper[j]);
  }
  const auto act = row_activity(lp, x);
  for (std::size_t i = 0; i < lp.num_rows(); ++i) {
    const double r = act[i] - lp.rhs[i];
    if (lp.senses[i] != RowSense::ge) worst = std::max(worst, r);
    if (lp.senses[i] != RowSense::le) worst = std::max(worst, -r);
  }
  return worst;
}

}  // namespace resite
