#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "resite/error.hpp"
#include "resite/lp.hpp"

namespace resite {

struct SimplexOptions {
  double feasibility_tol = 1e-7;
  double optimality_tol = 1e-7;
  double pivot_tol = 1e-9;
  std::size_t iteration_limit = 200000;
  std::size_t bland_after = 1000;  // consecutive non-improving pivots before Bland's rule
  std::size_t refactor_every = 64;
};

// Called once per phase-2 iteration with the current primal objective and the
// Lagrangian lower bound of the current dual estimate.
using SimplexObserver = std::function<void(std::size_t iteration, double primal, double dual)>;

namespace detail {

// Bounded-variable revised simplex on  A x - s = 0,  l <= (x, s) <= u,  with a dense
// basis inverse. Rows live in the logical variables s; artificials only where the
// starting logical would be infeasible.
class RevisedSimplex {
 public:
  using Column = std::vector<std::pair<std::size_t, double>>;

  RevisedSimplex(std::size_t m, std::vector<Column> cols, std::vector<double> cost,
                 std::vector<double> lo, std::vector<double> up, const SimplexOptions& opt)
      : m_(m), n_struct_(cols.size()), opt_(opt) {
    cols_ = std::move(cols);
    cost_ = std::move(cost);
    lo_ = std::move(lo);
    up_ = std::move(up);
  }

  // Row i has logical bounds [row_lo, row_up].
  void set_rows(const std::vector<double>& row_lo, const std::vector<double>& row_up) {
    for (std::size_t i = 0; i < m_; ++i) {
      cols_.push_back({{i, -1.0}});
      cost_.push_back(0.0);
      lo_.push_back(row_lo[i]);
      up_.push_back(row_up[i]);
    }
  }

  LpStatus run(const SimplexObserver& observer) {
    const std::size_t n_total = cols_.size();
    x_.assign(n_total, 0.0);
    basic_pos_.assign(n_total, npos);
    for (std::size_t j = 0; j < n_struct_; ++j) x_[j] = nonbasic_start(j);
    std::vector<double> act(m_, 0.0);
    for (std::size_t j = 0; j < n_struct_; ++j)
      for (auto [r, v] : cols_[j]) act[r] += v * x_[j];

    head_.assign(m_, 0);
    n_art_ = 0;
    for (std::size_t i = 0; i < m_; ++i) {
      const std::size_t s = n_struct_ + i;
      if (act[i] >= lo_[s] - opt_.feasibility_tol && act[i] <= up_[s] + opt_.feasibility_tol) {
        head_[i] = s;
        x_[s] = act[i];
      } else {
        const double target = act[i] < lo_[s] ? lo_[s] : up_[s];
        x_[s] = target;
        const double sigma = target > act[i] ? 1.0 : -1.0;
        // act - target + sigma * a = 0, a >= 0
        cols_.push_back({{i, sigma}});
        cost_.push_back(0.0);
        lo_.push_back(0.0);
        up_.push_back(kInf);
        x_.push_back(std::abs(target - act[i]));
        basic_pos_.push_back(npos);
        head_[i] = cols_.size() - 1;
        ++n_art_;
      }
    }
    for (std::size_t i = 0; i < m_; ++i) basic_pos_[head_[i]] = i;
    refactor();

    if (n_art_ > 0) {
      std::vector<double> phase1(cols_.size(), 0.0);
      for (std::size_t j = n_struct_ + m_; j < cols_.size(); ++j) phase1[j] = 1.0;
      const LpStatus s = iterate(phase1, nullptr);
      if (s == LpStatus::iteration_limit) return s;
      double infeas = 0.0;
      for (std::size_t j = n_struct_ + m_; j < cols_.size(); ++j) infeas += x_[j];
      if (infeas > opt_.feasibility_tol * std::max<double>(1.0, static_cast<double>(m_)))
        return LpStatus::infeasible;
      for (std::size_t j = n_struct_ + m_; j < cols_.size(); ++j) up_[j] = 0.0;
    }
    std::vector<double> phase2(cols_.size(), 0.0);
    std::copy(cost_.begin(), cost_.begin() + static_cast<std::ptrdiff_t>(n_struct_), phase2.begin());
    const LpStatus s = iterate(phase2, observer ? &observer : nullptr);
    final_cost_ = std::move(phase2);
    return s;
  }

  std::size_t iterations() const { return iterations_; }
  const std::vector<double>& x() const { return x_; }

  std::vector<double> duals() const { return compute_y(final_cost_); }

  // c_j - y'A_j for structural and logical columns.
  std::vector<double> reduced(const std::vector<double>& y, const std::vector<double>& c) const {
    std::vector<double> d(n_struct_ + m_);
    for (std::size_t j = 0; j < d.size(); ++j) d[j] = c[j] - dot(y, j);
    return d;
  }

  const std::vector<double>& final_cost() const { return final_cost_; }

  // Lagrangian bound  sum_j min_{l_j <= x_j <= u_j} d_j x_j  (rhs is zero in this form).
  double lagrangian_bound(const std::vector<double>& y, const std::vector<double>& c) const {
    double bound = 0.0;
    for (std::size_t j = 0; j < cols_.size(); ++j) {
      const double d = c[j] - dot(y, j);
      if (lo_[j] == up_[j]) {
        bound += d * lo_[j];
      } else if (std::abs(d) <= opt_.optimality_tol) {
        bound += d * x_[j];
      } else if (d > 0.0) {
        if (lo_[j] == -kInf) return -kInf;
        bound += d * lo_[j];
      } else {
        if (up_[j] == kInf) return -kInf;
        bound += d * up_[j];
      }
    }
    return bound;
  }

 private:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  double nonbasic_start(std::size_t j) const {
    if (lo_[j] > -kInf) return lo_[j];
    if (up_[j] < kInf) return up_[j];
    return 0.0;
  }

  double dot(const std::vector<double>& y, std::size_t j) const {
    double s = 0.0;
    for (auto [r, v] : cols_[j]) s += y[r] * v;
    return s;
  }

  std::vector<double> compute_y(const std::vector<double>& c) const {
    const auto M = static_cast<Eigen::Index>(m_);
    Eigen::VectorXd cb(M);
    for (std::size_t k = 0; k < m_; ++k) cb(static_cast<Eigen::Index>(k)) = c[head_[k]];
    const Eigen::VectorXd y = binv_.transpose() * cb;
    return std::vector<double>(y.data(), y.data() + M);
  }

  // Basic columns with a single entry on distinct rows (logicals, artificials and
  // some structurals) are eliminated directly; only the remaining block goes through
  // a dense LU.
  void refactor() {
    const auto M = static_cast<Eigen::Index>(m_);
    std::vector<std::size_t> unit_at(m_, npos);  // row -> basic position
    std::vector<std::size_t> general;
    for (std::size_t k = 0; k < m_; ++k) {
      const auto& col = cols_[head_[k]];
      if (col.size() == 1 && unit_at[col[0].first] == npos)
        unit_at[col[0].first] = k;
      else
        general.push_back(k);
    }
    std::vector<std::size_t> rest_rows;
    std::vector<Eigen::Index> row_in_block(m_, -1);
    for (std::size_t i = 0; i < m_; ++i)
      if (unit_at[i] == npos) {
        row_in_block[i] = static_cast<Eigen::Index>(rest_rows.size());
        rest_rows.push_back(i);
      }
    if (rest_rows.size() != general.size())
      throw SolverError("numerical_failure", "singular simplex basis");
    const auto G = static_cast<Eigen::Index>(general.size());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(G, G);
    for (Eigen::Index g = 0; g < G; ++g)
      for (auto [r, v] : cols_[head_[general[static_cast<std::size_t>(g)]]])
        if (row_in_block[r] >= 0) a(row_in_block[r], g) = v;
    const Eigen::MatrixXd ainv = G > 0 ? Eigen::MatrixXd(a.partialPivLu().inverse())
                                       : Eigen::MatrixXd(0, 0);
    binv_ = Eigen::MatrixXd::Zero(M, M);
    for (Eigen::Index g = 0; g < G; ++g)
      for (Eigen::Index q = 0; q < G; ++q)
        binv_(static_cast<Eigen::Index>(general[static_cast<std::size_t>(g)]),
              static_cast<Eigen::Index>(rest_rows[static_cast<std::size_t>(q)])) = ainv(g, q);
    // unit rows: x_u = (b_r - sum_g B_rg x_g) / v
    for (std::size_t i = 0; i < m_; ++i) {
      const std::size_t k = unit_at[i];
      if (k == npos) continue;
      const double v = cols_[head_[k]][0].second;
      binv_(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) = 1.0 / v;
    }
    for (Eigen::Index g = 0; g < G; ++g) {
      const auto pos = static_cast<Eigen::Index>(general[static_cast<std::size_t>(g)]);
      for (auto [r, v] : cols_[head_[general[static_cast<std::size_t>(g)]]]) {
        const std::size_t k = unit_at[r];
        if (k == npos) continue;
        const double scale = v / cols_[head_[k]][0].second;
        binv_.row(static_cast<Eigen::Index>(k)) -= scale * binv_.row(pos);
      }
    }
    if (!binv_.allFinite()) throw SolverError("numerical_failure", "singular simplex basis");
    // x_B = -B^-1 N x_N
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(M);
    for (std::size_t j = 0; j < cols_.size(); ++j) {
      if (basic_pos_[j] != npos || x_[j] == 0.0) continue;
      for (auto [r, v] : cols_[j]) rhs(static_cast<Eigen::Index>(r)) -= v * x_[j];
    }
    const Eigen::VectorXd xb = binv_ * rhs;
    for (std::size_t k = 0; k < m_; ++k) x_[head_[k]] = xb(static_cast<Eigen::Index>(k));
    since_refactor_ = 0;
  }

  double objective(const std::vector<double>& c) const {
    double s = 0.0;
    for (std::size_t j = 0; j < cols_.size(); ++j) s += c[j] * x_[j];
    return s;
  }

  LpStatus iterate(const std::vector<double>& c, const SimplexObserver* observer) {
    const auto M = static_cast<Eigen::Index>(m_);
    bool bland = false;
    std::size_t stalled = 0;
    double last_obj = objective(c);
    Eigen::VectorXd alpha(M);
    while (true) {
      const std::vector<double> y = compute_y(c);
      if (observer) (*observer)(iterations_, objective(c), lagrangian_bound(y, c));

      // pricing
      std::size_t enter = npos;
      double best = 0.0;
      double enter_d = 0.0;
      for (std::size_t j = 0; j < cols_.size(); ++j) {
        if (basic_pos_[j] != npos || lo_[j] == up_[j]) continue;
        const double d = c[j] - dot(y, j);
        const bool can_up = x_[j] < up_[j];
        const bool can_down = x_[j] > lo_[j];
        const bool eligible =
            (d < -opt_.optimality_tol && can_up) || (d > opt_.optimality_tol && can_down);
        if (!eligible) continue;
        if (bland) {
          enter = j;
          enter_d = d;
          break;
        }
        if (std::abs(d) > best) {
          best = std::abs(d);
          enter = j;
          enter_d = d;
        }
      }
      if (enter == npos) return LpStatus::optimal;
      if (iterations_ >= opt_.iteration_limit) return LpStatus::iteration_limit;
      ++iterations_;

      const double dir = enter_d < 0.0 ? 1.0 : -1.0;
      alpha.setZero();
      for (auto [r, v] : cols_[enter]) alpha += v * binv_.col(static_cast<Eigen::Index>(r));

      // ratio test; x_B moves by -dir * theta * alpha
      const double flip = up_[enter] - lo_[enter];
      std::size_t leave = npos;
      double theta = kInf;
      if (!bland) {
        double theta_max = kInf;
        for (std::size_t k = 0; k < m_; ++k) {
          const double rate = dir * alpha(static_cast<Eigen::Index>(k));
          if (std::abs(rate) <= opt_.pivot_tol) continue;
          const std::size_t b = head_[k];
          if (rate > 0.0 && lo_[b] > -kInf)
            theta_max = std::min(theta_max, (x_[b] - lo_[b] + opt_.feasibility_tol) / rate);
          else if (rate < 0.0 && up_[b] < kInf)
            theta_max = std::min(theta_max, (up_[b] - x_[b] + opt_.feasibility_tol) / -rate);
        }
        double pivot_mag = 0.0;
        for (std::size_t k = 0; k < m_; ++k) {
          const double rate = dir * alpha(static_cast<Eigen::Index>(k));
          if (std::abs(rate) <= opt_.pivot_tol) continue;
          const std::size_t b = head_[k];
          double ratio;
          if (rate > 0.0 && lo_[b] > -kInf)
            ratio = (x_[b] - lo_[b]) / rate;
          else if (rate < 0.0 && up_[b] < kInf)
            ratio = (up_[b] - x_[b]) / -rate;
          else
            continue;
          if (ratio <= theta_max && std::abs(rate) > pivot_mag) {
            pivot_mag = std::abs(rate);
            leave = k;
            theta = std::max(ratio, 0.0);
          }
        }
        if (flip <= theta_max && flip < kInf) {
          leave = npos;
          theta = flip;
        }
      } else {
        for (std::size_t k = 0; k < m_; ++k) {
          const double rate = dir * alpha(static_cast<Eigen::Index>(k));
          if (std::abs(rate) <= opt_.pivot_tol) continue;
          const std::size_t b = head_[k];
          double ratio;
          if (rate > 0.0 && lo_[b] > -kInf)
            ratio = (x_[b] - lo_[b]) / rate;
          else if (rate < 0.0 && up_[b] < kInf)
            ratio = (up_[b] - x_[b]) / -rate;
          else
            continue;
          ratio = std::max(ratio, 0.0);
          if (ratio < theta || (ratio == theta && leave != npos && b < head_[leave])) {
            theta = ratio;
            leave = k;
          }
        }
        if (flip <= theta) {
          leave = npos;
          theta = flip;
        }
      }
      if (theta == kInf) return LpStatus::unbounded;

      x_[enter] += dir * theta;
      if (theta != 0.0)
        for (std::size_t k = 0; k < m_; ++k)
          x_[head_[k]] -= dir * theta * alpha(static_cast<Eigen::Index>(k));

      if (leave == npos) {
        x_[enter] = dir > 0.0 ? up_[enter] : lo_[enter];
      } else {
        const std::size_t out = head_[leave];
        const double rate = dir * alpha(static_cast<Eigen::Index>(leave));
        x_[out] = rate > 0.0 ? lo_[out] : up_[out];
        basic_pos_[out] = npos;
        head_[leave] = enter;
        basic_pos_[enter] = leave;
        const auto r = static_cast<Eigen::Index>(leave);
        const double piv = alpha(r);
        Eigen::RowVectorXd prow = binv_.row(r) / piv;
        alpha(r) = 0.0;
        binv_.noalias() -= alpha * prow;
        binv_.row(r) = prow;
        if (++since_refactor_ >= opt_.refactor_every) refactor();
      }

      const double obj = objective(c);
      if (obj < last_obj - 1e-12 * (1.0 + std::abs(last_obj))) {
        stalled = 0;
      } else if (++stalled >= opt_.bland_after) {
        bland = true;
      }
      last_obj = obj;
    }
  }

  std::size_t m_;
  std::size_t n_struct_;
  std::size_t n_art_ = 0;
  SimplexOptions opt_;
  std::vector<Column> cols_;
  std::vector<double> cost_, lo_, up_, x_;
  std::vector<double> final_cost_;
  std::vector<std::size_t> head_;
  std::vector<std::size_t> basic_pos_;
  Eigen::MatrixXd binv_;
  std::size_t since_refactor_ = 0;
  std::size_t iterations_ = 0;
};

}  // namespace detail

// Solves a continuous LP. Empty rows and columns are removed before the simplex runs.
inline LpSolution solve_lp(const CanonicalLp& lp, const SimplexOptions& opt = {},
                           const SimplexObserver& observer = {}) {
  lp.validate();
  for (bool b : lp.integer)
    if (b) throw InvalidInput("embedded solver handles continuous LPs only; export MPS instead");

  const std::size_t n = lp.num_cols();
  const std::size_t m = lp.num_rows();
  LpSolution sol;
  sol.primal.assign(n, 0.0);
  sol.row_duals.assign(m, 0.0);
  sol.reduced_costs = lp.objective;

  std::vector<std::size_t> row_nnz(m, 0), col_nnz(n, 0);
  for (const auto& t : lp.triplets) {
    ++row_nnz[t.row];
    ++col_nnz[t.col];
  }

  // empty rows must hold at zero activity
  for (std::size_t i = 0; i < m; ++i) {
    if (row_nnz[i] != 0) continue;
    const double b = lp.rhs[i];
    const bool ok = (lp.senses[i] == RowSense::le && b >= -opt.feasibility_tol) ||
                    (lp.senses[i] == RowSense::ge && b <= opt.feasibility_tol) ||
                    (lp.senses[i] == RowSense::eq && std::abs(b) <= opt.feasibility_tol);
    if (!ok) {
      sol.status = LpStatus::infeasible;
      return sol;
    }
  }
  // empty columns go to their cheapest bound
  double fixed_obj = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (col_nnz[j] != 0) continue;
    const double c = lp.objective[j];
    double v;
    if (c > 0.0) {
      if (lp.lower[j] == -kInf) {
        sol.status = LpStatus::unbounded;
        return sol;
      }
      v = lp.lower[j];
    } else if (c < 0.0) {
      if (lp.upper[j] == kInf) {
        sol.status = LpStatus::unbounded;
        return sol;
      }
      v = lp.upper[j];
    } else {
      v = std::clamp(0.0, lp.lower[j], lp.upper[j]);
    }
    sol.primal[j] = v;
    fixed_obj += c * v;
  }

  std::vector<std::size_t> col_map, row_map;
  std::vector<std::size_t> row_index(m, static_cast<std::size_t>(-1));
  for (std::size_t i = 0; i < m; ++i)
    if (row_nnz[i] != 0) {
      row_index[i] = row_map.size();
      row_map.push_back(i);
    }
  std::vector<std::size_t> col_index(n, static_cast<std::size_t>(-1));
  for (std::size_t j = 0; j < n; ++j)
    if (col_nnz[j] != 0) {
      col_index[j] = col_map.size();
      col_map.push_back(j);
    }

  if (row_map.empty()) {
    sol.status = LpStatus::optimal;
    sol.objective = fixed_obj;
    sol.dual_objective = fixed_obj;
    return sol;
  }

  std::vector<detail::RevisedSimplex::Column> cols(col_map.size());
  for (const auto& t : lp.sorted_triplets())
    cols[col_index[t.col]].emplace_back(row_index[t.row], t.value);
  std::vector<double> cost, lo, up;
  for (auto j : col_map) {
    cost.push_back(lp.objective[j]);
    lo.push_back(lp.lower[j]);
    up.push_back(lp.upper[j]);
  }
  std::vector<double> rlo, rup;
  for (auto i : row_map) {
    const double b = lp.rhs[i];
    rlo.push_back(lp.senses[i] == RowSense::le ? -kInf : b);
    rup.push_back(lp.senses[i] == RowSense::ge ? kInf : b);
  }

  detail::RevisedSimplex rs(row_map.size(), std::move(cols), std::move(cost), std::move(lo),
                            std::move(up), opt);
  rs.set_rows(rlo, rup);
  SimplexObserver shifted;
  if (observer)
    shifted = [&](std::size_t it, double p, double d) { observer(it, p + fixed_obj, d + fixed_obj); };
  sol.status = rs.run(shifted);
  sol.iterations = rs.iterations();

  const auto& x = rs.x();
  for (std::size_t k = 0; k < col_map.size(); ++k) sol.primal[col_map[k]] = x[k];
  sol.objective = 0.0;
  for (std::size_t j = 0; j < n; ++j) sol.objective += lp.objective[j] * sol.primal[j];

  if (sol.status == LpStatus::optimal) {
    const auto y = rs.duals();
    for (std::size_t k = 0; k < row_map.size(); ++k) sol.row_duals[row_map[k]] = y[k];
    const auto d = rs.reduced(y, rs.final_cost());
    for (std::size_t k = 0; k < col_map.size(); ++k) sol.reduced_costs[col_map[k]] = d[k];
    sol.dual_objective = rs.lagrangian_bound(y, rs.final_cost()) + fixed_obj;
  }
  return sol;
}

}  // namespace resite
