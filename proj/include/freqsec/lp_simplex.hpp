// Copyright 2026 The freqsec Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Dense-tableau primal simplex for bounded variables.
//
// Every row i gets a logical variable r_i = a_i x whose bounds encode the
// row sense, so the working system is [A | -I] (x, r) = 0 with every column
// bounded (possibly infinitely). The basis starts all-logical. Phase 1
// minimises the sum of bound violations of the basic variables, phase 2 the
// objective; pricing is Dantzig with a Bland fallback after a run of
// degenerate pivots, and the ratio test is Harris two-pass.
//
// The tableau persists between solve() calls: changing variable bounds and
// solving again restarts from the previous basis. Branch and bound relies on
// this.

#ifndef FREQSEC_LP_SIMPLEX_HPP_
#define FREQSEC_LP_SIMPLEX_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "freqsec/errors.hpp"
#include "freqsec/milp_model.hpp"

namespace freqsec {

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

inline std::string to_string(LpStatus s) {
  switch (s) {
    case LpStatus::kOptimal:
      return "optimal";
    case LpStatus::kInfeasible:
      return "infeasible";
    case LpStatus::kUnbounded:
      return "unbounded";
    case LpStatus::kIterationLimit:
      return "iteration-limit";
  }
  return "?";
}

struct LpOptions {
  double feasibility_tol = 1e-7;
  double optimality_tol = 1e-9;
  double pivot_tol = 1e-9;
  std::size_t max_iterations = 200000;
  std::size_t refactor_interval = 500;
  int degenerate_before_bland = 50;
};

struct LpResult {
  LpStatus status = LpStatus::kInfeasible;
  std::vector<double> x;              // structural values
  double objective = 0.0;             // including the model offset
  std::vector<double> row_duals;      // y, with c = A^T y + reduced cost
  std::vector<double> reduced_costs;  // structural
  std::size_t iterations = 0;
};

class BoundedSimplex {
 public:
  explicit BoundedSimplex(const MilpModel& model, LpOptions options = {}) : options_(options) { load(model); }

  std::size_t num_structural() const { return n_; }
  std::size_t num_rows() const { return m_; }

  /// Bounds after folding single-variable rows into them.
  double root_lower(std::size_t j) const { return root_lo_[j]; }
  double root_upper(std::size_t j) const { return root_hi_[j]; }
  double lower(std::size_t j) const { return lo_[j]; }
  double upper(std::size_t j) const { return hi_[j]; }

  /// Changes the bounds of structural j; the current basis stays loaded.
  void set_bounds(std::size_t j, double lower, double upper) {
    lo_[j] = lower;
    hi_[j] = upper;
    if (state_[j] == kBasic) return;
    if (d_valid_ && lower != upper) {
      // Keep the basis dual feasible so the dual simplex can re-optimise.
      if (d_[j] < 0.0 && std::isfinite(upper)) state_[j] = kAtUpper;
      if (d_[j] > 0.0 && std::isfinite(lower)) state_[j] = kAtLower;
    }
    const double target = nonbasic_value(j);
    shift_nonbasic(j, target);
  }

  /// Total simplex pivots (including bound flips) over the engine's life.
  std::uint64_t total_iterations() const { return total_iterations_; }

  LpResult solve() {
    LpResult res;
    if (trivially_infeasible_) {
      res.status = LpStatus::kInfeasible;
      return res;
    }
    for (std::size_t j = 0; j < n_; ++j) {
      if (lo_[j] > hi_[j] + options_.feasibility_tol) {
        res.status = LpStatus::kInfeasible;
        return res;
      }
    }
    int retries = 0;
    bool verified = false;
    // Infeasible and unbounded verdicts are only trusted from a freshly
    // factorized tableau.
    auto recheck = [&]() {
      if (verified || pivots_since_refactor_ == 0) return false;
      verified = true;
      if (!reinvert()) cold_start();
      return true;
    };
    while (true) {
      if (d_valid_ && max_basic_infeasibility() > 0.0 && dual_feasible()) {
        const LpStatus dual = dual_iterate(res.iterations);
        if (dual == LpStatus::kInfeasible) {
          if (!certified_infeasible() && recheck()) continue;
          res.status = dual;
          break;
        }
      }
      const LpStatus status = iterate(res.iterations);
      if (status == LpStatus::kUnbounded && recheck()) continue;
      if (status == LpStatus::kInfeasible && !certified_infeasible() && recheck()) continue;
      if (status != LpStatus::kOptimal) {
        res.status = status;
        break;
      }
      refresh_basic_values();
      if (max_residual() <= 1e-6 && max_basic_infeasibility() <= 10 * options_.feasibility_tol) {
        res.status = LpStatus::kOptimal;
        break;
      }
      if (++retries > 2) throw NumericalError("simplex: residual check failed after refactorization");
      if (!reinvert()) cold_start();
    }
    if (res.status == LpStatus::kOptimal) {
      res.x.assign(x_.begin(), x_.begin() + static_cast<std::ptrdiff_t>(n_));
      res.objective = offset_;
      for (std::size_t j = 0; j < n_; ++j) res.objective += cost_raw_[j] * res.x[j];
      compute_reduced_costs();
      res.row_duals.resize(m_);
      for (std::size_t i = 0; i < m_; ++i) res.row_duals[i] = d_[n_ + i] * row_scale_[i] * cost_scale_;
      res.reduced_costs.resize(n_);
      for (std::size_t j = 0; j < n_; ++j) res.reduced_costs[j] = d_[j] * cost_scale_;
    }
    return res;
  }

 private:
  enum State : unsigned char { kBasic, kAtLower, kAtUpper, kFree };

  struct Entry {
    std::size_t row;
    double value;
  };

  void load(const MilpModel& model) {
    n_ = model.num_variables();
    root_lo_.resize(n_);
    root_hi_.resize(n_);
    for (std::size_t j = 0; j < n_; ++j) {
      root_lo_[j] = model.variables()[j].lower;
      root_hi_[j] = model.variables()[j].upper;
    }

    // Merge duplicate terms; singleton rows become bounds, empty rows are
    // checked once.
    std::vector<std::vector<Term>> rows;
    std::vector<double> rlo, rhi;
    for (const auto& c : model.constraints()) {
      std::vector<Term> merged;
      for (const auto& t : c.terms) {
        auto it = std::find_if(merged.begin(), merged.end(), [&](const Term& u) { return u.var == t.var; });
        if (it == merged.end()) {
          merged.push_back(t);
        } else {
          it->coef += t.coef;
        }
      }
      std::erase_if(merged, [](const Term& t) { return t.coef == 0.0; });
      const double lo = c.sense == Sense::kLessEqual ? -kInf : c.rhs;
      const double hi = c.sense == Sense::kGreaterEqual ? kInf : c.rhs;
      if (merged.empty()) {
        if (lo > options_.feasibility_tol || hi < -options_.feasibility_tol) trivially_infeasible_ = true;
        continue;
      }
      if (merged.size() == 1) {
        const auto& t = merged.front();
        double blo = t.coef > 0 ? lo / t.coef : hi / t.coef;
        double bhi = t.coef > 0 ? hi / t.coef : lo / t.coef;
        if (!std::isfinite(blo) && blo > 0) blo = kInf;
        root_lo_[t.var.index] = std::max(root_lo_[t.var.index], blo);
        root_hi_[t.var.index] = std::min(root_hi_[t.var.index], bhi);
        continue;
      }
      rows.push_back(std::move(merged));
      rlo.push_back(lo);
      rhi.push_back(hi);
    }
    m_ = rows.size();
    cols_ = n_ + m_;

    // Row equilibration by the largest coefficient.
    row_scale_.assign(m_, 1.0);
    columns_.assign(n_, {});
    for (std::size_t i = 0; i < m_; ++i) {
      double big = 0.0;
      for (const auto& t : rows[i]) big = std::max(big, std::abs(t.coef));
      row_scale_[i] = 1.0 / big;
      for (const auto& t : rows[i]) columns_[t.var.index].push_back(Entry{i, t.coef * row_scale_[i]});
    }

    lo_.assign(cols_, 0.0);
    hi_.assign(cols_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) {
      lo_[j] = root_lo_[j];
      hi_[j] = root_hi_[j];
    }
    for (std::size_t i = 0; i < m_; ++i) {
      lo_[n_ + i] = rlo[i] * row_scale_[i];
      hi_[n_ + i] = rhi[i] * row_scale_[i];
    }

    double cmax = 0.0;
    for (double c : model.objective()) cmax = std::max(cmax, std::abs(c));
    cost_scale_ = cmax > 0.0 ? cmax : 1.0;
    cost_raw_ = model.objective();
    cost_.assign(cols_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) cost_[j] = cost_raw_[j] / cost_scale_;
    offset_ = model.objective_offset();

    cold_start();
  }

  void cold_start() {
    tableau_.assign(m_ * cols_, 0.0);
    head_.resize(m_);
    state_.assign(cols_, kAtLower);
    x_.assign(cols_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) {
      for (const auto& e : columns_[j]) tableau_[e.row * cols_ + j] = -e.value;
    }
    for (std::size_t i = 0; i < m_; ++i) {
      tableau_[i * cols_ + n_ + i] = 1.0;
      head_[i] = n_ + i;
      state_[n_ + i] = kBasic;
    }
    for (std::size_t j = 0; j < n_; ++j) {
      state_[j] = initial_state(j);
      x_[j] = nonbasic_value(j);
    }
    pivots_since_refactor_ = 0;
    d_.clear();
    d_valid_ = false;
    refresh_basic_values();
  }

  State initial_state(std::size_t j) const {
    if (std::isfinite(lo_[j])) return kAtLower;
    if (std::isfinite(hi_[j])) return kAtUpper;
    return kFree;
  }

  // Value a nonbasic column should sit at given its bounds and state.
  double nonbasic_value(std::size_t j) {
    if (state_[j] == kAtUpper && std::isfinite(hi_[j])) return hi_[j];
    if (state_[j] == kAtLower && std::isfinite(lo_[j])) return lo_[j];
    state_[j] = initial_state(j);
    if (state_[j] == kAtLower) return lo_[j];
    if (state_[j] == kAtUpper) return hi_[j];
    return 0.0;
  }

  void shift_nonbasic(std::size_t j, double target) {
    const double delta = target - x_[j];
    if (delta == 0.0) return;
    x_[j] = target;
    for (std::size_t i = 0; i < m_; ++i) {
      const double t = tableau_[i * cols_ + j];
      if (t != 0.0) x_[head_[i]] -= t * delta;
    }
  }

  // x_B = -sum over nonbasic j of T[:, j] x_j.
  void refresh_basic_values() {
    std::vector<double> xn(cols_, 0.0);
    for (std::size_t j = 0; j < cols_; ++j) {
      if (state_[j] != kBasic) xn[j] = x_[j];
    }
    for (std::size_t i = 0; i < m_; ++i) {
      const double* row = &tableau_[i * cols_];
      double acc = 0.0;
      for (std::size_t j = 0; j < cols_; ++j) acc += row[j] * xn[j];
      x_[head_[i]] = -acc;
    }
  }

  double max_residual() const {
    std::vector<double> r(m_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) {
      for (const auto& e : columns_[j]) r[e.row] += e.value * x_[j];
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < m_; ++i) worst = std::max(worst, std::abs(r[i] - x_[n_ + i]));
    return worst;
  }

  double infeasibility(std::size_t j) const {
    if (x_[j] < lo_[j] - options_.feasibility_tol) return lo_[j] - x_[j];
    if (x_[j] > hi_[j] + options_.feasibility_tol) return x_[j] - hi_[j];
    return 0.0;
  }

  double max_basic_infeasibility() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < m_; ++i) worst = std::max(worst, infeasibility(head_[i]));
    return worst;
  }

  void compute_reduced_costs() {
    d_ = cost_;
    for (std::size_t i = 0; i < m_; ++i) {
      const double cb = cost_[head_[i]];
      if (cb == 0.0) continue;
      const double* row = &tableau_[i * cols_];
      for (std::size_t j = 0; j < cols_; ++j) d_[j] -= cb * row[j];
    }
    for (std::size_t i = 0; i < m_; ++i) d_[head_[i]] = 0.0;
    d_valid_ = true;
  }

  double ftol_check() const { return options_.feasibility_tol; }

  // Checks an infeasibility verdict against the original rows: combining
  // them with y = ray_weights_ . B^-1 yields an equation sum_j g_j x_j = 0
  // that no point of the bound box satisfies.
  bool certified_infeasible() const {
    if (ray_weights_.size() != m_) return false;
    std::vector<double> y(m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      const double w = ray_weights_[i];
      if (w == 0.0) continue;
      const double* row = &tableau_[i * cols_ + n_];
      for (std::size_t k = 0; k < m_; ++k) y[k] -= w * row[k];
    }
    double ymax = 1.0;
    for (double v : y) ymax = std::max(ymax, std::abs(v));
    const double negligible = 1e-11 * ymax;
    double lo = 0.0, hi = 0.0, scale = 0.0;
    auto add = [&](double g, double l, double h) {
      if (std::abs(g) <= negligible && !(std::isfinite(l) && std::isfinite(h))) return;
      if (g == 0.0) return;
      lo += g > 0 ? g * l : g * h;
      hi += g > 0 ? g * h : g * l;
      scale += std::abs(g) * std::max(std::isfinite(l) ? std::abs(l) : 0.0, std::isfinite(h) ? std::abs(h) : 0.0);
      scale += std::abs(g);
    };
    for (std::size_t j = 0; j < n_; ++j) {
      double g = 0.0;
      for (const auto& e : columns_[j]) g += y[e.row] * e.value;
      add(g, lo_[j], hi_[j]);
    }
    for (std::size_t k = 0; k < m_; ++k) add(-y[k], lo_[n_ + k], hi_[n_ + k]);
    const double tol = options_.feasibility_tol * (1.0 + scale);
    return lo > tol || hi < -tol;
  }

  bool dual_feasible() const {
    const double tol = 1e3 * options_.optimality_tol;
    for (std::size_t j = 0; j < cols_; ++j) {
      const State s = state_[j];
      if (s == kBasic || lo_[j] == hi_[j]) continue;
      if (s == kAtLower && d_[j] < -tol) return false;
      if (s == kAtUpper && d_[j] > tol) return false;
      if (s == kFree && std::abs(d_[j]) > tol) return false;
    }
    return true;
  }

  // Dual simplex from a dual feasible basis. Returns kOptimal once primal
  // feasible, kInfeasible on a dual ray, kIterationLimit when it gives up
  // (the caller continues with the primal method).
  LpStatus dual_iterate(std::size_t& iterations) {
    const double ftol = options_.feasibility_tol;
    const std::size_t budget = iterations + 20 * (m_ + 10);
    while (true) {
      if (iterations >= options_.max_iterations || iterations >= budget) return LpStatus::kIterationLimit;
      if (pivots_since_refactor_ >= options_.refactor_interval) {
        if (!reinvert()) {
          cold_start();
          return LpStatus::kIterationLimit;
        }
        compute_reduced_costs();
        if (!dual_feasible()) return LpStatus::kIterationLimit;
      }
      // Leaving row: largest bound violation.
      std::size_t p = m_;
      double worst = 0.0;
      for (std::size_t i = 0; i < m_; ++i) {
        const double v = infeasibility(head_[i]);
        if (v > worst) {
          worst = v;
          p = i;
        }
      }
      if (p == m_) return LpStatus::kOptimal;
      const std::size_t b = head_[p];
      const bool raise = x_[b] < lo_[b];
      const double target = raise ? lo_[b] : hi_[b];
      const double sgn = raise ? 1.0 : -1.0;
      const double* prow = &tableau_[p * cols_];

      // Two-pass ratio test on |d_j| / |alpha_j|.
      auto eligible = [&](std::size_t j, double& alpha) {
        const State s = state_[j];
        if (s == kBasic || lo_[j] == hi_[j] || prow[j] == 0.0) return false;
        alpha = -prow[j] * sgn;
        if (std::abs(alpha) <= options_.pivot_tol) return false;
        if (s == kAtLower) return alpha > 0.0;
        if (s == kAtUpper) return alpha < 0.0;
        return true;
      };
      double theta_max = kInf;
      for (std::size_t j = 0; j < cols_; ++j) {
        double alpha;
        if (!eligible(j, alpha)) continue;
        theta_max = std::min(theta_max, (std::abs(d_[j]) + options_.optimality_tol) / std::abs(alpha));
      }
      if (!std::isfinite(theta_max)) {
        ray_weights_.assign(m_, 0.0);
        ray_weights_[p] = 1.0;
        return LpStatus::kInfeasible;
      }
      std::size_t q = cols_;
      double best = 0.0;
      for (std::size_t j = 0; j < cols_; ++j) {
        double alpha;
        if (!eligible(j, alpha)) continue;
        if (std::abs(d_[j]) / std::abs(alpha) > theta_max) continue;
        if (std::abs(alpha) > best) {
          best = std::abs(alpha);
          q = j;
        }
      }
      ++iterations;
      ++total_iterations_;
      const double step = -(target - x_[b]) / prow[q];
      for (std::size_t i = 0; i < m_; ++i) {
        const double t = tableau_[i * cols_ + q];
        if (t != 0.0) x_[head_[i]] -= t * step;
      }
      x_[q] += step;
      x_[b] = target;
      state_[b] = (raise || lo_[b] == hi_[b]) ? kAtLower : kAtUpper;
      pivot(p, q);
      head_[p] = q;
      state_[q] = kBasic;
      (void)ftol;
    }
  }

  // Phase-1 gradient of the total bound violation w.r.t. each nonbasic.
  void compute_phase1_costs() {
    d_valid_ = false;
    d_.assign(cols_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      const std::size_t b = head_[i];
      double sigma = 0.0;
      if (x_[b] < lo_[b] - options_.feasibility_tol) sigma = -1.0;
      if (x_[b] > hi_[b] + options_.feasibility_tol) sigma = 1.0;
      if (sigma == 0.0) continue;
      const double* row = &tableau_[i * cols_];
      for (std::size_t j = 0; j < cols_; ++j) d_[j] -= sigma * row[j];
    }
    for (std::size_t i = 0; i < m_; ++i) d_[head_[i]] = 0.0;
  }

  // Entering column and its direction (+1 increase, -1 decrease); cols_ when
  // none qualifies.
  std::size_t price(double& direction, bool bland) const {
    const double tol = options_.optimality_tol;
    std::size_t best = cols_;
    double best_score = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) {
      const State s = state_[j];
      if (s == kBasic || lo_[j] == hi_[j]) continue;
      const double dj = d_[j];
      double dir = 0.0;
      if (s == kAtLower && dj < -tol) dir = 1.0;
      if (s == kAtUpper && dj > tol) dir = -1.0;
      if (s == kFree && std::abs(dj) > tol) dir = dj < 0 ? 1.0 : -1.0;
      if (dir == 0.0) continue;
      if (bland) {
        direction = dir;
        return j;
      }
      if (std::abs(dj) > best_score) {
        best_score = std::abs(dj);
        best = j;
        direction = dir;
      }
    }
    return best;
  }

  void pivot(std::size_t p, std::size_t q) {
    double* prow = &tableau_[p * cols_];
    const double inv = 1.0 / prow[q];
    nz_.clear();
    for (std::size_t j = 0; j < cols_; ++j) {
      if (prow[j] != 0.0) {
        prow[j] *= inv;
        nz_.push_back(j);
      }
    }
    prow[q] = 1.0;
    const bool dense = nz_.size() * 4 > cols_;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == p) continue;
      double* row = &tableau_[i * cols_];
      const double f = row[q];
      if (f == 0.0) continue;
      if (dense) {
        for (std::size_t j = 0; j < cols_; ++j) row[j] -= f * prow[j];
      } else {
        for (std::size_t j : nz_) row[j] -= f * prow[j];
      }
      row[q] = 0.0;
    }
    if (!d_.empty()) {
      const double f = d_[q];
      if (f != 0.0) {
        for (std::size_t j : nz_) d_[j] -= f * prow[j];
      }
      d_[q] = 0.0;
    }
    ++pivots_since_refactor_;
  }

  LpStatus iterate(std::size_t& iterations) {
    int degenerate_run = 0;
    bool phase2_costs = false;
    while (true) {
      if (iterations >= options_.max_iterations) return LpStatus::kIterationLimit;
      if (pivots_since_refactor_ >= options_.refactor_interval) {
        if (!reinvert()) cold_start();
        phase2_costs = false;
      }
      const bool feasible = max_basic_infeasibility() == 0.0;
      if (!feasible) {
        compute_phase1_costs();
        phase2_costs = false;
      } else if (!phase2_costs) {
        compute_reduced_costs();
        phase2_costs = true;
      }
      const bool bland = degenerate_run >= options_.degenerate_before_bland;
      double dir = 0.0;
      const std::size_t q = price(dir, bland);
      if (q == cols_) {
        if (feasible) return LpStatus::kOptimal;
        ray_weights_.assign(m_, 0.0);
        for (std::size_t i = 0; i < m_; ++i) {
          const std::size_t b = head_[i];
          if (x_[b] < lo_[b] - ftol_check()) ray_weights_[i] = 1.0;
          if (x_[b] > hi_[b] + ftol_check()) ray_weights_[i] = -1.0;
        }
        return LpStatus::kInfeasible;
      }

      // Ratio test.
      const double ftol = options_.feasibility_tol;
      double theta_max = kInf;
      // Pass 1: largest step keeping every basic within its (relaxed) target.
      std::size_t leave = m_;
      double leave_target = 0.0;
      auto block = [&](std::size_t i, double alpha, double relax, double& target) -> double {
        const std::size_t b = head_[i];
        const double xb = x_[b];
        const bool below = xb < lo_[b] - ftol;
        const bool above = xb > hi_[b] + ftol;
        if (below) {
          if (alpha <= 0.0) return kInf;
          target = lo_[b];
          return (lo_[b] - xb) / alpha;
        }
        if (above) {
          if (alpha >= 0.0) return kInf;
          target = hi_[b];
          return (hi_[b] - xb) / alpha;
        }
        if (alpha > 0.0 && std::isfinite(hi_[b])) {
          target = hi_[b];
          return (hi_[b] + relax - xb) / alpha;
        }
        if (alpha < 0.0 && std::isfinite(lo_[b])) {
          target = lo_[b];
          return (lo_[b] - relax - xb) / alpha;
        }
        return kInf;
      };
      for (std::size_t i = 0; i < m_; ++i) {
        const double t = tableau_[i * cols_ + q];
        if (std::abs(t) <= options_.pivot_tol) continue;
        double target;
        theta_max = std::min(theta_max, block(i, -t * dir, bland ? 0.0 : ftol, target));
      }
      // Pass 2: among rows blocking within theta_max, the largest |alpha|
      // (Bland: the lowest basic index).
      double best_alpha = 0.0;
      double theta = kInf;
      if (std::isfinite(theta_max)) {
        for (std::size_t i = 0; i < m_; ++i) {
          const double t = tableau_[i * cols_ + q];
          if (std::abs(t) <= options_.pivot_tol) continue;
          double target = 0.0;
          const double ratio = block(i, -t * dir, 0.0, target);
          if (ratio > theta_max) continue;
          bool take;
          if (bland) {
            take = leave == m_ || ratio < theta - 1e-15 || (ratio <= theta + 1e-15 && head_[i] < head_[leave]);
          } else {
            take = std::abs(t) > best_alpha;
          }
          if (take) {
            best_alpha = std::abs(t);
            leave = i;
            theta = ratio;
            leave_target = target;
          }
        }
        theta = std::max(theta, 0.0);
      }

      const double range = hi_[q] - lo_[q];
      ++iterations;
      ++total_iterations_;
      if (std::isfinite(range) && range <= theta) {
        // Bound flip, no basis change.
        shift_nonbasic(q, dir > 0 ? hi_[q] : lo_[q]);
        state_[q] = dir > 0 ? kAtUpper : kAtLower;
        degenerate_run = 0;
        continue;
      }
      if (leave == m_) {
        if (feasible) return LpStatus::kUnbounded;
        throw NumericalError("simplex: phase 1 found no blocking row");
      }

      degenerate_run = theta <= 1e-12 ? degenerate_run + 1 : 0;
      // Move entering variable, update basics, then swap.
      for (std::size_t i = 0; i < m_; ++i) {
        const double t = tableau_[i * cols_ + q];
        if (t != 0.0) x_[head_[i]] -= t * dir * theta;
      }
      x_[q] += dir * theta;
      const std::size_t out = head_[leave];
      x_[out] = leave_target;
      state_[out] = (leave_target == hi_[out] && lo_[out] != hi_[out]) ? kAtUpper : kAtLower;
      pivot(leave, q);
      head_[leave] = q;
      state_[q] = kBasic;
      if (!phase2_costs) d_.clear();
    }
  }

  // Rebuilds the tableau from the current basis: T = B^-1 [A | -I].
  // Returns false when B is numerically singular.
  bool reinvert() {
    // Gauss-Jordan on B, logical columns first; row operations only touch
    // the nonzeros of the pivot row.
    std::vector<double> work(m_ * m_, 0.0), inv(m_ * m_, 0.0);
    for (std::size_t k = 0; k < m_; ++k) {
      const std::size_t col = head_[k];
      if (col < n_) {
        for (const auto& e : columns_[col]) work[e.row * m_ + k] = e.value;
      } else {
        work[(col - n_) * m_ + k] = -1.0;
      }
      inv[k * m_ + k] = 1.0;
    }
    std::vector<std::size_t> order(m_);
    for (std::size_t k = 0; k < m_; ++k) order[k] = k;
    std::stable_partition(order.begin(), order.end(), [&](std::size_t k) { return head_[k] >= n_; });
    std::vector<char> pivoted(m_, 0);
    std::vector<std::size_t> pivot_row(m_);
    std::vector<std::size_t> wnz, inz;
    for (std::size_t c : order) {
      std::size_t piv = m_;
      double best = 0.0;
      for (std::size_t r = 0; r < m_; ++r) {
        if (pivoted[r]) continue;
        const double v = std::abs(work[r * m_ + c]);
        if (v > best) {
          best = v;
          piv = r;
        }
      }
      if (piv == m_ || best < 1e-11) return false;
      pivoted[piv] = 1;
      pivot_row[c] = piv;
      double* wp = &work[piv * m_];
      double* ip = &inv[piv * m_];
      const double f = 1.0 / wp[c];
      wnz.clear();
      inz.clear();
      for (std::size_t j = 0; j < m_; ++j) {
        if (wp[j] != 0.0) {
          wp[j] *= f;
          wnz.push_back(j);
        }
        if (ip[j] != 0.0) {
          ip[j] *= f;
          inz.push_back(j);
        }
      }
      for (std::size_t r = 0; r < m_; ++r) {
        if (r == piv) continue;
        double* wr = &work[r * m_];
        const double g = wr[c];
        if (g == 0.0) continue;
        for (std::size_t j : wnz) wr[j] -= g * wp[j];
        wr[c] = 0.0;
        double* ir = &inv[r * m_];
        for (std::size_t j : inz) ir[j] -= g * ip[j];
      }
    }
    // Row k of B^-1 sits in inv at the row that pivoted column k.
    {
      std::vector<double> ordered(m_ * m_);
      for (std::size_t k = 0; k < m_; ++k) {
        std::copy_n(&inv[pivot_row[k] * m_], m_, &ordered[k * m_]);
      }
      inv.swap(ordered);
    }
    // inv = B^-1 with rows indexed by basis position.
    for (std::size_t r = 0; r < m_; ++r) {
      double* row = &tableau_[r * cols_];
      const double* ir = &inv[r * m_];
      for (std::size_t j = 0; j < n_; ++j) {
        double acc = 0.0;
        for (const auto& e : columns_[j]) acc += ir[e.row] * e.value;
        row[j] = acc;
      }
      for (std::size_t k = 0; k < m_; ++k) row[n_ + k] = -ir[k];
      for (std::size_t j = 0; j < cols_; ++j) {
        if (std::abs(row[j]) < 1e-14) row[j] = 0.0;
      }
      row[head_[r]] = 1.0;
    }
    pivots_since_refactor_ = 0;
    d_valid_ = false;
    refresh_basic_values();
    return true;
  }

  LpOptions options_;
  std::size_t n_ = 0, m_ = 0, cols_ = 0;
  bool trivially_infeasible_ = false;
  std::vector<double> root_lo_, root_hi_;
  std::vector<std::vector<Entry>> columns_;  // scaled A, by column
  std::vector<double> row_scale_;
  std::vector<double> lo_, hi_, x_;
  std::vector<double> cost_raw_, cost_, d_;
  double cost_scale_ = 1.0;
  double offset_ = 0.0;
  std::vector<double> tableau_;
  std::vector<std::size_t> head_;
  std::vector<State> state_;
  std::vector<std::size_t> nz_;
  std::size_t pivots_since_refactor_ = 0;
  std::uint64_t total_iterations_ = 0;
  bool d_valid_ = false;
  std::vector<double> ray_weights_;
};

/// Solves the continuous relaxation of `model` from a cold start.
inline LpResult solve_lp(const MilpModel& model, const LpOptions& options = {}) {
  BoundedSimplex engine(model, options);
  return engine.solve();
}

}  // namespace freqsec

#endif  // FREQSEC_LP_SIMPLEX_HPP_
