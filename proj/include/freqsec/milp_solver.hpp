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

// LP-relaxation branch and bound over binary variables.

#ifndef FREQSEC_MILP_SOLVER_HPP_
#define FREQSEC_MILP_SOLVER_HPP_

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <memory>
#include <ostream>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "freqsec/errors.hpp"
#include "freqsec/lp_simplex.hpp"
#include "freqsec/milp_model.hpp"

namespace freqsec {

enum class Branching { kMostFractional, kPseudoCost };
enum class NodeOrder { kBestBound, kDepthFirst };

struct SolveConfig {
  double time_limit = 1000.0;  // s
  std::uint64_t node_limit = std::numeric_limits<std::uint64_t>::max();
  double mip_gap_target = 0.0;
  Branching branching = Branching::kMostFractional;
  NodeOrder node_order = NodeOrder::kBestBound;
  double integrality_tol = 1e-6;
  bool dive_heuristic = true;
  std::uint64_t dive_interval = 500;  // nodes between dives after the root
  std::ostream* log = nullptr;
  std::uint64_t log_interval = 100;  // nodes between log lines
  // Optional partial assignments, each a list of (binary variable index,
  // value), tried in order before the search.
  std::vector<std::vector<std::pair<std::size_t, double>>> starts;
  LpOptions lp;
};

enum class MilpStatus { kOptimal, kFeasibleLimitHit, kNoSolutionLimitHit, kInfeasible, kUnbounded };

inline std::string to_string(MilpStatus s) {
  switch (s) {
    case MilpStatus::kOptimal:
      return "optimal";
    case MilpStatus::kFeasibleLimitHit:
      return "feasible-limit-hit";
    case MilpStatus::kNoSolutionLimitHit:
      return "no-solution-limit-hit";
    case MilpStatus::kInfeasible:
      return "infeasible";
    case MilpStatus::kUnbounded:
      return "unbounded";
  }
  return "?";
}

struct GapSample {
  std::uint64_t nodes = 0;
  double time_s = 0.0;
  double bound = 0.0;
  double incumbent = kInf;
  double gap = kInf;
};

struct MilpResult {
  MilpStatus status = MilpStatus::kInfeasible;
  std::vector<double> x;  // incumbent, empty without one
  double objective = kInf;
  double best_bound = -kInf;
  double mip_gap = kInf;
  std::uint64_t nodes = 0;
  std::uint64_t abandoned_nodes = 0;
  std::uint64_t lp_iterations = 0;
  double wall_time = 0.0;  // s
  bool deterministic = true;
  std::vector<GapSample> gap_history;

  bool has_incumbent() const { return !x.empty(); }
};

inline void validate(const SolveConfig& cfg) {
  std::vector<std::string> bad;
  if (!(cfg.time_limit > 0.0)) bad.push_back("SolveConfig: time_limit must be > 0");
  if (cfg.node_limit == 0) bad.push_back("SolveConfig: node_limit must be > 0");
  if (!(cfg.mip_gap_target >= 0.0 && cfg.mip_gap_target < 1.0)) {
    bad.push_back("SolveConfig: mip_gap_target must be in [0,1)");
  }
  if (!(cfg.integrality_tol > 0.0 && cfg.integrality_tol < 0.5)) {
    bad.push_back("SolveConfig: integrality_tol must be in (0,0.5)");
  }
  if (cfg.log_interval == 0) bad.push_back("SolveConfig: log_interval must be > 0");
  if (!bad.empty()) throw ValidationError(std::move(bad));
}

inline double relative_gap(double objective, double bound) {
  if (!std::isfinite(objective)) return kInf;
  if (!std::isfinite(bound)) return kInf;
  return std::max(0.0, (objective - bound) / std::max(std::abs(objective), 1e-9));
}

namespace detail {

struct BbNode {
  std::uint64_t id = 0;
  std::uint32_t depth = 0;
  double bound = -kInf;  // parent LP objective
  std::vector<std::pair<std::uint32_t, std::uint8_t>> fixings;  // (binary slot, value)
  std::int64_t branch_slot = -1;
  double branch_frac = 0.0;  // parent's fractional value
};

struct BestBoundOrder {
  bool operator()(const std::shared_ptr<BbNode>& a, const std::shared_ptr<BbNode>& b) const {
    if (a->bound != b->bound) return a->bound > b->bound;
    if (a->depth != b->depth) return a->depth < b->depth;
    return a->id > b->id;
  }
};

class BranchAndBound {
 public:
  BranchAndBound(const MilpModel& model, const SolveConfig& cfg)
      : model_(model), cfg_(cfg), engine_(std::make_unique<BoundedSimplex>(model, cfg.lp)) {
    for (std::size_t j = 0; j < model.num_variables(); ++j) {
      if (model.variables()[j].kind == VarKind::kBinary) binaries_.push_back(j);
    }
    pc_sum_.assign(binaries_.size(), {0.0, 0.0});
    pc_count_.assign(binaries_.size(), {0, 0});
    applied_lo_.resize(binaries_.size());
    applied_hi_.resize(binaries_.size());
    for (std::size_t s = 0; s < binaries_.size(); ++s) {
      applied_lo_[s] = engine_->lower(binaries_[s]);
      applied_hi_[s] = engine_->upper(binaries_[s]);
    }
  }

  MilpResult run() {
    start_ = std::chrono::steady_clock::now();
    MilpResult res;

    auto root = std::make_shared<BbNode>();
    root->id = next_id_++;
    push(root);

    try_start();
    bool limit_hit = false;
    bool unbounded = false;
    while (open_size() > 0) {
      processing_bound_ = kInf;
      if (nodes_ >= cfg_.node_limit || elapsed() >= cfg_.time_limit) {
        limit_hit = true;
        break;
      }
      if (has_incumbent() && relative_gap(incumbent_obj_, global_bound()) <= cfg_.mip_gap_target) break;

      auto node = pop();
      if (has_incumbent() && prunable(node->bound)) continue;
      ++nodes_;
      processing_bound_ = node->bound;

      LpResult lp;
      try {
        apply(*node);
        lp = engine_->solve();
      } catch (const NumericalError&) {
        ++abandoned_;
        abandoned_bound_ = std::min(abandoned_bound_, node->bound);
        rebuild_engine();
        continue;
      }

      if (lp.status == LpStatus::kUnbounded) {
        unbounded = true;
        break;
      }
      if (lp.status == LpStatus::kIterationLimit) {
        ++abandoned_;
        abandoned_bound_ = std::min(abandoned_bound_, node->bound);
        continue;
      }
      if (lp.status == LpStatus::kInfeasible) {
        maybe_log(false);
        continue;
      }
      update_pseudocost(*node, lp.objective);
      if (has_incumbent() && prunable(lp.objective)) {
        maybe_log(false);
        continue;
      }

      const std::int64_t slot = select_branch(lp.x);
      if (slot < 0) {
        offer_incumbent(lp.x);
        maybe_log(false);
        continue;
      }
      if (cfg_.dive_heuristic && (nodes_ == 1 || nodes_ % cfg_.dive_interval == 0)) dive(lp);

      const double value = lp.x[binaries_[static_cast<std::size_t>(slot)]];
      const double frac = value - std::floor(value);
      auto down = child(*node, slot, 0, lp.objective, frac);
      auto up = child(*node, slot, 1, lp.objective, frac);
      // Depth-first explores the nearer rounding first (pushed last).
      if (frac >= 0.5) {
        push(down);
        push(up);
      } else {
        push(up);
        push(down);
      }
      maybe_log(false);
    }

    processing_bound_ = kInf;
    res.nodes = nodes_;
    res.abandoned_nodes = abandoned_;
    res.lp_iterations = lp_iterations_ + engine_->total_iterations();
    if (unbounded) {
      res.status = MilpStatus::kUnbounded;
      res.wall_time = elapsed();
      return res;
    }
    const double bound = global_bound();
    if (has_incumbent()) {
      res.x = incumbent_;
      res.objective = incumbent_obj_;
      res.best_bound = std::min(bound, incumbent_obj_);
      res.mip_gap = relative_gap(res.objective, res.best_bound);
      res.status = res.mip_gap <= cfg_.mip_gap_target ? MilpStatus::kOptimal : MilpStatus::kFeasibleLimitHit;
      if (!limit_hit && open_size() == 0 && !std::isfinite(abandoned_bound_)) {
        res.best_bound = incumbent_obj_;
        res.mip_gap = 0.0;
        res.status = MilpStatus::kOptimal;
      }
    } else {
      res.best_bound = bound;
      res.status = (limit_hit || std::isfinite(abandoned_bound_)) ? MilpStatus::kNoSolutionLimitHit
                                                                   : MilpStatus::kInfeasible;
    }
    maybe_log(true);
    res.gap_history = history_;
    res.wall_time = elapsed();
    return res;
  }

 private:
  using NodePtr = std::shared_ptr<BbNode>;

  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

  bool has_incumbent() const { return !incumbent_.empty(); }

  bool prunable(double bound) const {
    const double slack = std::max(cfg_.mip_gap_target * std::max(std::abs(incumbent_obj_), 1e-9),
                                  1e-9 * std::max(1.0, std::abs(incumbent_obj_)));
    return bound >= incumbent_obj_ - slack;
  }

  std::size_t open_size() const { return cfg_.node_order == NodeOrder::kBestBound ? heap_.size() : stack_.size(); }

  void push(NodePtr n) {
    if (cfg_.node_order == NodeOrder::kBestBound) {
      heap_.push(std::move(n));
    } else {
      stack_.push_back(std::move(n));
    }
  }

  NodePtr pop() {
    NodePtr n;
    if (cfg_.node_order == NodeOrder::kBestBound) {
      n = heap_.top();
      heap_.pop();
    } else {
      n = stack_.back();
      stack_.pop_back();
    }
    return n;
  }

  // Smallest bound among open nodes and abandoned subtrees.
  double global_bound() const {
    double b = std::min(abandoned_bound_, processing_bound_);
    if (cfg_.node_order == NodeOrder::kBestBound) {
      if (!heap_.empty()) b = std::min(b, heap_.top()->bound);
    } else {
      for (const auto& n : stack_) b = std::min(b, n->bound);
    }
    if (!std::isfinite(b) && b > 0) return has_incumbent() ? incumbent_obj_ : kInf;
    return b;
  }

  NodePtr child(const BbNode& parent, std::int64_t slot, std::uint8_t value, double bound, double frac) {
    auto n = std::make_shared<BbNode>();
    n->id = next_id_++;
    n->depth = parent.depth + 1;
    n->bound = bound;
    n->fixings = parent.fixings;
    n->fixings.emplace_back(static_cast<std::uint32_t>(slot), value);
    n->branch_slot = slot;
    n->branch_frac = frac;
    return n;
  }

  void set_slot(std::size_t s, double lo, double hi) {
    if (applied_lo_[s] == lo && applied_hi_[s] == hi) return;
    applied_lo_[s] = lo;
    applied_hi_[s] = hi;
    engine_->set_bounds(binaries_[s], lo, hi);
  }

  void apply(const BbNode& node) {
    target_lo_.resize(binaries_.size());
    target_hi_.resize(binaries_.size());
    for (std::size_t s = 0; s < binaries_.size(); ++s) {
      target_lo_[s] = engine_->root_lower(binaries_[s]);
      target_hi_[s] = engine_->root_upper(binaries_[s]);
    }
    for (const auto& [s, v] : node.fixings) {
      target_lo_[s] = std::max(target_lo_[s], static_cast<double>(v));
      target_hi_[s] = std::min(target_hi_[s], static_cast<double>(v));
    }
    for (std::size_t s = 0; s < binaries_.size(); ++s) set_slot(s, target_lo_[s], target_hi_[s]);
  }

  void rebuild_engine() {
    lp_iterations_ += engine_->total_iterations();
    engine_ = std::make_unique<BoundedSimplex>(model_, cfg_.lp);
    reset_applied();
  }

  void reset_applied() {
    for (std::size_t s = 0; s < binaries_.size(); ++s) {
      applied_lo_[s] = engine_->lower(binaries_[s]);
      applied_hi_[s] = engine_->upper(binaries_[s]);
    }
  }

  double fractionality(double v) const { return std::abs(v - std::round(v)); }

  // Branching slot, or -1 when every binary is integral.
  std::int64_t select_branch(const std::vector<double>& x) const {
    std::int64_t best = -1;
    double best_score = -1.0;
    double mean_down = 0.0, mean_up = 0.0;
    if (cfg_.branching == Branching::kPseudoCost) {
      double sd = 0.0, su = 0.0;
      std::size_t cd = 0, cu = 0;
      for (std::size_t s = 0; s < binaries_.size(); ++s) {
        if (pc_count_[s][0] > 0) {
          sd += pc_sum_[s][0] / static_cast<double>(pc_count_[s][0]);
          ++cd;
        }
        if (pc_count_[s][1] > 0) {
          su += pc_sum_[s][1] / static_cast<double>(pc_count_[s][1]);
          ++cu;
        }
      }
      mean_down = cd > 0 ? sd / static_cast<double>(cd) : 1.0;
      mean_up = cu > 0 ? su / static_cast<double>(cu) : 1.0;
    }
    for (std::size_t s = 0; s < binaries_.size(); ++s) {
      const double v = x[binaries_[s]];
      if (fractionality(v) <= cfg_.integrality_tol) continue;
      double score;
      if (cfg_.branching == Branching::kMostFractional) {
        score = fractionality(v);
      } else {
        const double f = v - std::floor(v);
        const double pd = pc_count_[s][0] > 0 ? pc_sum_[s][0] / static_cast<double>(pc_count_[s][0]) : mean_down;
        const double pu = pc_count_[s][1] > 0 ? pc_sum_[s][1] / static_cast<double>(pc_count_[s][1]) : mean_up;
        score = std::max(pd * f, 1e-6) * std::max(pu * (1.0 - f), 1e-6);
      }
      if (score > best_score) {
        best_score = score;
        best = static_cast<std::int64_t>(s);
      }
    }
    return best;
  }

  void update_pseudocost(const BbNode& node, double objective) {
    if (node.branch_slot < 0) return;
    const auto s = static_cast<std::size_t>(node.branch_slot);
    const int dir = node.fixings.back().second;
    const double change = dir == 0 ? node.branch_frac : 1.0 - node.branch_frac;
    if (change <= 0.0) return;
    pc_sum_[s][dir] += std::max(0.0, objective - node.bound) / change;
    ++pc_count_[s][dir];
  }

  // Snaps binaries, re-solving the continuous part when snapping moved any
  // of them, and keeps the point if it beats the incumbent.
  void offer_incumbent(std::vector<double> x) {
    bool moved = false;
    for (std::size_t j : binaries_) {
      const double r = std::round(x[j]);
      if (x[j] != r) moved = true;
      x[j] = r;
    }
    if (moved) {
      std::vector<double> lo(binaries_.size()), hi(binaries_.size());
      for (std::size_t s = 0; s < binaries_.size(); ++s) {
        lo[s] = applied_lo_[s];
        hi[s] = applied_hi_[s];
        set_slot(s, x[binaries_[s]], x[binaries_[s]]);
      }
      LpResult fixed = engine_->solve();
      for (std::size_t s = 0; s < binaries_.size(); ++s) set_slot(s, lo[s], hi[s]);
      if (fixed.status != LpStatus::kOptimal) return;
      x = std::move(fixed.x);
      for (std::size_t j : binaries_) x[j] = std::round(x[j]);
    }
    const double obj = model_.evaluate_objective(x);
    if (has_incumbent() && obj >= incumbent_obj_) return;
    incumbent_ = std::move(x);
    incumbent_obj_ = obj;
    maybe_log(true);
  }

  // Repeatedly fixes the least fractional binary at its rounding until the
  // relaxation is integral; an infeasible fixing is flipped once before the
  // dive gives up. Its LPs are not counted as nodes.
  void dive(const LpResult& start) {
    const auto saved_lo = applied_lo_;
    const auto saved_hi = applied_hi_;
    LpResult lp = start;
    std::size_t guard = 0;
    try {
      while (guard++ <= binaries_.size() && elapsed() < cfg_.time_limit) {
        if (has_incumbent() && prunable(lp.objective)) break;
        std::int64_t pick = -1;
        double closest = 1.0;
        for (std::size_t s = 0; s < binaries_.size(); ++s) {
          const double f = fractionality(lp.x[binaries_[s]]);
          if (f <= cfg_.integrality_tol) continue;
          if (f < closest) {
            closest = f;
            pick = static_cast<std::int64_t>(s);
          }
        }
        if (pick < 0) {
          offer_incumbent(lp.x);
          break;
        }
        const auto s = static_cast<std::size_t>(pick);
        const double r = std::round(lp.x[binaries_[s]]);
        set_slot(s, r, r);
        lp = engine_->solve();
        if (lp.status == LpStatus::kOptimal) continue;
        set_slot(s, 1.0 - r, 1.0 - r);
        lp = engine_->solve();
        if (lp.status != LpStatus::kOptimal) break;
      }
    } catch (const NumericalError&) {
      rebuild_engine();
      return;
    }
    for (std::size_t s = 0; s < binaries_.size(); ++s) set_slot(s, saved_lo[s], saved_hi[s]);
  }

  // Fixes the hinted binaries of every start, solves, and dives from there.
  void try_start() {
    if (cfg_.starts.empty()) return;
    std::vector<std::int64_t> slot_of(model_.num_variables(), -1);
    for (std::size_t s = 0; s < binaries_.size(); ++s) slot_of[binaries_[s]] = static_cast<std::int64_t>(s);
    for (const auto& hint : cfg_.starts) {
      for (const auto& [j, value] : hint) {
        if (j >= slot_of.size() || slot_of[j] < 0) throw ValidationError({"SolveConfig: start entry is not a binary"});
      }
    }
    const auto saved_lo = applied_lo_;
    const auto saved_hi = applied_hi_;
    for (const auto& hint : cfg_.starts) {
      bool usable = true;
      for (const auto& [j, value] : hint) {
        const double r = std::round(value);
        if (r < engine_->root_lower(j) || r > engine_->root_upper(j)) usable = false;
      }
      if (!usable) continue;
      for (const auto& [j, value] : hint) {
        const double r = std::round(value);
        set_slot(static_cast<std::size_t>(slot_of[j]), r, r);
      }
      try {
        const LpResult lp = engine_->solve();
        if (lp.status == LpStatus::kOptimal) dive(lp);
      } catch (const NumericalError&) {
        rebuild_engine();
        continue;
      }
      for (std::size_t s = 0; s < binaries_.size(); ++s) set_slot(s, saved_lo[s], saved_hi[s]);
    }
  }

  void maybe_log(bool force) {
    const bool due = nodes_ % cfg_.log_interval == 0 && nodes_ != last_logged_;
    if (!force && !due) return;
    last_logged_ = nodes_;
    GapSample g;
    g.nodes = nodes_;
    g.time_s = elapsed();
    g.incumbent = has_incumbent() ? incumbent_obj_ : kInf;
    g.bound = std::min(global_bound(), g.incumbent);
    g.gap = relative_gap(g.incumbent, g.bound);
    history_.push_back(g);
    if (cfg_.log) {
      char buf[256];
      std::snprintf(buf, sizeof buf, "node,%llu,bound,%.10g,incumbent,%.10g,gap,%.6g,time_s,%.3f\n",
                    static_cast<unsigned long long>(g.nodes), g.bound, g.incumbent, g.gap, g.time_s);
      *cfg_.log << buf;
    }
  }

  const MilpModel& model_;
  SolveConfig cfg_;
  std::unique_ptr<BoundedSimplex> engine_;
  std::vector<std::size_t> binaries_;
  std::vector<double> applied_lo_, applied_hi_, target_lo_, target_hi_;
  std::vector<std::array<double, 2>> pc_sum_;
  std::vector<std::array<std::uint64_t, 2>> pc_count_;
  std::priority_queue<NodePtr, std::vector<NodePtr>, BestBoundOrder> heap_;
  std::vector<NodePtr> stack_;
  std::uint64_t next_id_ = 0;
  std::uint64_t nodes_ = 0;
  std::uint64_t abandoned_ = 0;
  std::uint64_t lp_iterations_ = 0;
  std::uint64_t last_logged_ = std::numeric_limits<std::uint64_t>::max();
  double abandoned_bound_ = kInf;
  double processing_bound_ = kInf;
  std::vector<double> incumbent_;
  double incumbent_obj_ = kInf;
  std::vector<GapSample> history_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace detail

/// Branch and bound on the binaries of `model` (minimisation).
inline MilpResult solve_milp(const MilpModel& model, const SolveConfig& cfg = {}) {
  validate(cfg);
  detail::BranchAndBound bb(model, cfg);
  return bb.run();
}

}  // namespace freqsec

#endif  // FREQSEC_MILP_SOLVER_HPP_
