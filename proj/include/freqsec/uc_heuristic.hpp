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

// Start hints for the unit-commitment MILP.
//
// Every commitment pattern of a single step is priced by solving that step
// alone (dispatch plus, optionally, the frequency blocks). Dynamic
// programming over per-unit up/down counters then chains the cheapest
// patterns under minimum up/down times and startup costs. Ramp limits are
// not seen by the chain, so the plan is only a hint for the full model.

#ifndef FREQSEC_UC_HEURISTIC_HPP_
#define FREQSEC_UC_HEURISTIC_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "freqsec/errors.hpp"
#include "freqsec/milp_encode.hpp"
#include "freqsec/milp_model.hpp"
#include "freqsec/milp_solver.hpp"
#include "freqsec/mlp.hpp"
#include "freqsec/system_model.hpp"
#include "freqsec/uc_model.hpp"

namespace freqsec {

inline constexpr std::size_t kMaxPlanUnits = 12;
inline constexpr std::size_t kMaxPlanStates = 1u << 20;

/// Frequency blocks to include when pricing a step; absent for plain UC.
struct PlanPredictor {
  const MlpParams* params = nullptr;
  const ActivationBounds* bounds = nullptr;
  double y_floor = -kInf;
};

struct CommitmentPlan {
  std::vector<std::vector<int>> u;  // [g][t]
  double estimated_cost = 0.0;
  // Binary values of the priced step solutions, renamed to their step, with
  // startup variables left out.
  std::vector<std::pair<std::string, double>> binaries;
};

namespace detail {

inline std::string restep(const std::string& name, std::size_t t) {
  const auto at = name.rfind("_t0");
  if (at == std::string::npos || at + 3 != name.size()) return name;
  return name.substr(0, at) + "_t" + std::to_string(t);
}

}  // namespace detail

/// Returns nothing when no chain of feasible patterns exists, or when the
/// system is too large to enumerate (more than kMaxPlanUnits units or
/// kMaxPlanStates counter states).
inline std::optional<CommitmentPlan> plan_commitment(const SystemSpec& spec, const PlanPredictor& predictor = {},
                                                     SolveConfig step_cfg = {}) {
  validate(spec);
  const std::size_t ng = spec.num_generators();
  const std::size_t nt = spec.horizon();
  if (ng > kMaxPlanUnits) return std::nullopt;
  std::vector<std::size_t> radix(ng);
  std::size_t num_states = 1;
  for (std::size_t g = 0; g < ng; ++g) {
    radix[g] = static_cast<std::size_t>(spec.generators[g].min_up + spec.generators[g].min_down);
    num_states *= radix[g];
    if (num_states > kMaxPlanStates) return std::nullopt;
  }
  const std::size_t num_masks = std::size_t{1} << ng;
  step_cfg.log = nullptr;
  step_cfg.starts.clear();

  // Step costs and binary assignments per pattern.
  std::vector<std::vector<double>> step_cost(nt, std::vector<double>(num_masks, kInf));
  std::vector<std::vector<std::vector<std::pair<std::string, double>>>> step_bins(
      nt, std::vector<std::vector<std::pair<std::string, double>>>(num_masks));
  for (std::size_t t = 0; t < nt; ++t) {
    SystemSpec one = spec;
    one.load_profile = {spec.load_profile[t]};
    for (auto& gen : one.generators) gen.min_up = gen.min_down = 1;
    MilpModel model = build_uc(one);
    if (predictor.params != nullptr) {
      const ActivationBounds bounds =
          predictor.bounds != nullptr ? *predictor.bounds : compute_activation_bounds(*predictor.params);
      model = attach_frequency_constraints(std::move(model), one, *predictor.params, bounds, predictor.y_floor);
    }
    for (std::size_t mask = 1; mask < num_masks; ++mask) {
      double lo = 0.0, hi = 0.0;
      for (std::size_t g = 0; g < ng; ++g) {
        if ((mask >> g) & 1u) {
          lo += spec.generators[g].p_min;
          hi += spec.generators[g].p_max;
        }
      }
      if (lo > spec.load_profile[t] || hi < spec.load_profile[t]) continue;
      MilpModel fixed = model;
      for (std::size_t g = 0; g < ng; ++g) {
        const double on = static_cast<double>((mask >> g) & 1u);
        fixed.set_bounds(fixed.at(names::u(g, 0)), on, on);
      }
      const MilpResult res = solve_milp(fixed, step_cfg);
      if (!res.has_incumbent()) continue;
      step_cost[t][mask] = res.objective;
      for (std::size_t j = 0; j < fixed.num_variables(); ++j) {
        const auto& var = fixed.variables()[j];
        if (var.kind != VarKind::kBinary || var.name.rfind("v_", 0) == 0) continue;
        step_bins[t][mask].emplace_back(detail::restep(var.name, t), std::round(res.x[j]));
      }
    }
  }

  // Unit counter state s: s < UT is "on for s+1 steps", otherwise "off for
  // s-UT+1 steps", both saturating. Units start off and free to start.
  auto unit_state = [&](std::size_t state, std::size_t g) {
    for (std::size_t k = 0; k < g; ++k) state /= radix[k];
    return state % radix[g];
  };
  std::size_t initial = 0;
  for (std::size_t g = ng; g-- > 0;) initial = initial * radix[g] + (radix[g] - 1);

  std::vector<double> value(num_states, kInf), next_value(num_states);
  std::vector<std::vector<std::uint32_t>> parent(nt, std::vector<std::uint32_t>(num_states));
  std::vector<std::vector<std::uint32_t>> choice(nt, std::vector<std::uint32_t>(num_states));
  value[initial] = 0.0;
  for (std::size_t t = 0; t < nt; ++t) {
    std::fill(next_value.begin(), next_value.end(), kInf);
    for (std::size_t state = 0; state < num_states; ++state) {
      if (!std::isfinite(value[state])) continue;
      for (std::size_t mask = 1; mask < num_masks; ++mask) {
        if (!std::isfinite(step_cost[t][mask])) continue;
        double cost = value[state] + step_cost[t][mask];
        std::size_t next = 0, weight = 1;
        bool allowed = true;
        for (std::size_t g = 0; g < ng && allowed; ++g) {
          const auto& gen = spec.generators[g];
          const auto up = static_cast<std::size_t>(gen.min_up);
          const auto down = static_cast<std::size_t>(gen.min_down);
          const std::size_t s = unit_state(state, g);
          const bool on_now = s < up;
          const bool on_next = (mask >> g) & 1u;
          std::size_t ns;
          if (on_now && on_next) {
            ns = std::min(s + 1, up - 1);
          } else if (on_now) {
            allowed = s + 1 >= up;
            ns = up;
          } else if (on_next) {
            allowed = s - up + 1 >= down;
            ns = 0;
            if (t >= 1) cost += gen.cost_startup;
          } else {
            ns = std::min(s + 1, up + down - 1);
          }
          next += ns * weight;
          weight *= radix[g];
        }
        if (!allowed || cost >= next_value[next]) continue;
        next_value[next] = cost;
        parent[t][next] = static_cast<std::uint32_t>(state);
        choice[t][next] = static_cast<std::uint32_t>(mask);
      }
    }
    value.swap(next_value);
  }

  std::size_t best = 0;
  for (std::size_t state = 1; state < num_states; ++state) {
    if (value[state] < value[best]) best = state;
  }
  if (!std::isfinite(value[best])) return std::nullopt;

  CommitmentPlan plan;
  plan.estimated_cost = value[best];
  plan.u.assign(ng, std::vector<int>(nt, 0));
  std::size_t state = best;
  for (std::size_t t = nt; t-- > 0;) {
    const std::size_t mask = choice[t][state];
    for (std::size_t g = 0; g < ng; ++g) plan.u[g][t] = static_cast<int>((mask >> g) & 1u);
    plan.binaries.insert(plan.binaries.end(), step_bins[t][mask].begin(), step_bins[t][mask].end());
    state = parent[t][state];
  }
  return plan;
}

/// Start hints for `model`: the plan's full binary assignment (startup
/// variables derived from the commitments), then its commitments alone.
inline std::vector<std::vector<std::pair<std::size_t, double>>> plan_hints(const MilpModel& model,
                                                                           const SystemSpec& spec,
                                                                           const CommitmentPlan& plan) {
  auto commitments = commitment_hint(model, spec, plan.u);
  std::vector<std::pair<std::size_t, double>> full;
  for (const auto& [name, value] : plan.binaries) {
    if (auto id = model.find(name)) full.emplace_back(id->index, value);
  }
  for (std::size_t g = 0; g < spec.num_generators(); ++g) {
    for (std::size_t t = 0; t < spec.horizon(); ++t) {
      const int started = plan.u[g][t] == 1 && (t == 0 || plan.u[g][t - 1] == 0);
      full.emplace_back(model.at(names::v(g, t)).index, started);
    }
  }
  return {std::move(full), std::move(commitments)};
}

}  // namespace freqsec

#endif  // FREQSEC_UC_HEURISTIC_HPP_
