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

// Unit-commitment MILP and frequency-security attachments.
//
// Variables (0-based g, t): u_g*_t* commitment, v_g*_t* startup, p_g*_t*
// dispatch in MW. Every unit is offline before the first step.

#ifndef FREQSEC_UC_MODEL_HPP_
#define FREQSEC_UC_MODEL_HPP_

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "freqsec/errors.hpp"
#include "freqsec/milp_encode.hpp"
#include "freqsec/milp_model.hpp"
#include "freqsec/mlp.hpp"
#include "freqsec/system_model.hpp"

namespace freqsec {

struct UcSolution {
  std::vector<std::vector<int>> u;     // [g][t]
  std::vector<std::vector<int>> v;     // [g][t]
  std::vector<std::vector<double>> p;  // [g][t], MW
  double total_cost = 0.0;
  std::vector<double> nadir_pred;  // Hz per step; empty without frequency constraints

  std::size_t num_generators() const { return u.size(); }
  std::size_t horizon() const { return u.empty() ? 0 : u.front().size(); }

  int committed_units(std::size_t t) const {
    int n = 0;
    for (const auto& row : u) n += row[t];
    return n;
  }

  int committed_unit_hours() const {
    int n = 0;
    for (std::size_t t = 0; t < horizon(); ++t) n += committed_units(t);
    return n;
  }
};

/// Plain UC: costs, balance, capacity, ramping, startup logic and minimum
/// up/down times.
inline MilpModel build_uc(const SystemSpec& spec) {
  validate(spec);
  const std::size_t ng = spec.num_generators();
  const std::size_t nt = spec.horizon();
  double capacity = 0.0;
  for (const auto& g : spec.generators) capacity += g.p_max;
  for (std::size_t t = 0; t < nt; ++t) {
    if (spec.load_profile[t] > capacity) {
      throw InfeasibleModelError("uc: load " + std::to_string(spec.load_profile[t]) + " MW at step " +
                                 std::to_string(t) + " exceeds total capacity " + std::to_string(capacity) + " MW");
    }
  }

  MilpModel m;
  std::vector<std::vector<VarId>> u(ng), v(ng), p(ng);
  for (std::size_t t = 0; t < nt; ++t) {
    for (std::size_t g = 0; g < ng; ++g) {
      const auto& gen = spec.generators[g];
      u[g].push_back(m.add_binary(names::u(g, t)));
      v[g].push_back(m.add_binary(names::v(g, t)));
      p[g].push_back(m.add_continuous(names::p(g, t), 0.0, gen.p_max));
      m.set_objective(u[g][t], gen.cost_fixed);
      m.set_objective(p[g][t], gen.cost_marginal);
      if (t >= 1) m.set_objective(v[g][t], gen.cost_startup);
    }
  }

  for (std::size_t t = 0; t < nt; ++t) {
    const std::string ts = "_t" + std::to_string(t);
    std::vector<Term> balance;
    for (std::size_t g = 0; g < ng; ++g) balance.push_back({p[g][t], 1.0});
    m.add_constraint("balance" + ts, std::move(balance), Sense::kEqual, spec.load_profile[t]);

    for (std::size_t g = 0; g < ng; ++g) {
      const auto& gen = spec.generators[g];
      const std::string gs = "_g" + std::to_string(g) + ts;
      m.add_constraint("cap_lo" + gs, {{p[g][t], 1.0}, {u[g][t], -gen.p_min}}, Sense::kGreaterEqual, 0.0);
      m.add_constraint("cap_hi" + gs, {{p[g][t], 1.0}, {u[g][t], -gen.p_max}}, Sense::kLessEqual, 0.0);

      if (t == 0) {
        m.add_constraint("start" + gs, {{v[g][t], 1.0}, {u[g][t], -1.0}}, Sense::kEqual, 0.0);
      } else {
        m.add_constraint("start" + gs, {{v[g][t], 1.0}, {u[g][t], -1.0}, {u[g][t - 1], 1.0}}, Sense::kGreaterEqual,
                         0.0);
        m.add_constraint("start_on" + gs, {{v[g][t], 1.0}, {u[g][t], -1.0}}, Sense::kLessEqual, 0.0);
        m.add_constraint("start_off" + gs, {{v[g][t], 1.0}, {u[g][t - 1], 1.0}}, Sense::kLessEqual, 1.0);
        m.add_constraint("ramp_up" + gs,
                         {{p[g][t], 1.0}, {p[g][t - 1], -1.0}, {u[g][t - 1], gen.p_max - gen.ramp_up}},
                         Sense::kLessEqual, gen.p_max);
        m.add_constraint("ramp_dn" + gs,
                         {{p[g][t - 1], 1.0}, {p[g][t], -1.0}, {u[g][t], gen.p_max - gen.ramp_down}},
                         Sense::kLessEqual, gen.p_max);
      }

      const auto up = static_cast<std::size_t>(gen.min_up);
      if (up > 1) {
        std::vector<Term> window{{u[g][t], -1.0}};
        for (std::size_t k = t + 1 >= up ? t + 1 - up : 0; k <= t; ++k) window.push_back({v[g][k], 1.0});
        m.add_constraint("min_up" + gs, std::move(window), Sense::kLessEqual, 0.0);
      }
      const auto down = static_cast<std::size_t>(gen.min_down);
      if (down > 1 && t >= down) {
        std::vector<Term> window{{u[g][t - down], 1.0}};
        for (std::size_t k = t + 1 - down; k <= t; ++k) window.push_back({v[g][k], 1.0});
        m.add_constraint("min_dn" + gs, std::move(window), Sense::kLessEqual, 1.0);
      }
    }
  }
  return m;
}

/// Appends feature link, network and nadir floor blocks for every step.
/// Pass -inf as `y_floor` to encode the predictor without constraining it.
inline MilpModel attach_frequency_constraints(MilpModel model, const SystemSpec& spec, const MlpParams& params,
                                              const ActivationBounds& bounds, double y_floor) {
  const std::size_t ng = spec.num_generators();
  if (params.topology.input_dim != 2 * ng) {
    throw DimensionError("frequency constraints: network expects " + std::to_string(params.topology.input_dim) +
                         " inputs, system has " + std::to_string(ng) + " generators (needs " +
                         std::to_string(2 * ng) + ")");
  }
  for (std::size_t t = 0; t < spec.horizon(); ++t) {
    merge_block(model, encode_feature_link(spec, t));
    merge_block(model, attach_nadir_limit(encode_network(params, bounds, t), y_floor));
  }
  return model;
}

inline MilpModel attach_frequency_constraints(MilpModel model, const SystemSpec& spec, const MlpParams& params,
                                              const ActivationBounds& bounds) {
  return attach_frequency_constraints(std::move(model), spec, params, bounds, spec.nadir_limit);
}

/// Reads typed schedules out of a full variable assignment.
inline UcSolution extract_solution(const MilpModel& model, const SystemSpec& spec, const std::vector<double>& x,
                                   double integrality_tol = 1e-6) {
  if (x.size() != model.num_variables()) {
    throw DimensionError("extract_solution: assignment has " + std::to_string(x.size()) + " values, model has " +
                         std::to_string(model.num_variables()));
  }
  std::vector<double> assigned = x;
  for (std::size_t j = 0; j < model.num_variables(); ++j) {
    if (model.variables()[j].kind != VarKind::kBinary) continue;
    const double r = std::round(x[j]);
    if (std::abs(x[j] - r) > integrality_tol) {
      throw IntegralityError("extract_solution: binary '" + model.variables()[j].name + "' = " +
                             std::to_string(x[j]));
    }
    assigned[j] = r;
  }
  const std::size_t ng = spec.num_generators();
  const std::size_t nt = spec.horizon();
  UcSolution sol;
  sol.u.assign(ng, std::vector<int>(nt));
  sol.v.assign(ng, std::vector<int>(nt));
  sol.p.assign(ng, std::vector<double>(nt));
  for (std::size_t g = 0; g < ng; ++g) {
    for (std::size_t t = 0; t < nt; ++t) {
      sol.u[g][t] = static_cast<int>(assigned[model.at(names::u(g, t)).index]);
      sol.v[g][t] = static_cast<int>(assigned[model.at(names::v(g, t)).index]);
      sol.p[g][t] = assigned[model.at(names::p(g, t)).index];
    }
  }
  for (std::size_t t = 0; t < nt; ++t) {
    if (auto out = model.find(names::out(t))) sol.nadir_pred.push_back(assigned[out->index]);
  }
  if (!sol.nadir_pred.empty() && sol.nadir_pred.size() != nt) {
    throw ValidationError({"extract_solution: predictor output present for only some steps"});
  }
  sol.total_cost = model.evaluate_objective(assigned);
  return sol;
}

/// Start hint fixing every commitment variable to `u` ([g][t]).
inline std::vector<std::pair<std::size_t, double>> commitment_hint(const MilpModel& model, const SystemSpec& spec,
                                                                   const std::vector<std::vector<int>>& u) {
  if (u.size() != spec.num_generators()) throw DimensionError("commitment_hint: wrong generator count");
  std::vector<std::pair<std::size_t, double>> hint;
  for (std::size_t g = 0; g < u.size(); ++g) {
    if (u[g].size() != spec.horizon()) throw DimensionError("commitment_hint: wrong horizon");
    for (std::size_t t = 0; t < u[g].size(); ++t) hint.emplace_back(model.at(names::u(g, t)).index, u[g][t]);
  }
  return hint;
}

/// "t,g,u,v,p_mw,nadir_pred_hz" with 1-based t and g; n/a without a predictor.
inline void write_schedule_csv(std::ostream& out, const UcSolution& sol) {
  out << "t,g,u,v,p_mw,nadir_pred_hz\n";
  char buf[128];
  for (std::size_t t = 0; t < sol.horizon(); ++t) {
    for (std::size_t g = 0; g < sol.num_generators(); ++g) {
      std::snprintf(buf, sizeof buf, "%zu,%zu,%d,%d,%.6f,", t + 1, g + 1, sol.u[g][t], sol.v[g][t], sol.p[g][t]);
      out << buf;
      if (sol.nadir_pred.empty()) {
        out << "n/a\n";
      } else {
        std::snprintf(buf, sizeof buf, "%.6f\n", sol.nadir_pred[t]);
        out << buf;
      }
    }
  }
}

/// Text grid, one row per step: "·" uncommitted, otherwise a shade for
/// p / p_max (░ ≤ 25%, ▒ ≤ 50%, ▓ ≤ 75%, █ above).
inline void write_schedule_grid(std::ostream& out, const UcSolution& sol, const SystemSpec& spec) {
  out << "step  ";
  for (const auto& gen : spec.generators) out << gen.id << ' ';
  out << " units  load_mw  nadir_pred_hz\n";
  char buf[96];
  for (std::size_t t = 0; t < sol.horizon(); ++t) {
    std::snprintf(buf, sizeof buf, "%4zu  ", t + 1);
    out << buf;
    for (std::size_t g = 0; g < sol.num_generators(); ++g) {
      const char* cell = "·";
      if (sol.u[g][t] == 1) {
        const double ratio = sol.p[g][t] / spec.generators[g].p_max;
        cell = ratio <= 0.25 ? "░" : ratio <= 0.5 ? "▒" : ratio <= 0.75 ? "▓" : "█";
      }
      out << cell;
      for (std::size_t pad = 0; pad < spec.generators[g].id.size(); ++pad) out << ' ';
    }
    std::snprintf(buf, sizeof buf, " %5d  %7.1f  ", sol.committed_units(t), spec.load_profile[t]);
    out << buf;
    if (sol.nadir_pred.empty()) {
      out << "n/a\n";
    } else {
      std::snprintf(buf, sizeof buf, "%.4f\n", sol.nadir_pred[t]);
      out << buf;
    }
  }
  std::snprintf(buf, sizeof buf, "total_cost %.4f  committed_unit_hours %d\n", sol.total_cost,
                sol.committed_unit_hours());
  out << buf;
}

}  // namespace freqsec

#endif  // FREQSEC_UC_MODEL_HPP_
