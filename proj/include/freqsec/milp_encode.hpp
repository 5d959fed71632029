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

// Mixed-integer encoding of a trained ReLU network and of the feature
// vector it reads (commitments plus the dispatch of the largest unit).
//
// Blocks are small MilpModel fragments. Variables listed as external are
// placeholders that bind, by name, to variables already in the host model
// when the block is merged.

#ifndef FREQSEC_MILP_ENCODE_HPP_
#define FREQSEC_MILP_ENCODE_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "freqsec/errors.hpp"
#include "freqsec/milp_model.hpp"
#include "freqsec/mlp.hpp"
#include "freqsec/system_model.hpp"

namespace freqsec {

/// Margin added around interval bounds, and the minimum distance of each
/// bound from zero.
inline constexpr double kBoundMargin = 1e-6;

/// Pre-activation bounds per hidden layer and neuron.
struct ActivationBounds {
  std::vector<std::vector<double>> lower;
  std::vector<std::vector<double>> upper;
};

struct ConstraintBlock {
  MilpModel model;
  std::unordered_set<std::string> external;
  std::optional<std::string> output;
};

namespace names {

inline std::string u(std::size_t g, std::size_t t) { return "u_g" + std::to_string(g) + "_t" + std::to_string(t); }
inline std::string v(std::size_t g, std::size_t t) { return "v_g" + std::to_string(g) + "_t" + std::to_string(t); }
inline std::string p(std::size_t g, std::size_t t) { return "p_g" + std::to_string(g) + "_t" + std::to_string(t); }
inline std::string mu(std::size_t g, std::size_t t) { return "mu_g" + std::to_string(g) + "_t" + std::to_string(t); }
inline std::string x(std::size_t m, std::size_t t) { return "x_m" + std::to_string(m) + "_t" + std::to_string(t); }
inline std::string pmax(std::size_t t) { return "pmax_t" + std::to_string(t); }
inline std::string neuron(const char* kind, std::size_t l, std::size_t n, std::size_t t) {
  return std::string("nn_") + kind + "_l" + std::to_string(l) + "_n" + std::to_string(n) + "_t" + std::to_string(t);
}
inline std::string out(std::size_t t) { return "nn_out_t" + std::to_string(t); }

}  // namespace names

/// Interval propagation of `box` (feature space, one [lo, hi] per input)
/// through the hidden layers. Each bound is widened by kBoundMargin and kept
/// at least kBoundMargin away from zero on its side.
inline ActivationBounds compute_activation_bounds(const MlpParams& params,
                                                  const std::vector<std::pair<double, double>>& box) {
  validate(params);
  for (const auto& layer : params.layers) {
    for (double w : layer.weights) {
      if (!std::isfinite(w)) throw ValidationError({"activation bounds: non-finite weight"});
    }
    for (double b : layer.bias) {
      if (!std::isfinite(b)) throw ValidationError({"activation bounds: non-finite bias"});
    }
  }
  if (box.size() != params.topology.input_dim) {
    throw DimensionError("activation bounds: box has " + std::to_string(box.size()) + " entries, network expects " +
                         std::to_string(params.topology.input_dim));
  }
  ActivationBounds out;
  std::vector<double> lo(box.size()), hi(box.size());
  for (std::size_t i = 0; i < box.size(); ++i) {
    lo[i] = box[i].first;
    hi[i] = box[i].second;
  }
  for (std::size_t l = 0; l + 1 < params.layers.size(); ++l) {
    const auto& layer = params.layers[l];
    std::vector<double> zl(layer.out), zh(layer.out);
    for (std::size_t n = 0; n < layer.out; ++n) {
      double a = layer.bias[n], b = layer.bias[n];
      for (std::size_t m = 0; m < layer.in; ++m) {
        const double w = layer.w(n, m);
        a += w >= 0 ? w * lo[m] : w * hi[m];
        b += w >= 0 ? w * hi[m] : w * lo[m];
      }
      zl[n] = a;
      zh[n] = b;
    }
    std::vector<double> bl(layer.out), bh(layer.out);
    for (std::size_t n = 0; n < layer.out; ++n) {
      bl[n] = std::min(zl[n] - kBoundMargin, -kBoundMargin);
      bh[n] = std::max(zh[n] + kBoundMargin, kBoundMargin);
    }
    out.lower.push_back(std::move(bl));
    out.upper.push_back(std::move(bh));
    for (std::size_t n = 0; n < layer.out; ++n) {
      zl[n] = std::max(0.0, zl[n]);
      zh[n] = std::max(0.0, zh[n]);
    }
    lo = std::move(zl);
    hi = std::move(zh);
  }
  return out;
}

/// Bounds for the standard [0, 1] feature box.
inline ActivationBounds compute_activation_bounds(const MlpParams& params) {
  return compute_activation_bounds(params,
                                   std::vector<std::pair<double, double>>(params.topology.input_dim, {0.0, 1.0}));
}

/// Feature vector of step t tied to the host's u and p variables.
inline ConstraintBlock encode_feature_link(const SystemSpec& spec, std::size_t t) {
  const std::size_t ng = spec.num_generators();
  const double gamma = big_m_gamma(spec);
  ConstraintBlock block;
  auto& m = block.model;
  std::vector<VarId> u(ng), p(ng), mu(ng), x(2 * ng);
  for (std::size_t g = 0; g < ng; ++g) {
    u[g] = m.add_binary(names::u(g, t));
    p[g] = m.add_continuous(names::p(g, t), 0.0, spec.generators[g].p_max);
    block.external.insert(names::u(g, t));
    block.external.insert(names::p(g, t));
  }
  for (std::size_t g = 0; g < ng; ++g) mu[g] = m.add_binary(names::mu(g, t));
  for (std::size_t g = 0; g < ng; ++g) x[g] = m.add_continuous(names::x(g, t), 0.0, 1.0);
  for (std::size_t g = 0; g < ng; ++g) x[ng + g] = m.add_continuous(names::x(ng + g, t), 0.0, gamma);
  const VarId pmax = m.add_continuous(names::pmax(t), 0.0, gamma);

  const std::string ts = "_t" + std::to_string(t);
  std::vector<Term> pick;
  for (std::size_t g = 0; g < ng; ++g) pick.push_back({mu[g], 1.0});
  m.add_constraint("fl_pick" + ts, std::move(pick), Sense::kEqual, 1.0);
  for (std::size_t g = 0; g < ng; ++g) {
    const std::string gs = "_g" + std::to_string(g) + ts;
    m.add_constraint("fl_commit" + gs, {{x[g], 1.0}, {u[g], -1.0}}, Sense::kEqual, 0.0);
    m.add_constraint("fl_maxge" + gs, {{pmax, 1.0}, {p[g], -1.0}}, Sense::kGreaterEqual, 0.0);
    m.add_constraint("fl_maxle" + gs, {{pmax, 1.0}, {p[g], -1.0}, {mu[g], gamma}}, Sense::kLessEqual, gamma);
    m.add_constraint("fl_disp_up" + gs, {{x[ng + g], 1.0}, {p[g], -1.0}, {mu[g], gamma}}, Sense::kLessEqual, gamma);
    m.add_constraint("fl_disp_dn" + gs, {{x[ng + g], -1.0}, {p[g], 1.0}, {mu[g], gamma}}, Sense::kLessEqual, gamma);
    m.add_constraint("fl_disp_on" + gs, {{x[ng + g], 1.0}, {mu[g], -gamma}}, Sense::kLessEqual, 0.0);
  }
  return block;
}

/// ReLU network of step t reading the host's x_m variables (raw units;
/// input_scale is folded into the first layer).
inline ConstraintBlock encode_network(const MlpParams& params, const ActivationBounds& bounds, std::size_t t) {
  validate(params);
  const std::size_t hidden_layers = params.layers.size() - 1;
  if (bounds.lower.size() != hidden_layers || bounds.upper.size() != hidden_layers) {
    throw DimensionError("encode_network: bounds do not match the hidden layer count");
  }
  ConstraintBlock block;
  auto& m = block.model;
  std::vector<VarId> prev;
  for (std::size_t i = 0; i < params.topology.input_dim; ++i) {
    prev.push_back(m.add_continuous(names::x(i, t), -kInf, kInf));
    block.external.insert(names::x(i, t));
  }
  const std::string ts = "_t" + std::to_string(t);
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const auto& layer = params.layers[l];
    const bool last = l == hidden_layers;
    if (!last && (bounds.lower[l].size() != layer.out || bounds.upper[l].size() != layer.out)) {
      throw DimensionError("encode_network: bounds do not match layer width");
    }
    std::vector<VarId> next;
    for (std::size_t n = 0; n < layer.out; ++n) {
      const VarId Z = last ? m.add_continuous(names::out(t), -kInf, kInf)
                           : m.add_continuous(names::neuron("Z", l, n, t), -kInf, kInf);
      std::vector<Term> affine{{Z, 1.0}};
      for (std::size_t k = 0; k < layer.in; ++k) {
        double w = layer.w(n, k);
        if (l == 0) w *= params.input_scale[k];
        if (w != 0.0) affine.push_back({prev[k], -w});
      }
      const std::string ns = "_l" + std::to_string(l) + "_n" + std::to_string(n) + ts;
      m.add_constraint((last ? "nn_out_def" + ts : "nn_aff" + ns), std::move(affine), Sense::kEqual, layer.bias[n]);
      if (last) {
        block.output = names::out(t);
        continue;
      }
      const double lo = bounds.lower[l][n];
      const double hi = bounds.upper[l][n];
      const VarId z = m.add_continuous(names::neuron("z", l, n, t), -kInf, kInf);
      const VarId a = m.add_binary(names::neuron("a", l, n, t));
      m.add_constraint("nn_relu_ub" + ns, {{z, 1.0}, {Z, -1.0}, {a, -lo}}, Sense::kLessEqual, -lo);
      m.add_constraint("nn_relu_lb" + ns, {{z, 1.0}, {Z, -1.0}}, Sense::kGreaterEqual, 0.0);
      m.add_constraint("nn_relu_on" + ns, {{z, 1.0}, {a, -hi}}, Sense::kLessEqual, 0.0);
      m.add_constraint("nn_relu_nn" + ns, {{z, 1.0}}, Sense::kGreaterEqual, 0.0);
      next.push_back(z);
    }
    prev = std::move(next);
  }
  return block;
}

/// Requires the block output to be at least `y_floor`; -inf leaves the block
/// unchanged.
inline ConstraintBlock attach_nadir_limit(ConstraintBlock block, double y_floor) {
  if (!block.output) throw ValidationError({"attach_nadir_limit: block has no output variable"});
  if (y_floor == -kInf) return block;
  if (!std::isfinite(y_floor)) throw ValidationError({"attach_nadir_limit: floor must be finite or -inf"});
  const VarId out = block.model.at(*block.output);
  block.model.add_constraint("nadir_floor_" + *block.output, {{out, 1.0}}, Sense::kGreaterEqual, y_floor);
  return block;
}

/// Copies the block into `host`. External placeholders resolve to existing
/// host variables; everything else is added.
inline void merge_block(MilpModel& host, const ConstraintBlock& block) {
  std::vector<VarId> map(block.model.num_variables());
  for (std::size_t j = 0; j < block.model.num_variables(); ++j) {
    const auto& v = block.model.variables()[j];
    if (block.external.contains(v.name)) {
      auto id = host.find(v.name);
      if (!id) throw ValidationError({"merge: host has no variable '" + v.name + "'"});
      map[j] = *id;
    } else {
      map[j] = host.add_variable(v.name, v.kind, v.lower, v.upper);
      if (block.model.objective()[j] != 0.0) host.add_objective(map[j], block.model.objective()[j]);
    }
  }
  for (const auto& c : block.model.constraints()) {
    std::vector<Term> terms;
    terms.reserve(c.terms.size());
    for (const auto& t : c.terms) terms.push_back({map[t.var.index], t.coef});
    host.add_constraint(c.name, std::move(terms), c.sense, c.rhs);
  }
}

}  // namespace freqsec

#endif  // FREQSEC_MILP_ENCODE_HPP_
