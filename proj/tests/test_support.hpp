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

// Fixtures and brute-force oracles shared by the unit and acceptance tests.

#ifndef FREQSEC_TESTS_TEST_SUPPORT_HPP_
#define FREQSEC_TESTS_TEST_SUPPORT_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "freqsec/freqsec.hpp"

namespace freqsec::testing {

inline GeneratorSpec make_generator(const std::string& id, double p_min, double p_max) {
  GeneratorSpec g;
  g.id = id;
  g.p_min = p_min;
  g.p_max = p_max;
  g.ramp_up = p_max;
  g.ramp_down = p_max;
  g.cost_fixed = 10.0;
  g.cost_marginal = 2.0;
  g.cost_startup = 0.0;
  g.inertia_h = 5.0;
  g.droop_r = 0.05;
  g.governor_t = 1.0;
  g.mva_base = 100.0;
  return g;
}

/// Three units, four steps, 100 MVA system base.
inline SystemSpec three_unit_spec() {
  SystemSpec s;
  s.generators = {make_generator("a", 20, 100), make_generator("b", 30, 300), make_generator("c", 10, 200)};
  s.generators[0].cost_marginal = 3.0;
  s.generators[1].cost_marginal = 1.5;
  s.generators[2].cost_marginal = 2.5;
  s.load_profile = {150, 250, 320, 200};
  s.f_nominal = 50.0;
  s.nadir_limit = 49.2;
  s.load_damping_d = 1.0;
  s.system_mva_base = 100.0;
  return s;
}

/// three_unit_spec on a 1000 MVA base with realistic machine ratings and
/// damping, so every sampled contingency settles within a few hertz.
inline SystemSpec dataset_spec() {
  SystemSpec s = three_unit_spec();
  s.system_mva_base = 1000.0;
  s.load_damping_d = 6.0;
  for (auto& g : s.generators) g.mva_base = 1.1 * g.p_max;
  return s;
}

/// Random spec whose loads stay within capacity.
inline SystemSpec random_spec(Rng& rng, std::size_t ng, std::size_t nt) {
  SystemSpec s;
  double capacity = 0.0, floor = 0.0;
  for (std::size_t g = 0; g < ng; ++g) {
    GeneratorSpec gen = make_generator("g" + std::to_string(g), 0.0, 0.0);
    gen.p_max = std::round(rng.uniform(50.0, 300.0));
    gen.p_min = std::round(rng.uniform(0.0, 0.4) * gen.p_max);
    gen.ramp_up = gen.ramp_down = std::round(rng.uniform(0.3, 1.0) * gen.p_max);
    gen.min_up = 1 + static_cast<int>(rng.index(3));
    gen.min_down = 1 + static_cast<int>(rng.index(3));
    gen.cost_fixed = std::round(rng.uniform(0.0, 500.0));
    gen.cost_marginal = std::round(rng.uniform(5.0, 50.0));
    gen.cost_startup = std::round(rng.uniform(0.0, 1000.0));
    gen.inertia_h = rng.uniform(2.0, 8.0);
    gen.droop_r = rng.uniform(0.03, 0.08);
    gen.governor_t = rng.uniform(0.3, 2.0);
    gen.mva_base = gen.p_max * rng.uniform(1.0, 1.3);
    capacity += gen.p_max;
    floor = std::max(floor, gen.p_min);
    s.generators.push_back(gen);
  }
  for (std::size_t t = 0; t < nt; ++t) s.load_profile.push_back(std::round(rng.uniform(0.3, 0.9) * capacity));
  s.system_mva_base = 1000.0;
  s.load_damping_d = rng.uniform(0.5, 3.0);
  return s;
}

/// Random network with the given shape; weights and biases in [-scale, scale].
inline MlpParams random_network(Rng& rng, std::size_t input_dim, const std::vector<std::size_t>& hidden,
                                double scale = 1.0) {
  MlpParams p;
  p.topology = Topology{input_dim, hidden};
  std::size_t fan_in = input_dim;
  for (std::size_t l = 0; l <= hidden.size(); ++l) {
    const std::size_t fan_out = l < hidden.size() ? hidden[l] : 1;
    DenseLayer layer{fan_in, fan_out, std::vector<double>(fan_in * fan_out), std::vector<double>(fan_out)};
    for (auto& w : layer.weights) w = rng.uniform(-scale, scale);
    for (auto& b : layer.bias) b = rng.uniform(-scale, scale);
    p.layers.push_back(layer);
    fan_in = fan_out;
  }
  p.input_scale.assign(input_dim, 1.0);
  return p;
}

/// Minimum of a pure-binary-plus-continuous MILP by enumerating every binary
/// assignment and solving the remaining LP. nullopt when infeasible.
inline std::optional<double> enumerate_milp(const MilpModel& model) {
  std::vector<std::size_t> bins;
  for (std::size_t j = 0; j < model.num_variables(); ++j) {
    if (model.variables()[j].kind == VarKind::kBinary) bins.push_back(j);
  }
  std::optional<double> best;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << bins.size()); ++mask) {
    MilpModel fixed = model;
    bool ok = true;
    for (std::size_t k = 0; k < bins.size(); ++k) {
      const double v = static_cast<double>((mask >> k) & 1u);
      const auto& var = model.variables()[bins[k]];
      if (v < var.lower || v > var.upper) ok = false;
      fixed.set_bounds(VarId{bins[k]}, v, v);
    }
    if (!ok) continue;
    const LpResult lp = solve_lp(fixed);
    if (lp.status != LpStatus::kOptimal) continue;
    if (!best || lp.objective < *best) best = lp.objective;
  }
  return best;
}

/// Dense Gaussian elimination with partial pivoting; nullopt when singular.
inline std::optional<std::vector<double>> solve_dense(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    }
    if (std::abs(a[piv][c]) < 1e-10) return std::nullopt;
    std::swap(a[piv], a[c]);
    std::swap(b[piv], b[c]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a[r][c] / a[c][c];
      if (f == 0.0) continue;
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
  return x;
}

/// Minimum of c.x over {A x <= b} (x free) by enumerating every choice of
/// n tight rows. Returns nullopt when no vertex is feasible.
inline std::optional<double> vertex_enumeration(const std::vector<std::vector<double>>& a,
                                                const std::vector<double>& b, const std::vector<double>& c) {
  const std::size_t m = a.size();
  const std::size_t n = c.size();
  std::optional<double> best;
  std::vector<std::size_t> pick(n);
  for (std::size_t i = 0; i < n; ++i) pick[i] = i;
  while (true) {
    std::vector<std::vector<double>> sa;
    std::vector<double> sb;
    for (auto r : pick) {
      sa.push_back(a[r]);
      sb.push_back(b[r]);
    }
    if (auto x = solve_dense(sa, sb)) {
      bool feasible = true;
      for (std::size_t r = 0; r < m && feasible; ++r) {
        double lhs = 0.0;
        for (std::size_t j = 0; j < n; ++j) lhs += a[r][j] * (*x)[j];
        feasible = lhs <= b[r] + 1e-9 * (1.0 + std::abs(b[r]));
      }
      if (feasible) {
        double obj = 0.0;
        for (std::size_t j = 0; j < n; ++j) obj += c[j] * (*x)[j];
        if (!best || obj < *best) best = obj;
      }
    }
    // Next combination in lexicographic order.
    std::size_t i = n;
    while (i > 0 && pick[i - 1] == m - n + i - 1) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t k = i; k < n; ++k) pick[k] = pick[k - 1] + 1;
  }
  return best;
}

}  // namespace freqsec::testing

#endif  // FREQSEC_TESTS_TEST_SUPPORT_HPP_
