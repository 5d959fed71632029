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

#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "freqsec/milp_encode.hpp"
#include "freqsec/milp_solver.hpp"
#include "test_support.hpp"

namespace freqsec {
namespace {

using testing::make_generator;
using testing::random_network;

MlpParams single_neuron(std::vector<double> w, double b) {
  MlpParams p;
  p.topology = Topology{w.size(), {1}};
  p.layers.push_back(DenseLayer{w.size(), 1, w, {b}});
  p.layers.push_back(DenseLayer{1, 1, {1.0}, {0.0}});
  p.input_scale.assign(w.size(), 1.0);
  return p;
}

TEST(ActivationBounds, MixedSigns) {
  const ActivationBounds b = compute_activation_bounds(single_neuron({1.0, -1.0}, 0.0));
  EXPECT_DOUBLE_EQ(b.lower[0][0], -1.0 - 1e-6);
  EXPECT_DOUBLE_EQ(b.upper[0][0], 1.0 + 1e-6);
}

TEST(ActivationBounds, PositiveWeightsClampLower) {
  const ActivationBounds b = compute_activation_bounds(single_neuron({2.0, 3.0}, 1.0));
  EXPECT_DOUBLE_EQ(b.upper[0][0], 6.0 + 1e-6);
  EXPECT_DOUBLE_EQ(b.lower[0][0], -1e-6);
}

TEST(ActivationBounds, ContainSampledActivations) {
  Rng rng(31);
  const MlpParams p = random_network(rng, 6, {8, 8});
  const ActivationBounds b = compute_activation_bounds(p);
  std::vector<double> x(6);
  for (int k = 0; k < 100000; ++k) {
    for (auto& v : x) v = rng.uniform();
    const ForwardTrace tr = forward_trace(p, x);
    for (std::size_t l = 0; l < b.lower.size(); ++l) {
      for (std::size_t n = 0; n < b.lower[l].size(); ++n) {
        ASSERT_GT(tr.pre[l][n], b.lower[l][n]);
        ASSERT_LT(tr.pre[l][n], b.upper[l][n]);
      }
    }
  }
}

TEST(ActivationBounds, RejectsNonFiniteWeights) {
  MlpParams p = single_neuron({1.0, std::nan("")}, 0.0);
  EXPECT_THROW(compute_activation_bounds(p), ValidationError);
}

// Host with u and p fixed at the given values.
MilpModel fixed_host(const std::vector<int>& u, const std::vector<double>& p, const SystemSpec& spec) {
  MilpModel m;
  for (std::size_t g = 0; g < u.size(); ++g) {
    m.add_variable(names::u(g, 0), VarKind::kBinary, u[g], u[g]);
    m.add_continuous(names::p(g, 0), p[g], p[g]);
  }
  merge_block(m, encode_feature_link(spec, 0));
  return m;
}

SystemSpec link_spec() {
  SystemSpec s;
  s.generators = {make_generator("a", 0, 300), make_generator("b", 0, 300), make_generator("c", 0, 300)};
  s.load_profile = {420};
  return s;
}

// Feasible range of `var` with every mu fixed to `mu`.
std::optional<std::pair<double, double>> range_with_mu(MilpModel m, const std::vector<int>& mu,
                                                       const std::string& var) {
  for (std::size_t g = 0; g < mu.size(); ++g) m.set_bounds(m.at(names::mu(g, 0)), mu[g], mu[g]);
  const VarId id = m.at(var);
  m.set_objective(id, 1.0);
  const LpResult lo = solve_lp(m);
  if (lo.status != LpStatus::kOptimal) return std::nullopt;
  m.set_objective(id, -1.0);
  const LpResult hi = solve_lp(m);
  return std::make_pair(lo.x[id.index], hi.x[id.index]);
}

TEST(FeatureLink, OnlyLargestUnitSelectable) {
  const SystemSpec spec = link_spec();
  const MilpModel m = fixed_host({1, 1, 0}, {150, 270, 0}, spec);
  int feasible = 0;
  for (int k = 0; k < 8; ++k) {
    const std::vector<int> mu{k & 1, (k >> 1) & 1, (k >> 2) & 1};
    const auto r = range_with_mu(m, mu, names::x(4, 0));
    if (!r) continue;
    ++feasible;
    EXPECT_EQ(mu, (std::vector<int>{0, 1, 0}));
    EXPECT_NEAR(r->first, 270.0, 1e-9);
    EXPECT_NEAR(r->second, 270.0, 1e-9);
  }
  EXPECT_EQ(feasible, 1);
  const auto x0 = range_with_mu(m, {0, 1, 0}, names::x(0, 0));
  EXPECT_NEAR(x0->first, 1.0, 1e-9);
  const auto x3 = range_with_mu(m, {0, 1, 0}, names::x(3, 0));
  EXPECT_NEAR(x3->second, 0.0, 1e-9);
  const auto x5 = range_with_mu(m, {0, 1, 0}, names::x(5, 0));
  EXPECT_NEAR(x5->second, 0.0, 1e-9);
}

TEST(FeatureLink, UnselectedSlotCollapses) {
  const SystemSpec spec = link_spec();
  const MilpModel m = fixed_host({1, 1, 1}, {100, 100, 100}, spec);
  for (std::size_t g = 0; g < 3; ++g) {
    std::vector<int> mu{0, 0, 0};
    mu[(g + 1) % 3] = 1;
    const auto r = range_with_mu(m, mu, names::x(3 + g, 0));
    ASSERT_TRUE(r.has_value());
    EXPECT_EQ(r->second, 0.0);
  }
}

TEST(FeatureLink, TiedUnitsBothSelectable) {
  const SystemSpec spec = link_spec();
  const MilpModel m = fixed_host({1, 1, 0}, {200, 200, 0}, spec);
  const auto first = range_with_mu(m, {1, 0, 0}, names::x(3, 0));
  const auto second = range_with_mu(m, {0, 1, 0}, names::x(4, 0));
  ASSERT_TRUE(first && second);
  EXPECT_NEAR(first->first, 200.0, 1e-9);
  EXPECT_NEAR(second->first, 200.0, 1e-9);
  // The dispatch value is the same; the slot it occupies follows the choice.
  EXPECT_NEAR(range_with_mu(m, {1, 0, 0}, names::x(4, 0))->second, 0.0, 1e-9);
  EXPECT_FALSE(range_with_mu(m, {0, 0, 1}, names::x(5, 0)).has_value());
}

// Host exposing the network inputs as variables fixed to `x`.
MilpModel network_host(const MlpParams& p, const ActivationBounds& b, const std::vector<double>& x) {
  MilpModel m;
  for (std::size_t i = 0; i < x.size(); ++i) m.add_continuous(names::x(i, 0), x[i], x[i]);
  merge_block(m, encode_network(p, b, 0));
  return m;
}

std::optional<std::pair<double, double>> range_of(MilpModel m, const std::string& var) {
  const VarId id = m.at(var);
  m.set_objective(id, 1.0);
  const MilpResult lo = solve_milp(m);
  if (lo.status != MilpStatus::kOptimal) return std::nullopt;
  m.set_objective(id, -1.0);
  const MilpResult hi = solve_milp(m);
  return std::make_pair(lo.x[id.index], hi.x[id.index]);
}

TEST(NetworkEncoding, NegativeBranch) {
  const MlpParams p = single_neuron({1.0}, -4.0);
  const ActivationBounds b{{{-10.0}}, {{10.0}}};
  MilpModel m = network_host(p, b, {1.0});  // Z = -3
  const std::string a = names::neuron("a", 0, 0, 0);
  const std::string z = names::neuron("z", 0, 0, 0);
  const auto za = range_of(m, z);
  ASSERT_TRUE(za.has_value());
  EXPECT_NEAR(za->first, 0.0, 1e-9);
  EXPECT_NEAR(za->second, 0.0, 1e-9);
  m.set_bounds(m.at(a), 1.0, 1.0);
  EXPECT_EQ(solve_milp(m).status, MilpStatus::kInfeasible);
}

TEST(NetworkEncoding, PositiveBranch) {
  const MlpParams p = single_neuron({1.0}, 1.0);
  const ActivationBounds b{{{-10.0}}, {{10.0}}};
  MilpModel m = network_host(p, b, {1.0});  // Z = 2
  const std::string a = names::neuron("a", 0, 0, 0);
  const auto za = range_of(m, names::neuron("z", 0, 0, 0));
  ASSERT_TRUE(za.has_value());
  EXPECT_NEAR(za->first, 2.0, 1e-9);
  EXPECT_NEAR(za->second, 2.0, 1e-9);
  m.set_bounds(m.at(a), 0.0, 0.0);
  EXPECT_EQ(solve_milp(m).status, MilpStatus::kInfeasible);
}

TEST(NetworkEncoding, ReproducesForwardPass) {
  Rng rng(404);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::size_t> hidden(1 + rng.index(3));
    for (auto& h : hidden) h = 1 + rng.index(8);
    MlpParams p = random_network(rng, 4, hidden);
    for (auto& s : p.input_scale) s = rng.uniform(0.2, 2.0);
    std::vector<double> raw(4), feat(4);
    for (std::size_t i = 0; i < 4; ++i) {
      feat[i] = rng.uniform();
      raw[i] = feat[i] / p.input_scale[i];
    }
    const ActivationBounds b = compute_activation_bounds(p);
    const auto r = range_of(network_host(p, b, raw), names::out(0));
    ASSERT_TRUE(r.has_value()) << "trial " << trial;
    const double y = forward(p, feat);
    EXPECT_NEAR(r->first, y, 1e-6) << "trial " << trial;
    EXPECT_NEAR(r->second, y, 1e-6) << "trial " << trial;
  }
}

TEST(NetworkEncoding, FourReluRowsPerNeuron) {
  Rng rng(1);
  const MlpParams p = random_network(rng, 6, {5, 3});
  const ConstraintBlock block = encode_network(p, compute_activation_bounds(p), 2);
  std::size_t relu_rows = 0, binaries = 0;
  for (const auto& c : block.model.constraints()) relu_rows += c.name.rfind("nn_relu_", 0) == 0;
  for (const auto& v : block.model.variables()) binaries += v.kind == VarKind::kBinary;
  EXPECT_EQ(relu_rows, 4u * 8u);
  EXPECT_EQ(binaries, 8u);
}

TEST(NetworkEncoding, WiderBoundsKeepFeasibleSetAndWeakenRelaxation) {
  Rng rng(55);
  for (int trial = 0; trial < 20; ++trial) {
    const MlpParams p = random_network(rng, 3, {4, 4});
    const ActivationBounds tight = compute_activation_bounds(p);
    ActivationBounds wide = tight;
    for (auto& layer : wide.lower) {
      for (auto& v : layer) v *= 10.0;
    }
    for (auto& layer : wide.upper) {
      for (auto& v : layer) v *= 10.0;
    }
    // Free inputs in the unit box.
    auto host = [&](const ActivationBounds& b) {
      MilpModel m;
      for (std::size_t i = 0; i < 3; ++i) m.add_continuous(names::x(i, 0), 0.0, 1.0);
      merge_block(m, encode_network(p, b, 0));
      m.set_objective(m.at(names::out(0)), 1.0);
      return m;
    };
    const MilpModel mt = host(tight), mw = host(wide);
    const MilpResult rt = solve_milp(mt), rw = solve_milp(mw);
    ASSERT_EQ(rt.status, MilpStatus::kOptimal);
    ASSERT_EQ(rw.status, MilpStatus::kOptimal);
    EXPECT_NEAR(rt.objective, rw.objective, 1e-6);
    EXPECT_LE(solve_lp(mw).objective, solve_lp(mt).objective + 1e-9);
  }
}

TEST(NadirLimit, AddsOneRow) {
  Rng rng(1);
  const MlpParams p = random_network(rng, 2, {3});
  const ConstraintBlock block = encode_network(p, compute_activation_bounds(p), 0);
  const std::size_t rows = block.model.num_constraints();
  const ConstraintBlock limited = attach_nadir_limit(block, 49.2);
  ASSERT_EQ(limited.model.num_constraints(), rows + 1);
  const auto& c = limited.model.constraints().back();
  EXPECT_EQ(c.sense, Sense::kGreaterEqual);
  EXPECT_EQ(c.rhs, 49.2);
  EXPECT_EQ(attach_nadir_limit(block, -kInf).model.num_constraints(), rows);
  EXPECT_THROW(attach_nadir_limit(block, kInf), ValidationError);
}

}  // namespace
}  // namespace freqsec
