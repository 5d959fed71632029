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

#include <cmath>
#include <limits>
#include <sstream>

#include "freqsec/freq_sim.hpp"
#include "test_support.hpp"

namespace freqsec {
namespace {

// 2H = 10 s, D = 1, two governors with 1/R = 20 each, unlimited headroom.
CoiModel reference_model(double loss) {
  CoiModel m;
  m.two_h = 10.0;
  m.damping = 1.0;
  m.loss = loss;
  m.gain = {20.0, 20.0};
  m.time_constant = {1.0, 1.5};
  m.headroom = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  return m;
}

TEST(FreqSim, ZeroDisturbanceStaysNominal) {
  const FrequencyTrace tr = simulate_coi(reference_model(0.0), SimConfig{}, 50.0);
  ASSERT_TRUE(tr.converged);
  for (double f : tr.freq) EXPECT_DOUBLE_EQ(f, 50.0);
  EXPECT_DOUBLE_EQ(nadir(tr), 50.0);
}

TEST(FreqSim, SettlesToClosedFormSteadyState) {
  const CoiModel m = reference_model(0.1);
  SimConfig cfg;
  cfg.horizon = 60.0;
  const FrequencyTrace tr = simulate_coi(m, cfg, 50.0);
  ASSERT_TRUE(tr.converged);
  const double f_ss = 50.0 * (1.0 - 0.1 / 41.0);
  EXPECT_NEAR(steady_state_frequency(m, 50.0), f_ss, 1e-12);
  EXPECT_NEAR(f_ss, 49.8780, 1e-4);
  EXPECT_NEAR(tr.freq.back(), f_ss, 0.01 * (50.0 - f_ss));
  EXPECT_LE(nadir(tr), f_ss);
}

TEST(FreqSim, NoRecoveryDiverges) {
  CoiModel m = reference_model(0.1);
  m.damping = 0.0;
  m.gain = {0.0, 0.0};
  const FrequencyTrace tr = simulate_coi(m, SimConfig{}, 50.0);
  EXPECT_FALSE(tr.converged);
  EXPECT_GT(std::abs(tr.freq.back() - 50.0), kDivergenceHz);
  EXPECT_THROW(nadir(tr), UnconvergedTraceError);
}

TEST(FreqSim, NadirIsTraceMinimum) {
  FrequencyTrace tr;
  tr.times = {0.0, 1.0, 2.0, 3.0};
  tr.freq = {50.0, 49.5, 49.31, 49.6};
  EXPECT_DOUBLE_EQ(nadir(tr), 49.31);
}

TEST(FreqSim, SteadyStateSubstitutions) {
  CoiModel m;
  m.loss = 0.05;
  m.damping = 0.5;
  m.gain = {19.5};
  EXPECT_NEAR(steady_state_frequency(m, 50.0), 49.8750, 1e-9);
  m.loss = 0.0;
  EXPECT_DOUBLE_EQ(steady_state_frequency(m, 50.0), 50.0);
  m.damping = 0.0;
  m.gain = {0.0};
  EXPECT_THROW(steady_state_frequency(m, 50.0), NumericalError);
}

TEST(FreqSim, ContingencyTripsLargestUnit) {
  const SystemSpec s = testing::three_unit_spec();
  const OperatingPoint op{{1, 1, 1}, {50, 200, 100}};
  const CoiModel m = build_coi_model(s, op);
  EXPECT_DOUBLE_EQ(m.loss, 2.0);
  ASSERT_EQ(m.gain.size(), 2u);
  EXPECT_DOUBLE_EQ(m.two_h, 2.0 * 5.0 * 2.0);
  EXPECT_DOUBLE_EQ(m.headroom[0], 0.5);
  EXPECT_DOUBLE_EQ(m.headroom[1], 1.0);
}

TEST(FreqSim, SingleCommittedUnitIsDegenerate) {
  const SystemSpec s = testing::three_unit_spec();
  EXPECT_THROW(simulate_contingency(s, {{0, 1, 0}, {0, 150, 0}}), DegenerateContingencyError);
}

TEST(FreqSim, ShortHorizonRejected) {
  const SystemSpec s = testing::three_unit_spec();
  SimConfig cfg;
  cfg.horizon = 5.0;
  EXPECT_THROW(simulate_contingency(s, {{1, 1, 0}, {50, 100, 0}}, cfg), ValidationError);
}

TEST(FreqSim, HalvingStepBarelyMovesNadir) {
  const CoiModel m = reference_model(0.1);
  SimConfig coarse, fine;
  fine.dt = coarse.dt / 2.0;
  EXPECT_LT(std::abs(nadir(simulate_coi(m, coarse, 50.0)) - nadir(simulate_coi(m, fine, 50.0))), 1e-4);
}

TEST(FreqSim, LargerLossDeepensNadir) {
  double previous = 50.0;
  for (double k : {0.02, 0.05, 0.1, 0.2}) {
    const double n = nadir(simulate_coi(reference_model(k), SimConfig{}, 50.0));
    EXPECT_LT(n, previous);
    previous = n;
  }
}

TEST(FreqSim, NadirBelowSteadyStateForStepLoss) {
  Rng rng(11);
  for (int i = 0; i < 20; ++i) {
    CoiModel m = reference_model(rng.uniform(0.01, 0.2));
    m.two_h = rng.uniform(4.0, 20.0);
    m.gain = {rng.uniform(5.0, 30.0), rng.uniform(5.0, 30.0)};
    const FrequencyTrace tr = simulate_coi(m, SimConfig{}, 50.0);
    ASSERT_TRUE(tr.converged);
    EXPECT_LT(nadir(tr), steady_state_frequency(m, 50.0));
    EXPECT_LE(nadir(tr), tr.freq.front());
  }
}

TEST(FreqSim, HeadroomClampLimitsRecovery) {
  CoiModel limited = reference_model(0.1);
  limited.headroom = {0.01, 0.01};
  const double n_limited = nadir(simulate_coi(limited, SimConfig{}, 50.0));
  const double n_free = nadir(simulate_coi(reference_model(0.1), SimConfig{}, 50.0));
  EXPECT_LT(n_limited, n_free);
}

TEST(FreqSim, TraceCsvHeader) {
  std::ostringstream out;
  write_trace_csv(out, simulate_coi(reference_model(0.0), SimConfig{0.5, 1.0}, 50.0));
  EXPECT_EQ(out.str().substr(0, 15), "time_s,freq_hz\n");
}

}  // namespace
}  // namespace freqsec
