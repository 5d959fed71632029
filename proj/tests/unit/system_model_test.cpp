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

#include "freqsec/system_model.hpp"
#include "test_support.hpp"

namespace freqsec {
namespace {

using testing::make_generator;
using testing::three_unit_spec;

std::string generator_json(const std::string& id, double p_min, double p_max) {
  return R"({"id": ")" + id + R"(", "p_min": )" + std::to_string(p_min) + R"(, "p_max": )" + std::to_string(p_max) +
         R"(, "ramp_up": 50, "ramp_down": 50, "min_up": 1, "min_down": 1, "cost_fixed": 10,
            "cost_marginal": 2, "cost_startup": 5, "inertia_h": 4, "droop_r": 0.05,
            "governor_t": 1, "mva_base": 100})";
}

std::string spec_json(const std::string& loads, const std::string& gens) {
  return R"({"f_nominal_hz": 50, "nadir_limit_hz": 49.2, "load_damping_d": 1, "system_mva_base": 100,
             "load_profile_mw": )" +
         loads + R"(, "generators": [)" + gens + "]}";
}

TEST(SystemModel, LoadsThreeGeneratorSpec) {
  const std::string gens =
      generator_json("a", 10, 100) + "," + generator_json("b", 20, 200) + "," + generator_json("c", 0, 50);
  const SystemSpec s = load_system_spec(spec_json("[100, 150, 200, 120]", gens));
  EXPECT_EQ(s.num_generators(), 3u);
  EXPECT_EQ(s.horizon(), 4u);
  EXPECT_EQ(s.generators[1].id, "b");
  EXPECT_DOUBLE_EQ(s.generators[1].p_max, 200.0);
  EXPECT_DOUBLE_EQ(s.nadir_limit, 49.2);
}

TEST(SystemModel, RejectsPminAbovePmaxNamingGenerator) {
  const std::string gens = generator_json("good", 10, 100) + "," + generator_json("bad_unit", 300, 200);
  try {
    load_system_spec(spec_json("[100]", gens));
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    ASSERT_EQ(e.violations().size(), 1u);
    EXPECT_NE(e.violations()[0].find("bad_unit"), std::string::npos);
    EXPECT_NE(e.violations()[0].find("p_min > p_max"), std::string::npos);
  }
}

TEST(SystemModel, RejectsLoadAboveCapacity) {
  const std::string gens = generator_json("a", 0, 100) + "," + generator_json("b", 0, 100);
  try {
    load_system_spec(spec_json("[50, 100, 250]", gens));
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    ASSERT_EQ(e.violations().size(), 1u);
    EXPECT_NE(e.violations()[0].find("infeasible load"), std::string::npos);
    EXPECT_NE(e.violations()[0].find("step 2"), std::string::npos);
  }
}

TEST(SystemModel, ListsEveryViolation) {
  SystemSpec s = three_unit_spec();
  s.generators[0].droop_r = 0.0;
  s.generators[1].min_up = 0;
  s.nadir_limit = 51.0;
  try {
    validate(s);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.violations().size(), 3u);
  }
}

TEST(SystemModel, UnknownKeyIsParseError) {
  const std::string text = R"({"f_nominal_hz": 50, "nadir_limit_hz": 49.2, "load_damping_d": 1,
    "system_mva_base": 100, "load_profile_mw": [10], "bogus": 1,
    "generators": [)" + generator_json("a", 0, 100) +
                           "]}";
  EXPECT_THROW(load_system_spec(text), ParseError);
}

TEST(SystemModel, MalformedJsonReportsLine) {
  try {
    load_system_spec("{\n  \"f_nominal_hz\": 50,\n  oops\n}");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(SystemModel, EmitParseRoundTrip) {
  Rng rng(7);
  for (int i = 0; i < 20; ++i) {
    const SystemSpec s = testing::random_spec(rng, 1 + rng.index(6), 1 + rng.index(8));
    EXPECT_EQ(load_system_spec(emit_system_spec(s)), s);
  }
}

TEST(SystemModel, BigMGamma) {
  SystemSpec s = three_unit_spec();
  s.generators[0].p_max = 100;
  s.generators[1].p_max = 300;
  s.generators[2].p_max = 200;
  EXPECT_DOUBLE_EQ(big_m_gamma(s), 303.0);
  s.generators = {make_generator("x", 0, 50)};
  EXPECT_DOUBLE_EQ(big_m_gamma(s), 50.5);
  s.generators = {make_generator("x", 0, 100), make_generator("y", 0, 100)};
  EXPECT_DOUBLE_EQ(big_m_gamma(s), 101.0);
}

TEST(SystemModel, GammaExceedsEveryValidDispatch) {
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const SystemSpec s = testing::random_spec(rng, 2 + rng.index(5), 1);
    for (const auto& g : s.generators) EXPECT_GT(big_m_gamma(s), g.p_max);
  }
}

TEST(SystemModel, OperatingPointChecks) {
  const SystemSpec s = three_unit_spec();
  EXPECT_TRUE(check_operating_point(s, {{1, 1, 0}, {50, 100, 0}}).empty());
  EXPECT_FALSE(check_operating_point(s, {{1, 0, 0}, {50, 10, 0}}).empty());
  EXPECT_FALSE(check_operating_point(s, {{1, 0, 0}, {150, 0, 0}}).empty());
  EXPECT_FALSE(check_operating_point(s, {{0, 0, 0}, {0, 0, 0}}).empty());
  EXPECT_FALSE(check_operating_point(s, {{1, 1}, {50, 50}}).empty());
}

TEST(SystemModel, LargestUnitTieGoesToLowestIndex) {
  EXPECT_EQ(largest_committed_unit({{1, 1, 0}, {200, 200, 0}}), 0u);
  EXPECT_EQ(largest_committed_unit({{1, 1, 0}, {150, 270, 0}}), 1u);
}

TEST(SystemModel, RebasedQuantities) {
  SystemSpec s = three_unit_spec();
  s.system_mva_base = 1000.0;
  GeneratorSpec g = make_generator("g", 0, 100);
  g.inertia_h = 6.0;
  g.mva_base = 500.0;
  g.droop_r = 0.05;
  EXPECT_DOUBLE_EQ(rebased_inertia(s, g), 3.0);
  EXPECT_DOUBLE_EQ(governor_gain(s, g), 10.0);
}

}  // namespace
}  // namespace freqsec
