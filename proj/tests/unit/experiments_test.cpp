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
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "freqsec/experiments.hpp"
#include "test_support.hpp"

namespace freqsec {
namespace {

namespace fs = std::filesystem;
using testing::dataset_spec;

TEST(Grid, Sizes) {
  const auto configs = parse_grid(SweepMode::kSize, "2, 4,8,32", {});
  ASSERT_EQ(configs.size(), 4u);
  EXPECT_EQ(configs[1].hidden, (std::vector<std::size_t>{4}));
  EXPECT_EQ(configs[3].label, "32");
}

TEST(Grid, Topologies) {
  const auto configs = parse_grid(SweepMode::kTopology, "[32];[16,16];[8,24]", {});
  ASSERT_EQ(configs.size(), 3u);
  EXPECT_EQ(configs[1].hidden, (std::vector<std::size_t>{16, 16}));
  EXPECT_EQ(configs[2].label, "[8,24]");
}

TEST(Grid, Losses) {
  const auto configs = parse_grid(SweepMode::kLoss, default_grid(SweepMode::kLoss), {});
  ASSERT_EQ(configs.size(), 4u);
  EXPECT_EQ(configs[0].loss, (LossSpec{LossFamily::kL1, 1.0, 1.0}));
  EXPECT_EQ(configs[3].loss, (LossSpec{LossFamily::kL2, 5.0, 1.0}));
  EXPECT_EQ(parse_grid(SweepMode::kLoss, "l2:2:3", {})[0].loss, (LossSpec{LossFamily::kL2, 2.0, 3.0}));
  EXPECT_EQ(configs[1].label, "l1:5:1");
}

TEST(Grid, Malformed) {
  EXPECT_THROW(parse_grid(SweepMode::kSize, "2,x", {}), ParseError);
  EXPECT_THROW(parse_grid(SweepMode::kSize, "0", {}), ParseError);
  EXPECT_THROW(parse_grid(SweepMode::kTopology, "32", {}), ParseError);
  EXPECT_THROW(parse_grid(SweepMode::kLoss, "l3:1", {}), ParseError);
  EXPECT_THROW(parse_grid(SweepMode::kLoss, "l1:-1", {}), ParseError);
  EXPECT_THROW(parse_grid(SweepMode::kLoss, "", {}), ParseError);
  EXPECT_THROW(parse_sweep_mode("depth"), ParseError);
}

TEST(Report, MissingCellsAreNa) {
  ExperimentReport report;
  report.header = {"mode size"};
  ReportRow ok{"2", 0.25, 0.5, 0.75, 1.5, 0.01, 1234.5, "optimal"};
  ReportRow bad;
  bad.config = "[8,24]";
  bad.mae = std::numeric_limits<double>::quiet_NaN();
  bad.status = "error: a, b";
  report.rows = {ok, bad};
  std::ostringstream out;
  write_report_csv(out, report);
  EXPECT_EQ(out.str(),
            "# mode size\n"
            "config,mae,r2,conservative_proportion,solve_time_s,mip_gap,total_cost,status\n"
            "2,0.25,0.5,0.75,1.5,0.01,1234.5,optimal\n"
            "\"[8,24]\",n/a,n/a,n/a,n/a,n/a,n/a,\"error: a, b\"\n");
}

Dataset small_dataset() { return generate_dataset(dataset_spec(), 120, 5); }

TEST(Sweep, RowsFollowRequestOrder) {
  const SystemSpec spec = dataset_spec();
  const Dataset data = small_dataset();
  SweepSettings settings;
  settings.train.epochs = 5;
  settings.uc.solve.node_limit = 50;
  settings.uc.solve.time_limit = 30.0;
  settings.workers = 2;
  const auto configs = parse_grid(SweepMode::kSize, "4,2,3", {});
  const ExperimentReport report = run_sweep(spec, data, SweepMode::kSize, configs, settings);
  ASSERT_EQ(report.rows.size(), 3u);
  EXPECT_EQ(report.rows[0].config, "4");
  EXPECT_EQ(report.rows[1].config, "2");
  EXPECT_EQ(report.rows[2].config, "3");
  for (const auto& row : report.rows) {
    EXPECT_TRUE(row.mae.has_value()) << row.status;
    EXPECT_TRUE(row.solve_time_s.has_value()) << row.status;
    EXPECT_EQ(row.status.rfind("error", 0), std::string::npos) << row.status;
  }
  EXPECT_EQ(report.header[1], "budget time_limit_s=30 node_limit=50 workers=2");
}

TEST(Sweep, FailuresBecomeRows) {
  const SystemSpec spec = dataset_spec();
  Dataset data = small_dataset();
  SweepSettings settings;
  settings.solve = false;
  settings.train.epochs = 2;
  settings.train.learning_rate = -1.0;
  const auto configs = parse_grid(SweepMode::kSize, "2,4", {});
  const ExperimentReport report = run_sweep(spec, data, SweepMode::kSize, configs, settings);
  ASSERT_EQ(report.rows.size(), 2u);
  for (const auto& row : report.rows) EXPECT_EQ(row.status.rfind("error: ", 0), 0u);
}

TEST(Sweep, TrainOnlyIsDeterministic) {
  const SystemSpec spec = dataset_spec();
  const Dataset data = small_dataset();
  SweepSettings settings;
  settings.solve = false;
  settings.train.epochs = 3;
  const auto configs = parse_grid(SweepMode::kTopology, "[4];[2,2]", {});
  std::ostringstream a, b;
  write_report_csv(a, run_sweep(spec, data, SweepMode::kTopology, configs, settings));
  settings.workers = 2;
  auto second = run_sweep(spec, data, SweepMode::kTopology, configs, settings);
  second.header[1] = run_sweep(spec, data, SweepMode::kTopology, configs, SweepSettings{settings.train, {}, false, 1})
                         .header[1];
  write_report_csv(b, second);
  EXPECT_EQ(a.str(), b.str());
}

TEST(SolveCase, PlainUcMatchesDirectSolve) {
  const SystemSpec spec = dataset_spec();
  const UcOutcome out = solve_uc_case(spec, UcCase{});
  ASSERT_EQ(out.result.status, MilpStatus::kOptimal);
  ASSERT_TRUE(out.solution.has_value());
  EXPECT_NEAR(out.result.objective, solve_milp(build_uc(spec)).objective, 1e-6);
}

// --- command line ---------------------------------------------------------

struct CliRun {
  int code = -1;
  std::string output;
};

CliRun run_cli(const std::string& args) {
  const fs::path log = fs::temp_directory_path() / "freqsec_cli_test.log";
  const std::string cmd = std::string(FREQSEC_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  CliRun r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  r.output = ss.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("freqsec_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
    std::ofstream(dir_ / "spec.json") << emit_system_spec(dataset_spec());
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

TEST_F(Cli, GenDataIsDeterministic) {
  const std::string base = "gen-data --spec " + path("spec.json") + " --n 40 --seed 7 --out ";
  ASSERT_EQ(run_cli(base + path("a")).code, 0);
  ASSERT_EQ(run_cli(base + path("b")).code, 0);
  EXPECT_EQ(slurp(path("a/dataset.csv")), slurp(path("b/dataset.csv")));
  EXPECT_EQ(slurp(path("a/dataset.json")), slurp(path("b/dataset.json")));
  std::istringstream csv(slurp(path("a/dataset.csv")));
  std::string line;
  std::size_t rows = 0;
  while (std::getline(csv, line)) ++rows;
  EXPECT_GE(rows, 2u);
  EXPECT_LE(rows, 41u);
}

TEST_F(Cli, ZeroSamplesIsUsageError) {
  EXPECT_EQ(run_cli("gen-data --spec " + path("spec.json") + " --n 0 --seed 7 --out " + path("z")).code, 2);
}

TEST_F(Cli, UnknownFlagIsUsageError) { EXPECT_EQ(run_cli("train --bogus").code, 2); }

TEST_F(Cli, MissingSpecIsUsageError) {
  EXPECT_EQ(run_cli("solve-uc --spec " + path("missing.json") + " --out " + path("s")).code, 2);
}

TEST_F(Cli, MalformedSpecIsParseError) {
  std::ofstream(path("bad.json")) << "{\"generators\": [}";
  const CliRun r = run_cli("solve-uc --spec " + path("bad.json") + " --out " + path("s"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("line"), std::string::npos) << r.output;
}

TEST_F(Cli, TrainPrintsMetrics) {
  ASSERT_EQ(run_cli("gen-data --spec " + path("spec.json") + " --n 60 --seed 3 --out " + path("d")).code, 0);
  const CliRun r = run_cli("train --data " + path("d/dataset.csv") +
                        " --hidden 4,4 --loss l1 --cplus 5 --cminus 1 --epochs 3 --seed 2 --out " + path("m"));
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("mae,"), std::string::npos);
  const TrainedModel m = load_model(path("m/model.json"));
  EXPECT_EQ(m.params.topology.hidden, (std::vector<std::size_t>{4, 4}));
  EXPECT_EQ(m.loss, (LossSpec{LossFamily::kL1, 5.0, 1.0}));
}

TEST_F(Cli, SolveUcWritesOutputs) {
  const CliRun r = run_cli("solve-uc --spec " + path("spec.json") + " --time-limit 20 --out " + path("s"));
  ASSERT_EQ(r.code, 0) << r.output;
  for (const char* f : {"schedule.csv", "schedule.txt", "solver.log"}) EXPECT_TRUE(fs::exists(path("s/") + f)) << f;
}

TEST_F(Cli, InfeasibleFloorExitsThree) {
  MlpParams p;
  p.topology = Topology{6, {1}};
  p.layers = {DenseLayer{6, 1, std::vector<double>(6, 0.0), {0.0}}, DenseLayer{1, 1, {0.0}, {49.0}}};
  p.input_scale.assign(6, 1.0);
  save_model(TrainedModel{p, LossSpec{}, 1}, path("const.json"));
  const CliRun r = run_cli("solve-uc --spec " + path("spec.json") + " --model " + path("const.json") +
                        " --nadir-floor 49.2 --time-limit 20 --out " + path("s"));
  EXPECT_EQ(r.code, 3) << r.output;
}

}  // namespace
}  // namespace freqsec
