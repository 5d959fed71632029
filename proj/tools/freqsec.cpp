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

// freqsec command-line driver.
//
// Exit codes: 0 success, 1 other error, 2 usage, 3 infeasible model,
// 4 solver limit reached without a feasible solution.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "freqsec/freqsec.hpp"

namespace fs = std::filesystem;
using namespace freqsec;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitUsage = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitNoSolution = 4;

class UsageError : public Error {
 public:
  using Error::Error;
};

std::string out_path(const std::string& dir, const char* name) { return (fs::path(dir) / name).string(); }

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory '" + dir + "': " + ec.message());
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  return out;
}

// The sidecar sits next to the CSV with a .json extension.
std::string sidecar_for(const std::string& csv_path) {
  fs::path p(csv_path);
  p.replace_extension(".json");
  return p.string();
}

struct DataFlags {
  std::string spec;
  std::string data;
  std::size_t n = 1000;
  std::uint64_t seed = 1;
};

struct TrainFlags {
  std::string hidden = "32";
  std::string loss = "l2";
  double cplus = 1.0;
  double cminus = 1.0;
  std::size_t epochs = 300;
  std::size_t batch = 32;
  double lr = 3e-3;
  std::uint64_t seed = 1;
};

struct SolveFlags {
  std::optional<double> nadir_floor;
  double time_limit = 60.0;
  std::uint64_t node_limit = 0;  // 0 = unlimited
  double gap = 0.0;
  bool no_plan = false;
  std::string branching = "fractional";
};

SolveConfig make_solve_config(const SolveFlags& f) {
  SolveConfig cfg;
  cfg.time_limit = f.time_limit;
  if (f.node_limit > 0) cfg.node_limit = f.node_limit;
  cfg.mip_gap_target = f.gap;
  if (f.branching == "pseudocost") {
    cfg.branching = Branching::kPseudoCost;
  } else if (f.branching == "fractional") {
    cfg.branching = Branching::kMostFractional;
  } else {
    throw UsageError("--branching must be pseudocost or fractional");
  }
  validate(cfg);
  return cfg;
}

TrainConfig make_train_config(const TrainFlags& f) {
  TrainConfig cfg;
  cfg.epochs = f.epochs;
  cfg.batch_size = f.batch;
  cfg.learning_rate = f.lr;
  cfg.seed = f.seed;
  return cfg;
}

void add_solve_flags(CLI::App* cmd, SolveFlags& f) {
  cmd->add_option("--nadir-floor", f.nadir_floor, "Predicted nadir floor in Hz (default: spec nadir_limit_hz)");
  cmd->add_option("--time-limit", f.time_limit, "Solver wall-clock limit in s")->check(CLI::PositiveNumber);
  cmd->add_option("--node-limit", f.node_limit, "Branch-and-bound node limit (0 = none)");
  cmd->add_option("--gap", f.gap, "Relative MIP gap target")->check(CLI::Range(0.0, 0.999));
  cmd->add_option("--branching", f.branching, "pseudocost or fractional");
  cmd->add_flag("--no-plan", f.no_plan, "Skip the commitment-planning start hints");
}

void add_train_flags(CLI::App* cmd, TrainFlags& f, bool with_shape) {
  if (with_shape) {
    cmd->add_option("--hidden", f.hidden, "Hidden layer sizes, comma separated");
    cmd->add_option("--loss", f.loss, "Loss family")->check(CLI::IsMember({"l1", "l2"}));
    cmd->add_option("--cplus", f.cplus, "Weight on over-prediction")->check(CLI::PositiveNumber);
    cmd->add_option("--cminus", f.cminus, "Weight on under-prediction")->check(CLI::PositiveNumber);
  }
  cmd->add_option("--epochs", f.epochs, "Training epochs")->check(CLI::PositiveNumber);
  cmd->add_option("--batch", f.batch, "Mini-batch size")->check(CLI::PositiveNumber);
  cmd->add_option("--lr", f.lr, "Adam learning rate")->check(CLI::PositiveNumber);
  cmd->add_option("--train-seed", f.seed, "Training seed");
}

Dataset obtain_dataset(const SystemSpec& spec, const DataFlags& f) {
  if (!f.data.empty()) return load_dataset(f.data, sidecar_for(f.data));
  if (f.n == 0) throw UsageError("--n must be >= 1");
  return generate_dataset(spec, f.n, f.seed, SimConfig{}, worker_count());
}

int cmd_gen_data(const DataFlags& f, const std::string& out) {
  if (f.n == 0) throw UsageError("--n must be >= 1");
  const SystemSpec spec = load_system_spec_file(f.spec);
  const Dataset data = generate_dataset(spec, f.n, f.seed, SimConfig{}, worker_count());
  ensure_dir(out);
  save_dataset(data, out_path(out, "dataset.csv"), out_path(out, "dataset.json"));
  std::printf("samples,%zu,train,%zu,test,%zu,dropped,%zu\n", data.samples.size(), data.train_indices.size(),
              data.test_indices.size(), f.n - data.samples.size());
  return kExitOk;
}

int cmd_train(const std::string& data_path, const TrainFlags& f, const std::string& out) {
  const Dataset data = load_dataset(data_path, sidecar_for(data_path));
  const LossSpec loss{parse_loss_family(f.loss), f.cplus, f.cminus};
  const TrainResult res = train(data, Topology{0, parse_hidden(f.hidden)}, loss, make_train_config(f));
  const Metrics m = evaluate(res.params, data, Split::kTest);
  ensure_dir(out);
  save_model(TrainedModel{res.params, loss, f.seed}, out_path(out, "model.json"));
  std::printf("mae,%.6f,r2,%.6f,conservative_proportion,%.6f\n", m.mae, m.r2, m.conservative_proportion);
  return kExitOk;
}

int cmd_solve_uc(const std::string& spec_path, const std::string& model_path, const SolveFlags& f,
                 bool export_lp, const std::string& out) {
  const SystemSpec spec = load_system_spec_file(spec_path);
  std::optional<TrainedModel> model;
  if (!model_path.empty()) model = load_model(model_path);
  ensure_dir(out);
  std::ofstream log = open_out(out_path(out, "solver.log"));

  UcCase c;
  c.params = model ? &model->params : nullptr;
  c.nadir_floor = f.nadir_floor;
  c.solve = make_solve_config(f);
  c.solve.log = &log;
  c.plan_start = !f.no_plan;
  const UcOutcome outcome = solve_uc_case(spec, c);
  log.flush();
  if (export_lp) write_lp_file(out_path(out, "model.lp"), outcome.model);

  const MilpResult& r = outcome.result;
  if (r.status == MilpStatus::kInfeasible) {
    std::fprintf(stderr, "freqsec: UC model is infeasible (%zu variables, %zu constraints)%s\n",
                 outcome.model.num_variables(), outcome.model.num_constraints(),
                 model ? "; the nadir floor may be unreachable for this predictor" : "");
    return kExitInfeasible;
  }
  if (!outcome.solution) {
    std::fprintf(stderr, "freqsec: solver stopped (%s) after %llu nodes without a feasible schedule\n",
                 to_string(r.status).c_str(), static_cast<unsigned long long>(r.nodes));
    return kExitNoSolution;
  }
  {
    std::ofstream csv = open_out(out_path(out, "schedule.csv"));
    write_schedule_csv(csv, *outcome.solution);
    std::ofstream grid = open_out(out_path(out, "schedule.txt"));
    write_schedule_grid(grid, *outcome.solution, spec);
  }
  std::printf("status,%s,total_cost,%.6f,mip_gap,%.6g,nodes,%llu,time_s,%.3f,committed_unit_hours,%d\n",
              to_string(r.status).c_str(), r.objective, r.mip_gap, static_cast<unsigned long long>(r.nodes),
              outcome.total_time_s, outcome.solution->committed_unit_hours());
  return kExitOk;
}

int cmd_sweep(const std::string& mode_text, std::string grid, const DataFlags& df, const TrainFlags& tf,
              const SolveFlags& sf, bool no_solve, const std::string& out) {
  const SweepMode mode = parse_sweep_mode(mode_text);
  if (grid.empty()) grid = default_grid(mode);
  SweepConfig base;
  base.hidden = parse_hidden(tf.hidden);
  base.loss = LossSpec{parse_loss_family(tf.loss), tf.cplus, tf.cminus};
  const auto configs = parse_grid(mode, grid, base);

  const SystemSpec spec = load_system_spec_file(df.spec);
  const Dataset data = obtain_dataset(spec, df);
  SweepSettings settings;
  settings.train = make_train_config(tf);
  settings.uc.nadir_floor = sf.nadir_floor;
  settings.uc.solve = make_solve_config(sf);
  settings.uc.plan_start = !sf.no_plan;
  settings.solve = !no_solve;
  settings.workers = worker_count();
  const ExperimentReport report = run_sweep(spec, data, mode, configs, settings);

  ensure_dir(out);
  std::ofstream csv = open_out(out_path(out, "report.csv"));
  write_report_csv(csv, report);
  write_report_csv(std::cout, report);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frequency-secured unit commitment with a MILP-encoded nadir predictor"};
  app.require_subcommand(1);
  std::string out = "out";

  DataFlags gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Sample operating points and label their nadir");
  gen_cmd->add_option("--spec", gen.spec, "System spec JSON")->required()->check(CLI::ExistingFile);
  gen_cmd->add_option("--n", gen.n, "Operating points to sample")->required();
  gen_cmd->add_option("--seed", gen.seed, "Sampling and split seed");
  gen_cmd->add_option("--out", out, "Output directory");

  std::string train_data;
  TrainFlags train_flags;
  auto* train_cmd = app.add_subcommand("train", "Train the nadir predictor");
  train_cmd->add_option("--data", train_data, "dataset.csv (sidecar dataset.json beside it)")
      ->required()
      ->check(CLI::ExistingFile);
  add_train_flags(train_cmd, train_flags, true);
  train_cmd->add_option("--seed", train_flags.seed, "Training seed");
  train_cmd->add_option("--out", out, "Output directory");

  std::string solve_spec, solve_model;
  SolveFlags solve_flags;
  bool export_lp = false;
  auto* solve_cmd = app.add_subcommand("solve-uc", "Solve unit commitment, optionally frequency-constrained");
  solve_cmd->add_option("--spec", solve_spec, "System spec JSON")->required()->check(CLI::ExistingFile);
  solve_cmd->add_option("--model", solve_model, "Trained model.json; omit for plain UC")->check(CLI::ExistingFile);
  add_solve_flags(solve_cmd, solve_flags);
  solve_cmd->add_flag("--export-lp", export_lp, "Also write the model as model.lp");
  solve_cmd->add_option("--out", out, "Output directory");

  std::string sweep_mode, sweep_grid;
  DataFlags sweep_data;
  TrainFlags sweep_train;
  SolveFlags sweep_solve;
  bool no_solve = false;
  auto* sweep_cmd = app.add_subcommand("sweep", "Train, encode and solve a grid of configurations");
  sweep_cmd->add_option("--mode", sweep_mode, "loss, size or topology")
      ->required()
      ->check(CLI::IsMember({"loss", "size", "topology"}));
  sweep_cmd->add_option("--grid", sweep_grid, "Grid; default depends on --mode");
  sweep_cmd->add_option("--spec", sweep_data.spec, "System spec JSON")->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("--data", sweep_data.data, "Existing dataset.csv; otherwise one is generated")
      ->check(CLI::ExistingFile);
  sweep_cmd->add_option("--n", sweep_data.n, "Operating points when generating data");
  sweep_cmd->add_option("--seed", sweep_data.seed, "Data seed when generating data");
  add_train_flags(sweep_cmd, sweep_train, true);
  add_solve_flags(sweep_cmd, sweep_solve);
  sweep_cmd->add_flag("--no-solve", no_solve, "Train and evaluate only");
  sweep_cmd->add_option("--out", out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen_cmd) return cmd_gen_data(gen, out);
    if (*train_cmd) return cmd_train(train_data, train_flags, out);
    if (*solve_cmd) return cmd_solve_uc(solve_spec, solve_model, solve_flags, export_lp, out);
    if (*sweep_cmd) return cmd_sweep(sweep_mode, sweep_grid, sweep_data, sweep_train, sweep_solve, no_solve, out);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "freqsec: %s\n", e.what());
    return kExitUsage;
  } catch (const ParseError& e) {
    std::fprintf(stderr, "freqsec: %s\n", e.what());
    return kExitUsage;
  } catch (const InfeasibleModelError& e) {
    std::fprintf(stderr, "freqsec: %s\n", e.what());
    return kExitInfeasible;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "freqsec: %s\n", e.what());
    return kExitOther;
  }
  return kExitUsage;
}
