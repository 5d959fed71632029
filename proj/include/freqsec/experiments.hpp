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

// End-to-end pipeline (train, encode, solve) and the three sweep families:
// loss weighting, hidden-layer size and topology.

#ifndef FREQSEC_EXPERIMENTS_HPP_
#define FREQSEC_EXPERIMENTS_HPP_

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "freqsec/dataset.hpp"
#include "freqsec/errors.hpp"
#include "freqsec/milp_encode.hpp"
#include "freqsec/milp_solver.hpp"
#include "freqsec/mlp.hpp"
#include "freqsec/system_model.hpp"
#include "freqsec/uc_heuristic.hpp"
#include "freqsec/uc_model.hpp"

namespace freqsec {

/// Worker cap: FREQSEC_THREADS when set to a positive integer, otherwise the
/// hardware concurrency.
inline unsigned worker_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("FREQSEC_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) n = std::min<unsigned>(n, static_cast<unsigned>(v));
  }
  return n;
}

inline SolveConfig default_plan_step_config() {
  SolveConfig cfg;
  cfg.time_limit = 5.0;
  cfg.node_limit = 5000;
  return cfg;
}

struct UcCase {
  const MlpParams* params = nullptr;  // null for the unconstrained case
  std::optional<double> nadir_floor;  // defaults to the spec's limit
  SolveConfig solve;
  bool plan_start = true;
  SolveConfig plan_step = default_plan_step_config();  // per single-step pricing solve
};

struct UcOutcome {
  MilpModel model;
  MilpResult result;
  std::optional<UcSolution> solution;
  std::optional<double> plan_cost;
  double total_time_s = 0.0;  // planning plus search
};

/// Builds the UC model (with frequency blocks when a network is given),
/// seeds it with start hints and solves it.
inline UcOutcome solve_uc_case(const SystemSpec& spec, const UcCase& c) {
  const auto started = std::chrono::steady_clock::now();
  UcOutcome out;
  const double floor = c.nadir_floor.value_or(spec.nadir_limit);
  out.model = build_uc(spec);
  std::optional<ActivationBounds> bounds;
  if (c.params != nullptr) {
    bounds = compute_activation_bounds(*c.params);
    out.model = attach_frequency_constraints(std::move(out.model), spec, *c.params, *bounds, floor);
  }
  SolveConfig cfg = c.solve;
  if (c.plan_start) {
    PlanPredictor predictor;
    if (c.params != nullptr) predictor = PlanPredictor{c.params, &*bounds, floor};
    if (auto plan = plan_commitment(spec, predictor, c.plan_step)) {
      out.plan_cost = plan->estimated_cost;
      for (auto& hint : plan_hints(out.model, spec, *plan)) cfg.starts.push_back(std::move(hint));
    }
    std::vector<std::vector<int>> all_on(spec.num_generators(), std::vector<int>(spec.horizon(), 1));
    cfg.starts.push_back(commitment_hint(out.model, spec, all_on));
  }
  out.result = solve_milp(out.model, cfg);
  if (out.result.has_incumbent()) out.solution = extract_solution(out.model, spec, out.result.x, cfg.integrality_tol);
  out.total_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return out;
}

// --- sweeps ----------------------------------------------------------------

enum class SweepMode { kLoss, kSize, kTopology };

inline std::string to_string(SweepMode mode) {
  switch (mode) {
    case SweepMode::kLoss:
      return "loss";
    case SweepMode::kSize:
      return "size";
    case SweepMode::kTopology:
      return "topology";
  }
  return "?";
}

inline SweepMode parse_sweep_mode(const std::string& text) {
  if (text == "loss") return SweepMode::kLoss;
  if (text == "size") return SweepMode::kSize;
  if (text == "topology") return SweepMode::kTopology;
  throw ParseError("unknown sweep mode '" + text + "' (expected loss, size or topology)");
}

/// One sweep configuration: network shape and loss.
struct SweepConfig {
  std::string label;
  std::vector<std::size_t> hidden;
  LossSpec loss;
};

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(s);
  while (std::getline(ss, cell, sep)) out.push_back(trim(cell));
  if (!s.empty() && s.back() == sep) out.push_back("");
  return out;
}

inline std::size_t parse_count(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || v < 1) throw ParseError(what + ": '" + text + "' is not a positive integer");
  return static_cast<std::size_t>(v);
}

inline double parse_positive(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || !(v > 0.0) || !std::isfinite(v)) {
    throw ParseError(what + ": '" + text + "' is not a positive number");
  }
  return v;
}

/// "16,16" -> {16, 16}.
inline std::vector<std::size_t> parse_hidden(const std::string& text) {
  std::vector<std::size_t> hidden;
  for (const auto& cell : split(text, ',')) hidden.push_back(parse_count(cell, "hidden sizes"));
  if (hidden.empty()) throw ParseError("hidden sizes: empty list");
  return hidden;
}

inline std::string topology_label(const std::vector<std::size_t>& hidden) {
  std::string s = "[";
  for (std::size_t i = 0; i < hidden.size(); ++i) s += (i ? "," : "") + std::to_string(hidden[i]);
  return s + "]";
}

inline std::string loss_label(const LossSpec& loss) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%s:%g:%g", to_string(loss.family).c_str(), loss.c_plus, loss.c_minus);
  return buf;
}

/// Expands a grid for `mode`. Size grids are "2,4,8,32"; topology grids
/// are "[32];[16,16];[8,24]"; loss grids are "l1:1;l1:5;l2:1:1" with
/// entries family:c_plus[:c_minus] (c_minus defaults to 1). `base` supplies
/// the fields a mode does not vary.
inline std::vector<SweepConfig> parse_grid(SweepMode mode, const std::string& grid, const SweepConfig& base) {
  std::vector<SweepConfig> out;
  if (trim(grid).empty()) throw ParseError("grid: empty");
  switch (mode) {
    case SweepMode::kSize:
      for (const auto& cell : split(grid, ',')) {
        SweepConfig c = base;
        c.hidden = {parse_count(cell, "size grid")};
        c.label = std::to_string(c.hidden[0]);
        out.push_back(std::move(c));
      }
      break;
    case SweepMode::kTopology:
      for (const auto& cell : split(grid, ';')) {
        if (cell.size() < 3 || cell.front() != '[' || cell.back() != ']') {
          throw ParseError("topology grid: expected [a,b,...], got '" + cell + "'");
        }
        SweepConfig c = base;
        c.hidden = parse_hidden(cell.substr(1, cell.size() - 2));
        c.label = topology_label(c.hidden);
        out.push_back(std::move(c));
      }
      break;
    case SweepMode::kLoss:
      for (const auto& cell : split(grid, ';')) {
        const auto parts = split(cell, ':');
        if (parts.size() < 2 || parts.size() > 3) {
          throw ParseError("loss grid: expected family:c_plus[:c_minus], got '" + cell + "'");
        }
        SweepConfig c = base;
        c.loss.family = parse_loss_family(parts[0]);
        c.loss.c_plus = parse_positive(parts[1], "loss grid c_plus");
        c.loss.c_minus = parts.size() == 3 ? parse_positive(parts[2], "loss grid c_minus") : 1.0;
        c.label = loss_label(c.loss);
        out.push_back(std::move(c));
      }
      break;
  }
  return out;
}

inline std::string default_grid(SweepMode mode) {
  switch (mode) {
    case SweepMode::kLoss:
      return "l1:1;l1:5;l2:1;l2:5";
    case SweepMode::kSize:
      return "2,4,8,32";
    case SweepMode::kTopology:
      return "[32];[16,16];[8,24];[16,8,8]";
  }
  return "";
}

struct ReportRow {
  std::string config;
  std::optional<double> mae;
  std::optional<double> r2;
  std::optional<double> conservative_proportion;
  std::optional<double> solve_time_s;
  std::optional<double> mip_gap;
  std::optional<double> total_cost;
  std::string status;
};

struct ExperimentReport {
  SweepMode mode = SweepMode::kSize;
  std::vector<std::string> header;  // written as "# " comment lines
  std::vector<ReportRow> rows;
};

struct SweepSettings {
  TrainConfig train;
  UcCase uc;  // params is filled per configuration
  bool solve = true;
  unsigned workers = 1;
};

/// Trains, evaluates on the test split, encodes and solves one
/// configuration. Failures become a row whose status starts with "error".
inline ReportRow run_configuration(const SystemSpec& spec, const Dataset& data, const SweepConfig& config,
                                   const SweepSettings& settings) {
  ReportRow row;
  row.config = config.label;
  try {
    const TrainResult trained = train(data, Topology{0, config.hidden}, config.loss, settings.train);
    const Metrics m = evaluate(trained.params, data, Split::kTest);
    row.mae = m.mae;
    row.r2 = m.r2;
    row.conservative_proportion = m.conservative_proportion;
    if (!settings.solve) {
      row.status = "trained";
      return row;
    }
    UcCase c = settings.uc;
    c.params = &trained.params;
    const UcOutcome outcome = solve_uc_case(spec, c);
    row.solve_time_s = outcome.total_time_s;
    row.status = to_string(outcome.result.status);
    if (outcome.result.has_incumbent()) {
      row.total_cost = outcome.result.objective;
      row.mip_gap = outcome.result.mip_gap;
    }
  } catch (const std::exception& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    row.status = "error: " + msg;
  }
  return row;
}

/// Runs every configuration against the same data and budget, up to
/// `settings.workers` at a time; rows keep request order.
inline ExperimentReport run_sweep(const SystemSpec& spec, const Dataset& data, SweepMode mode,
                                  const std::vector<SweepConfig>& configs, const SweepSettings& settings) {
  ExperimentReport report;
  report.mode = mode;
  report.rows.resize(configs.size());
  const unsigned workers =
      std::max(1u, std::min<unsigned>(settings.workers, static_cast<unsigned>(configs.size())));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      report.rows[i] = run_configuration(spec, data, configs[i], settings);
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  char buf[256];
  report.header.push_back("mode " + to_string(mode));
  std::snprintf(buf, sizeof buf, "budget time_limit_s=%g node_limit=%s workers=%u", settings.uc.solve.time_limit,
                settings.uc.solve.node_limit == std::numeric_limits<std::uint64_t>::max()
                    ? "none"
                    : std::to_string(settings.uc.solve.node_limit).c_str(),
                workers);
  report.header.push_back(buf);
  std::snprintf(buf, sizeof buf, "data samples=%zu train=%zu test=%zu seed=%llu", data.samples.size(),
                data.train_indices.size(), data.test_indices.size(),
                static_cast<unsigned long long>(data.split_seed));
  report.header.push_back(buf);
  std::snprintf(buf, sizeof buf, "train epochs=%zu batch=%zu lr=%g seed=%llu", settings.train.epochs,
                settings.train.batch_size, settings.train.learning_rate,
                static_cast<unsigned long long>(settings.train.seed));
  report.header.push_back(buf);
  return report;
}

inline std::string csv_cell(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string number_cell(const std::optional<double>& v) {
  if (!v || !std::isfinite(*v)) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", *v);
  return buf;
}

inline void write_report_csv(std::ostream& out, const ExperimentReport& report) {
  for (const auto& line : report.header) out << "# " << line << '\n';
  out << "config,mae,r2,conservative_proportion,solve_time_s,mip_gap,total_cost,status\n";
  for (const auto& row : report.rows) {
    out << csv_cell(row.config) << ',' << number_cell(row.mae) << ',' << number_cell(row.r2) << ','
        << number_cell(row.conservative_proportion) << ',' << number_cell(row.solve_time_s) << ','
        << number_cell(row.mip_gap) << ',' << number_cell(row.total_cost) << ',' << csv_cell(row.status) << '\n';
  }
}

}  // namespace freqsec

#endif  // FREQSEC_EXPERIMENTS_HPP_
