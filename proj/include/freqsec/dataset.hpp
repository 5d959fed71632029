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

// Operating-point sampling, nadir labelling and the predictor feature vector.
//
// The feature vector has 2 N_g entries: the commitment of every unit followed
// by a dispatch block that is zero except at the slot of the largest unit,
// which holds that unit's output scaled by the big-M constant.

#ifndef FREQSEC_DATASET_HPP_
#define FREQSEC_DATASET_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "freqsec/errors.hpp"
#include "freqsec/freq_sim.hpp"
#include "freqsec/rng.hpp"
#include "freqsec/system_model.hpp"
#include "json.hpp"

namespace freqsec {

struct FeatureVector {
  std::vector<double> x;

  std::size_t size() const { return x.size(); }
  double operator[](std::size_t i) const { return x[i]; }
  bool operator==(const FeatureVector&) const = default;
};

struct Sample {
  FeatureVector features;
  double label_nadir = 0.0;  // Hz
  // Absent for samples read back from CSV, which stores features only.
  std::optional<OperatingPoint> source_op;
};

struct Dataset {
  std::vector<Sample> samples;
  std::uint64_t split_seed = 0;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;

  // Provenance, written to the sidecar.
  std::size_t num_generators = 0;
  double gamma = 0.0;
  double f_nominal = 50.0;
  std::string spec_hash;
  std::size_t requested = 0;
  SimConfig sim;
};

enum class Split { kTrain, kTest, kAll };

inline std::vector<std::size_t> split_indices(const Dataset& data, Split split) {
  switch (split) {
    case Split::kTrain:
      return data.train_indices;
    case Split::kTest:
      return data.test_indices;
    case Split::kAll:
      break;
  }
  std::vector<std::size_t> all(data.samples.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return all;
}

inline FeatureVector build_feature_vector(const OperatingPoint& op, double gamma) {
  const std::size_t n = op.u.size();
  FeatureVector fv;
  fv.x.assign(2 * n, 0.0);
  for (std::size_t g = 0; g < n; ++g) fv.x[g] = op.u[g] == 1 ? 1.0 : 0.0;
  const std::size_t top = largest_committed_unit(op);
  if (top < n) fv.x[n + top] = op.p[top] / gamma;
  return fv;
}

/// 64-bit FNV-1a of the canonical spec JSON, as 16 hex digits.
inline std::string spec_hash(const SystemSpec& spec) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : emit_system_spec(spec)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace detail {

inline constexpr int kMaxSamplingRejections = 1000;

// Splits `load` over the committed units: every unit starts at p_min and the
// remainder is shared in proportion to jittered headroom, water-filling units
// that saturate at p_max.
inline std::vector<double> split_load(const SystemSpec& spec, const std::vector<int>& u, double load, Rng& rng) {
  const std::size_t n = spec.num_generators();
  std::vector<double> p(n, 0.0), weight(n, 0.0);
  double remainder = load;
  for (std::size_t g = 0; g < n; ++g) {
    if (u[g] != 1) continue;
    const auto& gen = spec.generators[g];
    p[g] = gen.p_min;
    remainder -= gen.p_min;
    weight[g] = (gen.p_max - gen.p_min) * rng.uniform(0.05, 1.95);
  }
  std::vector<bool> saturated(n, false);
  for (int pass = 0; pass < static_cast<int>(n) + 1 && remainder > 1e-9; ++pass) {
    double total = 0.0;
    for (std::size_t g = 0; g < n; ++g) {
      if (u[g] == 1 && !saturated[g]) total += weight[g];
    }
    if (total <= 0.0) {
      // Only zero-weight units left: share by remaining headroom.
      for (std::size_t g = 0; g < n; ++g) {
        if (u[g] == 1 && !saturated[g]) weight[g] = spec.generators[g].p_max - p[g];
        if (u[g] == 1 && !saturated[g]) total += weight[g];
      }
      if (total <= 0.0) break;
    }
    double overflow = 0.0;
    for (std::size_t g = 0; g < n; ++g) {
      if (u[g] != 1 || saturated[g]) continue;
      const double want = p[g] + remainder * weight[g] / total;
      const double cap = spec.generators[g].p_max;
      if (want >= cap) {
        overflow += want - cap;
        p[g] = cap;
        saturated[g] = true;
      } else {
        p[g] = want;
      }
    }
    remainder = overflow;
  }
  return p;
}

}  // namespace detail

/// Draws `n` valid operating points, deterministically from `seed`.
///
/// Each draw picks a load uniformly in [0.4, 1.0] x total capacity, then a
/// commitment uniformly among subsets with at least two units that can
/// serve it (rejection sampling), then splits the load across the units.
inline std::vector<OperatingPoint> sample_operating_points(const SystemSpec& spec, std::size_t n,
                                                           std::uint64_t seed) {
  if (n < 1) throw ValidationError({"sample_operating_points: n must be >= 1"});
  const std::size_t ng = spec.num_generators();
  if (ng < 2) throw SamplingError("sample_operating_points: need at least two generators");
  double capacity = 0.0;
  for (const auto& gen : spec.generators) capacity += gen.p_max;

  Rng rng(seed);
  std::vector<OperatingPoint> points;
  points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double load = rng.uniform(0.4, 1.0) * capacity;
    std::vector<int> u(ng, 0);
    bool found = false;
    for (int attempt = 0; attempt < detail::kMaxSamplingRejections && !found; ++attempt) {
      int count = 0;
      double hi = 0.0, lo = 0.0;
      for (std::size_t g = 0; g < ng; ++g) {
        u[g] = static_cast<int>(rng.next_u64() >> 63);
        if (u[g] == 1) {
          ++count;
          hi += spec.generators[g].p_max;
          lo += spec.generators[g].p_min;
        }
      }
      found = count >= 2 && hi >= load && lo <= load;
    }
    if (!found) {
      throw SamplingError("sample_operating_points: no commitment found for draw " + std::to_string(i) + " after " +
                          std::to_string(detail::kMaxSamplingRejections) + " rejections");
    }
    OperatingPoint op{u, detail::split_load(spec, u, load, rng)};
    points.push_back(std::move(op));
  }
  return points;
}

/// Samples, simulates and labels `n` operating points, drops unconverged
/// trajectories and splits the rest 80/20 by a seeded shuffle.
///
/// `threads` > 1 simulates in parallel; the result is identical either way.
inline Dataset generate_dataset(const SystemSpec& spec, std::size_t n, std::uint64_t seed, const SimConfig& cfg = {},
                                unsigned threads = 1) {
  const auto points = sample_operating_points(spec, n, seed);
  const double gamma = big_m_gamma(spec);

  std::vector<std::optional<double>> labels(points.size());
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const FrequencyTrace trace = simulate_contingency(spec, points[i], cfg);
      if (trace.converged) labels[i] = nadir(trace);
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(points.size())));
  if (threads == 1) {
    work(0, points.size());
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    const std::size_t chunk = (points.size() + threads - 1) / threads;
    for (unsigned w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        try {
          work(std::min(points.size(), w * chunk), std::min(points.size(), (w + 1) * chunk));
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  Dataset data;
  data.split_seed = seed;
  data.num_generators = spec.num_generators();
  data.gamma = gamma;
  data.f_nominal = spec.f_nominal;
  data.spec_hash = spec_hash(spec);
  data.requested = n;
  data.sim = cfg;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!labels[i]) continue;
    data.samples.push_back(Sample{build_feature_vector(points[i], gamma), *labels[i], points[i]});
  }
  if (data.samples.size() < 10) {
    throw SamplingError("generate_dataset: only " + std::to_string(data.samples.size()) +
                        " converged samples (need at least 10)");
  }

  std::vector<std::size_t> order(data.samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng split_rng(derive_seed(seed, 0x5157));
  split_rng.shuffle(std::span<std::size_t>(order));
  const auto n_train = static_cast<std::size_t>(std::llround(0.8 * static_cast<double>(order.size())));
  data.train_indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  data.test_indices.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  std::sort(data.train_indices.begin(), data.train_indices.end());
  std::sort(data.test_indices.begin(), data.test_indices.end());
  return data;
}

// --- files ---------------------------------------------------------------

/// Dataset CSV: "u_1..u_Ng,xp_1..xp_Ng,nadir_hz", one row per sample.
inline void write_dataset_csv(std::ostream& out, const Dataset& data) {
  const std::size_t n = data.num_generators;
  for (std::size_t g = 0; g < n; ++g) out << "u_" << g + 1 << ',';
  for (std::size_t g = 0; g < n; ++g) out << "xp_" << g + 1 << ',';
  out << "nadir_hz\n";
  char buf[40];
  for (const auto& s : data.samples) {
    for (std::size_t g = 0; g < n; ++g) out << (s.features.x[g] > 0.5 ? 1 : 0) << ',';
    for (std::size_t g = 0; g < n; ++g) {
      std::snprintf(buf, sizeof buf, "%.17g,", s.features.x[n + g]);
      out << buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g\n", s.label_nadir);
    out << buf;
  }
}

inline nlohmann::json dataset_sidecar(const Dataset& data) {
  nlohmann::json doc;
  doc["spec_hash"] = data.spec_hash;
  doc["seed"] = data.split_seed;
  doc["gamma_mw"] = data.gamma;
  doc["num_generators"] = data.num_generators;
  doc["f_nominal_hz"] = data.f_nominal;
  doc["requested_samples"] = data.requested;
  doc["sim"] = {{"dt_s", data.sim.dt}, {"horizon_s", data.sim.horizon}, {"integrator", "rk4"}};
  doc["train_indices"] = data.train_indices;
  doc["test_indices"] = data.test_indices;
  return doc;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

/// Reads a dataset CSV and its sidecar JSON back. Samples carry no source_op.
inline Dataset read_dataset(std::istream& csv, std::istream& sidecar) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(sidecar);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("dataset sidecar: ") + e.what());
  }
  Dataset data;
  try {
    data.spec_hash = doc.at("spec_hash").get<std::string>();
    data.split_seed = doc.at("seed").get<std::uint64_t>();
    data.gamma = doc.at("gamma_mw").get<double>();
    data.num_generators = doc.at("num_generators").get<std::size_t>();
    data.f_nominal = doc.at("f_nominal_hz").get<double>();
    data.requested = doc.at("requested_samples").get<std::size_t>();
    data.sim.dt = doc.at("sim").at("dt_s").get<double>();
    data.sim.horizon = doc.at("sim").at("horizon_s").get<double>();
    data.train_indices = doc.at("train_indices").get<std::vector<std::size_t>>();
    data.test_indices = doc.at("test_indices").get<std::vector<std::size_t>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("dataset sidecar: ") + e.what());
  }

  const std::size_t n = data.num_generators;
  std::string line;
  if (!std::getline(csv, line)) throw ParseError("dataset csv: missing header");
  if (split_csv_line(line).size() != 2 * n + 1) {
    throw ParseError("dataset csv: header has wrong column count for " + std::to_string(n) + " generators");
  }
  std::size_t row = 1;
  while (std::getline(csv, line)) {
    ++row;
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 2 * n + 1) throw ParseError("dataset csv: line " + std::to_string(row) + ": wrong column count");
    Sample s;
    s.features.x.resize(2 * n);
    try {
      for (std::size_t m = 0; m < 2 * n; ++m) s.features.x[m] = std::stod(cells[m]);
      s.label_nadir = std::stod(cells[2 * n]);
    } catch (const std::exception&) {
      throw ParseError("dataset csv: line " + std::to_string(row) + ": non-numeric cell");
    }
    data.samples.push_back(std::move(s));
  }
  for (auto idx : data.train_indices) {
    if (idx >= data.samples.size()) throw ParseError("dataset sidecar: train index out of range");
  }
  for (auto idx : data.test_indices) {
    if (idx >= data.samples.size()) throw ParseError("dataset sidecar: test index out of range");
  }
  return data;
}

inline void save_dataset(const Dataset& data, const std::string& csv_path, const std::string& sidecar_path) {
  std::ofstream csv(csv_path, std::ios::binary);
  if (!csv) throw Error("cannot write '" + csv_path + "'");
  write_dataset_csv(csv, data);
  std::ofstream side(sidecar_path, std::ios::binary);
  if (!side) throw Error("cannot write '" + sidecar_path + "'");
  side << dataset_sidecar(data).dump(2) << '\n';
}

inline Dataset load_dataset(const std::string& csv_path, const std::string& sidecar_path) {
  std::ifstream csv(csv_path);
  if (!csv) throw Error("cannot open '" + csv_path + "'");
  std::ifstream side(sidecar_path);
  if (!side) throw Error("cannot open '" + sidecar_path + "'");
  return read_dataset(csv, side);
}

}  // namespace freqsec

#endif  // FREQSEC_DATASET_HPP_
