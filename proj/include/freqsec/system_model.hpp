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

// Power-system data model: generators, load profile and frequency-security
// threshold, plus the JSON system-spec file format.

#ifndef FREQSEC_SYSTEM_MODEL_HPP_
#define FREQSEC_SYSTEM_MODEL_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "freqsec/errors.hpp"
#include "json.hpp"

namespace freqsec {

struct GeneratorSpec {
  std::string id;
  double p_min = 0.0;  // MW
  double p_max = 0.0;  // MW
  double ramp_up = 0.0;    // MW per step
  double ramp_down = 0.0;  // MW per step
  int min_up = 1;    // steps
  int min_down = 1;  // steps
  double cost_fixed = 0.0;     // currency per committed step
  double cost_marginal = 0.0;  // currency per MWh
  double cost_startup = 0.0;   // currency per start
  double inertia_h = 1.0;   // s, machine base
  double droop_r = 0.05;    // pu, machine base
  double governor_t = 1.0;  // s
  double mva_base = 100.0;  // MVA

  bool operator==(const GeneratorSpec&) const = default;
};

struct SystemSpec {
  std::vector<GeneratorSpec> generators;
  std::vector<double> load_profile;  // MW per step
  double f_nominal = 50.0;           // Hz
  double nadir_limit = 49.2;         // Hz
  double load_damping_d = 1.0;       // pu on system base
  double system_mva_base = 100.0;    // MVA

  std::size_t num_generators() const { return generators.size(); }
  std::size_t horizon() const { return load_profile.size(); }

  bool operator==(const SystemSpec&) const = default;
};

/// Commitment and dispatch of every generator at one instant.
struct OperatingPoint {
  std::vector<int> u;     // 0/1
  std::vector<double> p;  // MW

  bool operator==(const OperatingPoint&) const = default;
};

/// Every violated invariant of `spec`, empty when valid.
inline std::vector<std::string> check_system_spec(const SystemSpec& spec) {
  std::vector<std::string> out;
  if (spec.generators.empty()) out.push_back("system has no generators");
  if (spec.load_profile.empty()) out.push_back("load_profile must have at least one step");
  std::set<std::string> ids;
  for (std::size_t g = 0; g < spec.generators.size(); ++g) {
    const auto& gen = spec.generators[g];
    const std::string who = "generator '" + gen.id + "' (#" + std::to_string(g) + ")";
    if (!ids.insert(gen.id).second) out.push_back(who + ": duplicate id");
    if (!(gen.p_min >= 0.0)) out.push_back(who + ": p_min must be >= 0");
    if (!(gen.p_min <= gen.p_max)) out.push_back(who + ": p_min > p_max");
    if (!(gen.p_max > 0.0)) out.push_back(who + ": p_max must be > 0");
    if (!(gen.ramp_up >= 0.0) || !(gen.ramp_down >= 0.0)) out.push_back(who + ": ramps must be >= 0");
    if (gen.min_up < 1 || gen.min_down < 1) out.push_back(who + ": min_up and min_down must be >= 1");
    if (!(gen.inertia_h > 0.0)) out.push_back(who + ": inertia_h must be > 0");
    if (!(gen.droop_r > 0.0)) out.push_back(who + ": droop_r must be > 0");
    if (!(gen.governor_t > 0.0)) out.push_back(who + ": governor_t must be > 0");
    if (!(gen.mva_base > 0.0)) out.push_back(who + ": mva_base must be > 0");
    if (!(gen.cost_fixed >= 0.0) || !(gen.cost_marginal >= 0.0) || !(gen.cost_startup >= 0.0)) {
      out.push_back(who + ": costs must be >= 0");
    }
  }
  double capacity = 0.0;
  for (const auto& gen : spec.generators) capacity += gen.p_max;
  for (std::size_t t = 0; t < spec.load_profile.size(); ++t) {
    const double load = spec.load_profile[t];
    if (!std::isfinite(load) || load < 0.0) {
      out.push_back("load_profile[" + std::to_string(t) + "] must be finite and >= 0");
    } else if (load > capacity) {
      out.push_back("infeasible load at step " + std::to_string(t) + ": " + std::to_string(load) +
                    " MW exceeds total capacity " + std::to_string(capacity) + " MW");
    }
  }
  if (!(spec.f_nominal > 0.0)) out.push_back("f_nominal_hz must be > 0");
  if (!(spec.nadir_limit < spec.f_nominal)) out.push_back("nadir_limit_hz must be below f_nominal_hz");
  if (!(spec.load_damping_d >= 0.0)) out.push_back("load_damping_d must be >= 0");
  if (!(spec.system_mva_base > 0.0)) out.push_back("system_mva_base must be > 0");
  return out;
}

inline void validate(const SystemSpec& spec) {
  auto violations = check_system_spec(spec);
  if (!violations.empty()) throw ValidationError(std::move(violations));
}

namespace detail {

inline std::string line_context(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

inline double number_field(const nlohmann::json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) throw ParseError(where + ": missing field '" + key + "'");
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ParseError(where + ": field '" + key + "' must be a number");
  return v.get<double>();
}

inline int integer_field(const nlohmann::json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) throw ParseError(where + ": missing field '" + key + "'");
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) throw ParseError(where + ": field '" + key + "' must be an integer");
  return v.get<int>();
}

inline void reject_unknown_keys(const nlohmann::json& obj, const std::set<std::string>& allowed,
                                const std::string& where) {
  for (const auto& item : obj.items()) {
    if (!allowed.contains(item.key())) throw ParseError(where + ": unknown key '" + item.key() + "'");
  }
}

}  // namespace detail

/// Parses and validates a JSON system spec.
///
/// Throws ParseError for malformed text (with line/column), wrong types,
/// missing or unknown keys; throws ValidationError listing every violated
/// invariant otherwise.
inline SystemSpec load_system_spec(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("system spec: " + detail::line_context(text, e.byte == 0 ? 0 : e.byte - 1) + ": " +
                     e.what());
  }
  if (!doc.is_object()) throw ParseError("system spec: top level must be an object");
  detail::reject_unknown_keys(doc,
                              {"f_nominal_hz", "nadir_limit_hz", "load_damping_d", "system_mva_base",
                               "load_profile_mw", "generators"},
                              "system spec");
  SystemSpec spec;
  spec.f_nominal = detail::number_field(doc, "f_nominal_hz", "system spec");
  spec.nadir_limit = detail::number_field(doc, "nadir_limit_hz", "system spec");
  spec.load_damping_d = detail::number_field(doc, "load_damping_d", "system spec");
  spec.system_mva_base = detail::number_field(doc, "system_mva_base", "system spec");

  if (!doc.contains("load_profile_mw") || !doc["load_profile_mw"].is_array()) {
    throw ParseError("system spec: 'load_profile_mw' must be an array");
  }
  for (std::size_t t = 0; t < doc["load_profile_mw"].size(); ++t) {
    const auto& v = doc["load_profile_mw"][t];
    if (!v.is_number()) throw ParseError("system spec: load_profile_mw[" + std::to_string(t) + "] must be a number");
    spec.load_profile.push_back(v.get<double>());
  }

  if (!doc.contains("generators") || !doc["generators"].is_array()) {
    throw ParseError("system spec: 'generators' must be an array");
  }
  const std::set<std::string> gen_keys = {"id",        "p_min",      "p_max",        "ramp_up",
                                          "ramp_down", "min_up",     "min_down",     "cost_fixed",
                                          "cost_marginal", "cost_startup", "inertia_h", "droop_r",
                                          "governor_t", "mva_base"};
  for (std::size_t g = 0; g < doc["generators"].size(); ++g) {
    const auto& obj = doc["generators"][g];
    const std::string where = "generators[" + std::to_string(g) + "]";
    if (!obj.is_object()) throw ParseError(where + ": must be an object");
    detail::reject_unknown_keys(obj, gen_keys, where);
    GeneratorSpec gen;
    if (!obj.contains("id") || !obj["id"].is_string()) throw ParseError(where + ": field 'id' must be a string");
    gen.id = obj["id"].get<std::string>();
    gen.p_min = detail::number_field(obj, "p_min", where);
    gen.p_max = detail::number_field(obj, "p_max", where);
    gen.ramp_up = detail::number_field(obj, "ramp_up", where);
    gen.ramp_down = detail::number_field(obj, "ramp_down", where);
    gen.min_up = detail::integer_field(obj, "min_up", where);
    gen.min_down = detail::integer_field(obj, "min_down", where);
    gen.cost_fixed = detail::number_field(obj, "cost_fixed", where);
    gen.cost_marginal = detail::number_field(obj, "cost_marginal", where);
    gen.cost_startup = detail::number_field(obj, "cost_startup", where);
    gen.inertia_h = detail::number_field(obj, "inertia_h", where);
    gen.droop_r = detail::number_field(obj, "droop_r", where);
    gen.governor_t = detail::number_field(obj, "governor_t", where);
    gen.mva_base = detail::number_field(obj, "mva_base", where);
    spec.generators.push_back(std::move(gen));
  }
  validate(spec);
  return spec;
}

inline SystemSpec load_system_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open system spec '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return load_system_spec(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

inline nlohmann::json to_json(const SystemSpec& spec) {
  nlohmann::json doc;
  doc["f_nominal_hz"] = spec.f_nominal;
  doc["nadir_limit_hz"] = spec.nadir_limit;
  doc["load_damping_d"] = spec.load_damping_d;
  doc["system_mva_base"] = spec.system_mva_base;
  doc["load_profile_mw"] = spec.load_profile;
  doc["generators"] = nlohmann::json::array();
  for (const auto& gen : spec.generators) {
    doc["generators"].push_back({{"id", gen.id},
                                 {"p_min", gen.p_min},
                                 {"p_max", gen.p_max},
                                 {"ramp_up", gen.ramp_up},
                                 {"ramp_down", gen.ramp_down},
                                 {"min_up", gen.min_up},
                                 {"min_down", gen.min_down},
                                 {"cost_fixed", gen.cost_fixed},
                                 {"cost_marginal", gen.cost_marginal},
                                 {"cost_startup", gen.cost_startup},
                                 {"inertia_h", gen.inertia_h},
                                 {"droop_r", gen.droop_r},
                                 {"governor_t", gen.governor_t},
                                 {"mva_base", gen.mva_base}});
  }
  return doc;
}

/// Canonical JSON text (sorted keys, round-trip exact numbers).
inline std::string emit_system_spec(const SystemSpec& spec) { return to_json(spec).dump(2); }

/// Big-M constant for the argmax/dispatch-feature linking: 1.01 x largest p_max.
inline double big_m_gamma(const SystemSpec& spec) {
  double largest = 0.0;
  for (const auto& gen : spec.generators) largest = std::max(largest, gen.p_max);
  return 1.01 * largest;
}

/// Inertia constant rebased to the system MVA base.
inline double rebased_inertia(const SystemSpec& spec, const GeneratorSpec& gen) {
  return gen.inertia_h * gen.mva_base / spec.system_mva_base;
}

/// Governor frequency-response gain 1/R on the system MVA base.
inline double governor_gain(const SystemSpec& spec, const GeneratorSpec& gen) {
  return (1.0 / gen.droop_r) * gen.mva_base / spec.system_mva_base;
}

/// Every violated OperatingPoint invariant, empty when valid.
inline std::vector<std::string> check_operating_point(const SystemSpec& spec, const OperatingPoint& op,
                                                      double tol = 1e-9) {
  std::vector<std::string> out;
  const std::size_t n = spec.num_generators();
  if (op.u.size() != n || op.p.size() != n) {
    out.push_back("operating point dimension " + std::to_string(op.u.size()) + "/" + std::to_string(op.p.size()) +
                  " does not match " + std::to_string(n) + " generators");
    return out;
  }
  bool any_on = false;
  for (std::size_t g = 0; g < n; ++g) {
    const auto& gen = spec.generators[g];
    if (op.u[g] != 0 && op.u[g] != 1) {
      out.push_back("u[" + std::to_string(g) + "] is not binary");
      continue;
    }
    if (op.u[g] == 0 && op.p[g] != 0.0) out.push_back("p[" + std::to_string(g) + "] nonzero while uncommitted");
    if (op.u[g] == 1) {
      any_on = true;
      if (op.p[g] < gen.p_min - tol || op.p[g] > gen.p_max + tol) {
        out.push_back("p[" + std::to_string(g) + "] outside [p_min, p_max]");
      }
    }
  }
  if (!any_on) out.push_back("no generator committed");
  return out;
}

/// Committed generator with the largest output; ties go to the lowest index.
/// Returns num_generators() when nothing is committed.
inline std::size_t largest_committed_unit(const OperatingPoint& op) {
  std::size_t best = op.p.size();
  for (std::size_t g = 0; g < op.p.size(); ++g) {
    if (op.u[g] != 1) continue;
    if (best == op.p.size() || op.p[g] > op.p[best]) best = g;
  }
  return best;
}

}  // namespace freqsec

#endif  // FREQSEC_SYSTEM_MODEL_HPP_
