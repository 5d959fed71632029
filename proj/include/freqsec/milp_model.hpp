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

// In-memory mixed-integer linear model: named bounded variables (continuous
// or binary), sparse linear rows and a linear minimisation objective.

#ifndef FREQSEC_MILP_MODEL_HPP_
#define FREQSEC_MILP_MODEL_HPP_

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "freqsec/errors.hpp"

namespace freqsec {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct VarId {
  std::size_t index = 0;
  auto operator<=>(const VarId&) const = default;
};

enum class VarKind { kContinuous, kBinary };
enum class Sense { kLessEqual, kEqual, kGreaterEqual };

struct Variable {
  std::string name;
  VarKind kind = VarKind::kContinuous;
  double lower = 0.0;
  double upper = kInf;
};

struct Term {
  VarId var;
  double coef = 0.0;
};

struct Constraint {
  std::string name;
  std::vector<Term> terms;
  Sense sense = Sense::kLessEqual;
  double rhs = 0.0;
};

class MilpModel {
 public:
  VarId add_variable(const std::string& name, VarKind kind, double lower, double upper) {
    if (index_.contains(name)) throw ValidationError({"model: duplicate variable name '" + name + "'"});
    if (kind == VarKind::kBinary) {
      lower = std::max(lower, 0.0);
      upper = std::min(upper, 1.0);
    }
    if (lower > upper) throw ValidationError({"model: variable '" + name + "' has lower > upper"});
    VarId id{variables_.size()};
    variables_.push_back(Variable{name, kind, lower, upper});
    objective_.push_back(0.0);
    index_.emplace(name, id.index);
    return id;
  }

  VarId add_continuous(const std::string& name, double lower = 0.0, double upper = kInf) {
    return add_variable(name, VarKind::kContinuous, lower, upper);
  }

  VarId add_binary(const std::string& name) { return add_variable(name, VarKind::kBinary, 0.0, 1.0); }

  std::size_t add_constraint(std::string name, std::vector<Term> terms, Sense sense, double rhs) {
    for (const auto& t : terms) {
      if (t.var.index >= variables_.size()) {
        throw ValidationError({"model: constraint '" + name + "' references an undeclared variable"});
      }
    }
    constraints_.push_back(Constraint{std::move(name), std::move(terms), sense, rhs});
    return constraints_.size() - 1;
  }

  void set_objective(VarId var, double coef) { objective_.at(var.index) = coef; }
  void add_objective(VarId var, double coef) { objective_.at(var.index) += coef; }
  void set_objective_offset(double offset) { objective_offset_ = offset; }

  void set_bounds(VarId var, double lower, double upper) {
    auto& v = variables_.at(var.index);
    v.lower = lower;
    v.upper = upper;
  }

  std::optional<VarId> find(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) return std::nullopt;
    return VarId{it->second};
  }

  VarId at(const std::string& name) const {
    auto id = find(name);
    if (!id) throw ValidationError({"model: no variable named '" + name + "'"});
    return *id;
  }

  const Variable& variable(VarId id) const { return variables_.at(id.index); }
  const std::vector<Variable>& variables() const { return variables_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }
  const std::vector<double>& objective() const { return objective_; }
  double objective_offset() const { return objective_offset_; }

  std::size_t num_variables() const { return variables_.size(); }
  std::size_t num_constraints() const { return constraints_.size(); }
  std::size_t num_binaries() const {
    std::size_t n = 0;
    for (const auto& v : variables_) n += v.kind == VarKind::kBinary ? 1 : 0;
    return n;
  }

  double evaluate_objective(const std::vector<double>& x) const {
    double total = objective_offset_;
    for (std::size_t j = 0; j < objective_.size(); ++j) total += objective_[j] * x[j];
    return total;
  }

  /// Largest bound, row or integrality violation of `x`.
  double max_violation(const std::vector<double>& x) const {
    double worst = 0.0;
    for (std::size_t j = 0; j < variables_.size(); ++j) {
      const auto& v = variables_[j];
      worst = std::max({worst, v.lower - x[j], x[j] - v.upper});
      if (v.kind == VarKind::kBinary) worst = std::max(worst, std::abs(x[j] - std::round(x[j])));
    }
    for (const auto& c : constraints_) {
      double lhs = 0.0;
      for (const auto& t : c.terms) lhs += t.coef * x[t.var.index];
      switch (c.sense) {
        case Sense::kLessEqual:
          worst = std::max(worst, lhs - c.rhs);
          break;
        case Sense::kGreaterEqual:
          worst = std::max(worst, c.rhs - lhs);
          break;
        case Sense::kEqual:
          worst = std::max(worst, std::abs(lhs - c.rhs));
          break;
      }
    }
    return worst;
  }

 private:
  std::vector<Variable> variables_;
  std::vector<Constraint> constraints_;
  std::vector<double> objective_;
  double objective_offset_ = 0.0;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace freqsec

#endif  // FREQSEC_MILP_MODEL_HPP_
