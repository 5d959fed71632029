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

// CPLEX-style LP file writer, plus a reader for the subset it writes.

#ifndef FREQSEC_LP_FORMAT_HPP_
#define FREQSEC_LP_FORMAT_HPP_

#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "freqsec/errors.hpp"
#include "freqsec/milp_model.hpp"

namespace freqsec {

namespace detail {

inline std::string lp_number(double v) {
  if (v == kInf) return "+inf";
  if (v == -kInf) return "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline bool lp_valid_name(const std::string& name) {
  if (name.empty() || name.size() > 255) return false;
  const char c0 = name.front();
  if (std::isdigit(static_cast<unsigned char>(c0)) || c0 == '.' || c0 == 'e' || c0 == 'E') return false;
  for (char c : name) {
    const auto u = static_cast<unsigned char>(c);
    if (!(std::isalnum(u) || c == '_' || c == '.' || c == '[' || c == ']' || c == '#')) return false;
  }
  return true;
}

// Appends " + c name" terms, breaking lines so none grows unreasonably long.
inline void lp_terms(std::ostringstream& out, const std::vector<std::pair<double, const std::string*>>& terms) {
  std::size_t on_line = 0;
  for (const auto& [coef, name] : terms) {
    if (on_line == 6) {
      out << "\n   ";
      on_line = 0;
    }
    out << (coef < 0 || std::signbit(coef) ? " - " : " + ") << lp_number(std::abs(coef)) << ' ' << *name;
    ++on_line;
  }
}

}  // namespace detail

/// Renders `model` as LP text. Every variable appears in the objective
/// (with coefficient 0 where absent) so a reader recovers the column order.
inline std::string export_lp_format(const MilpModel& model) {
  for (const auto& v : model.variables()) {
    if (!detail::lp_valid_name(v.name)) throw ValidationError({"lp export: invalid variable name '" + v.name + "'"});
  }
  std::ostringstream out;
  out << "\\ freqsec MILP: " << model.num_variables() << " variables, " << model.num_constraints()
      << " constraints\n";
  out << "Minimize\n obj:";
  std::vector<std::pair<double, const std::string*>> terms;
  for (std::size_t j = 0; j < model.num_variables(); ++j) {
    terms.emplace_back(model.objective()[j], &model.variables()[j].name);
  }
  detail::lp_terms(out, terms);
  if (model.objective_offset() != 0.0) {
    out << (model.objective_offset() < 0 ? " - " : " + ") << detail::lp_number(std::abs(model.objective_offset()));
  }
  out << "\nSubject To\n";
  std::unordered_set<std::string> used;
  for (std::size_t i = 0; i < model.num_constraints(); ++i) {
    const auto& c = model.constraints()[i];
    std::string name = c.name;
    if (!detail::lp_valid_name(name) || used.contains(name)) name = "c" + std::to_string(i);
    while (used.contains(name)) name += "_";
    used.insert(name);
    out << ' ' << name << ':';
    terms.clear();
    for (const auto& t : c.terms) terms.emplace_back(t.coef, &model.variables()[t.var.index].name);
    if (terms.empty()) {
      if (model.num_variables() == 0) throw ValidationError({"lp export: empty row in a model without variables"});
      terms.emplace_back(0.0, &model.variables()[0].name);
    }
    detail::lp_terms(out, terms);
    switch (c.sense) {
      case Sense::kLessEqual:
        out << " <= ";
        break;
      case Sense::kGreaterEqual:
        out << " >= ";
        break;
      case Sense::kEqual:
        out << " = ";
        break;
    }
    out << detail::lp_number(c.rhs) << '\n';
  }
  out << "Bounds\n";
  for (const auto& v : model.variables()) {
    const bool binary = v.kind == VarKind::kBinary;
    const double def_hi = binary ? 1.0 : kInf;
    if (v.lower == 0.0 && v.upper == def_hi) continue;
    if (v.lower == -kInf && v.upper == kInf) {
      out << ' ' << v.name << " free\n";
    } else if (v.lower == v.upper) {
      out << ' ' << v.name << " = " << detail::lp_number(v.lower) << '\n';
    } else {
      out << ' ' << detail::lp_number(v.lower) << " <= " << v.name << " <= " << detail::lp_number(v.upper) << '\n';
    }
  }
  if (model.num_binaries() > 0) {
    out << "Binaries\n";
    for (const auto& v : model.variables()) {
      if (v.kind == VarKind::kBinary) out << ' ' << v.name << '\n';
    }
  }
  out << "End\n";
  return out.str();
}

inline void write_lp_file(const std::string& path, const MilpModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << export_lp_format(model);
  if (!out) throw Error("failed writing '" + path + "'");
}

namespace detail {

class LpReader {
 public:
  explicit LpReader(std::string_view text) { tokenize(text); }

  MilpModel read() {
    expect_section("minimize");
    read_objective();
    expect_section("subject to");
    while (!at_section()) read_row();
    while (pos_ < toks_.size()) {
      const std::string sec = section();
      ++pos_;
      if (sec == "bounds") {
        while (!at_section()) read_bound();
      } else if (sec == "binaries") {
        while (!at_section()) binary_.insert(var(next()));
      } else if (sec == "end") {
        break;
      } else {
        fail("unsupported section '" + sec + "'");
      }
    }
    MilpModel model;
    for (std::size_t j = 0; j < names_.size(); ++j) {
      const bool bin = binary_.contains(j);
      double lo = lo_[j], hi = hi_[j];
      if (bin && !explicit_[j]) hi = 1.0;
      model.add_variable(names_[j], bin ? VarKind::kBinary : VarKind::kContinuous, lo, hi);
    }
    for (std::size_t j = 0; j < obj_.size(); ++j) model.set_objective(VarId{j}, obj_[j]);
    model.set_objective_offset(offset_);
    for (auto& r : rows_) model.add_constraint(r.name, std::move(r.terms), r.sense, r.rhs);
    return model;
  }

 private:
  struct Tok {
    std::string text;
    std::size_t line;
  };

  void tokenize(std::string_view text) {
    std::size_t line = 1;
    std::size_t i = 0;
    while (i < text.size()) {
      const char c = text[i];
      if (c == '\n') {
        ++line;
        ++i;
      } else if (c == '\\') {
        while (i < text.size() && text[i] != '\n') ++i;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++i;
      } else if (c == '<' || c == '>' || c == '=') {
        std::string op(1, c);
        ++i;
        if (i < text.size() && text[i] == '=') {
          if (c != '=') op += '=';
          ++i;
        } else if (c == '=' && i < text.size() && (text[i] == '<' || text[i] == '>')) {
          op = std::string(1, text[i]) + "=";
          ++i;
        }
        toks_.push_back({op, line});
      } else if (c == '+' || c == '-' || c == ':') {
        toks_.push_back({std::string(1, c), line});
        ++i;
      } else {
        std::size_t j = i;
        while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j])) && text[j] != ':' &&
               text[j] != '<' && text[j] != '>' && text[j] != '=' &&
               !((text[j] == '+' || text[j] == '-') && j > i && text[j - 1] != 'e' && text[j - 1] != 'E')) {
          ++j;
        }
        toks_.push_back({std::string(text.substr(i, j - i)), line});
        i = j;
      }
    }
  }

  [[noreturn]] void fail(const std::string& msg) const {
    const std::size_t line = pos_ < toks_.size() ? toks_[pos_].line : (toks_.empty() ? 0 : toks_.back().line);
    throw ParseError("lp: line " + std::to_string(line) + ": " + msg);
  }

  static std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
  }

  // Section keyword at the cursor, or "" if none.
  std::string section() const {
    if (pos_ >= toks_.size()) return "end";
    const std::string t = lower(toks_[pos_].text);
    if (pos_ + 1 < toks_.size() && t == "subject" && lower(toks_[pos_ + 1].text) == "to") return "subject to";
    if (t == "minimize" || t == "minimise" || t == "minimum" || t == "min") return "minimize";
    if (t == "st" || t == "s.t.") return "subject to";
    if (t == "bounds" || t == "bound") return "bounds";
    if (t == "binaries" || t == "binary" || t == "bin") return "binaries";
    if (t == "general" || t == "generals" || t == "gen") return "general";
    if (t == "maximize" || t == "maximise" || t == "max") return "maximize";
    if (t == "end") return "end";
    return "";
  }

  bool at_section() const { return !section().empty(); }

  void expect_section(const std::string& s) {
    if (section() != s) fail("expected section '" + s + "'");
    pos_ += s == "subject to" && lower(toks_[pos_].text) == "subject" ? 2 : 1;
  }

  const std::string& next() {
    if (pos_ >= toks_.size()) fail("unexpected end of input");
    return toks_[pos_++].text;
  }

  const std::string& peek() const {
    static const std::string empty;
    return pos_ < toks_.size() ? toks_[pos_].text : empty;
  }

  static bool is_number(const std::string& s, double& v) {
    if (s == "inf" || s == "infinity" || s == "Inf" || s == "INF") {
      v = kInf;
      return true;
    }
    char* end = nullptr;
    v = std::strtod(s.c_str(), &end);
    return end != s.c_str() && *end == '\0';
  }

  std::size_t var(const std::string& name) {
    auto it = index_.find(name);
    if (it != index_.end()) return it->second;
    const std::size_t j = names_.size();
    names_.push_back(name);
    lo_.push_back(0.0);
    hi_.push_back(kInf);
    explicit_.push_back(false);
    obj_.push_back(0.0);
    index_.emplace(name, j);
    return j;
  }

  bool label() {
    if (pos_ + 1 < toks_.size() && toks_[pos_ + 1].text == ":") {
      label_ = toks_[pos_].text;
      pos_ += 2;
      return true;
    }
    label_.clear();
    return false;
  }

  // Reads "[+-] [coef] name" terms until a relational operator or section;
  // bare constants accumulate into `constant`.
  std::vector<std::pair<std::size_t, double>> expression(double& constant) {
    std::vector<std::pair<std::size_t, double>> out;
    constant = 0.0;
    while (pos_ < toks_.size()) {
      const std::string& t = peek();
      if (t == "<=" || t == ">=" || t == "=" || at_section()) break;
      double sign = 1.0;
      while (peek() == "+" || peek() == "-") sign *= next() == "-" ? -1.0 : 1.0;
      double coef = 1.0;
      double v;
      bool had_number = false;
      if (is_number(peek(), v)) {
        coef = v;
        had_number = true;
        ++pos_;
      }
      const std::string& nt = peek();
      if (nt.empty() || nt == "+" || nt == "-" || nt == "<=" || nt == ">=" || nt == "=" || at_section()) {
        if (!had_number) fail("dangling sign");
        constant += sign * coef;
        continue;
      }
      out.emplace_back(var(next()), sign * coef);
    }
    return out;
  }

  void read_objective() {
    label();
    double c;
    for (const auto& [j, a] : expression(c)) obj_[j] += a;
    offset_ = c;
  }

  void read_row() {
    label();
    Row r;
    r.name = label_;
    double constant;
    for (const auto& [j, a] : expression(constant)) r.terms.push_back(Term{VarId{j}, a});
    const std::string op = next();
    if (op == "<=") {
      r.sense = Sense::kLessEqual;
    } else if (op == ">=") {
      r.sense = Sense::kGreaterEqual;
    } else if (op == "=") {
      r.sense = Sense::kEqual;
    } else {
      fail("expected relational operator, got '" + op + "'");
    }
    double sign = 1.0;
    while (peek() == "+" || peek() == "-") sign *= next() == "-" ? -1.0 : 1.0;
    double v;
    if (!is_number(next(), v)) fail("expected right-hand side number");
    r.rhs = sign * v - constant;
    rows_.push_back(std::move(r));
  }

  double signed_number() {
    double sign = 1.0;
    while (peek() == "+" || peek() == "-") sign *= next() == "-" ? -1.0 : 1.0;
    double v;
    if (!is_number(next(), v)) fail("expected number in bounds");
    return sign * v;
  }

  void read_bound() {
    // Forms: "x free", "x = v", "lo <= x <= hi", "x <= hi", "x >= lo", "lo <= x".
    double v;
    const std::string& first = peek();
    const bool leading = first == "+" || first == "-" || is_number(first, v);
    if (leading) {
      const double lo = signed_number();
      if (next() != "<=") fail("expected '<=' in bound");
      const std::size_t j = var(next());
      lo_[j] = lo;
      explicit_[j] = true;
      if (peek() == "<=") {
        ++pos_;
        hi_[j] = signed_number();
      }
      return;
    }
    const std::size_t j = var(next());
    explicit_[j] = true;
    const std::string op = next();
    if (lower(op) == "free") {
      lo_[j] = -kInf;
      hi_[j] = kInf;
    } else if (op == "=") {
      lo_[j] = hi_[j] = signed_number();
    } else if (op == "<=") {
      hi_[j] = signed_number();
    } else if (op == ">=") {
      lo_[j] = signed_number();
    } else {
      fail("unrecognised bound for '" + names_[j] + "'");
    }
  }

  struct Row {
    std::string name;
    std::vector<Term> terms;
    Sense sense = Sense::kLessEqual;
    double rhs = 0.0;
  };

  std::vector<Tok> toks_;
  std::size_t pos_ = 0;
  std::string label_;
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<double> lo_, hi_, obj_;
  std::vector<bool> explicit_;
  std::unordered_set<std::size_t> binary_;
  std::vector<Row> rows_;
  double offset_ = 0.0;
};

}  // namespace detail

/// Parses LP text in the subset produced by export_lp_format.
inline MilpModel import_lp_format(std::string_view text) { return detail::LpReader(text).read(); }

}  // namespace freqsec

#endif  // FREQSEC_LP_FORMAT_HPP_
