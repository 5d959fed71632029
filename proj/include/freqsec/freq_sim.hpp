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

// Reduced-order post-contingency frequency simulator.
//
// One center-of-inertia frequency state plus a first-order governor per
// surviving unit, all per-unit on the system base:
//
//   2 H_sys d(df)/dt = -dP_loss - D df + sum_g dP_g
//   T_g d(dP_g)/dt   = -dP_g - (1/R_g) df,   dP_g clamped to [0, headroom_g]
//
// The largest committed unit trips at t = 0.

#ifndef FREQSEC_FREQ_SIM_HPP_
#define FREQSEC_FREQ_SIM_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "freqsec/errors.hpp"
#include "freqsec/system_model.hpp"

namespace freqsec {

enum class Integrator { kRk4 };

struct SimConfig {
  double dt = 0.01;       // s
  double horizon = 30.0;  // s
  Integrator integrator = Integrator::kRk4;
};

struct FrequencyTrace {
  std::vector<double> times;  // s
  std::vector<double> freq;   // Hz
  bool converged = true;
};

/// Parameters of the post-fault COI model, already on the system base.
struct CoiModel {
  double two_h = 0.0;    // 2 H_sys, s
  double damping = 0.0;  // D, pu
  double loss = 0.0;     // dP_loss, pu
  std::vector<double> gain;           // 1/R_g, pu
  std::vector<double> time_constant;  // T_g, s
  std::vector<double> headroom;       // pu; +inf for unlimited
};

/// Frequency deviation beyond which a trajectory counts as unconverged.
inline constexpr double kDivergenceHz = 5.0;

/// Builds the COI model for the N-1 loss of the largest committed unit.
inline CoiModel build_coi_model(const SystemSpec& spec, const OperatingPoint& op) {
  if (auto bad = check_operating_point(spec, op); !bad.empty()) throw ValidationError(std::move(bad));
  const std::size_t tripped = largest_committed_unit(op);
  CoiModel model;
  model.damping = spec.load_damping_d;
  model.loss = op.p[tripped] / spec.system_mva_base;
  for (std::size_t g = 0; g < spec.num_generators(); ++g) {
    if (op.u[g] != 1 || g == tripped) continue;
    const auto& gen = spec.generators[g];
    model.two_h += 2.0 * rebased_inertia(spec, gen);
    model.gain.push_back(governor_gain(spec, gen));
    model.time_constant.push_back(gen.governor_t);
    model.headroom.push_back((gen.p_max - op.p[g]) / spec.system_mva_base);
  }
  if (model.gain.empty()) {
    throw DegenerateContingencyError("contingency leaves no surviving committed unit");
  }
  return model;
}

namespace detail {

inline void coi_derivative(const CoiModel& m, const std::vector<double>& x, std::vector<double>& dx) {
  double governor_sum = 0.0;
  for (std::size_t g = 0; g < m.gain.size(); ++g) governor_sum += x[g + 1];
  dx[0] = (-m.loss - m.damping * x[0] + governor_sum) / m.two_h;
  for (std::size_t g = 0; g < m.gain.size(); ++g) {
    dx[g + 1] = (-x[g + 1] - m.gain[g] * x[0]) / m.time_constant[g];
  }
}

inline void clamp_governors(const CoiModel& m, std::vector<double>& x) {
  for (std::size_t g = 0; g < m.gain.size(); ++g) x[g + 1] = std::clamp(x[g + 1], 0.0, m.headroom[g]);
}

}  // namespace detail

/// Integrates the COI model with fixed-step RK4. Integration stops early,
/// marking the trace unconverged, once the deviation leaves +-5 Hz or turns
/// non-finite.
inline FrequencyTrace simulate_coi(const CoiModel& model, const SimConfig& cfg, double f_nominal) {
  if (!(cfg.dt > 0.0) || !(cfg.horizon > 0.0)) throw ValidationError({"SimConfig: dt and horizon must be > 0"});
  if (!(model.two_h > 0.0)) throw ValidationError({"CoiModel: system inertia must be > 0"});
  const std::size_t k = model.gain.size();
  const auto steps = static_cast<std::size_t>(std::ceil(cfg.horizon / cfg.dt - 1e-9));

  FrequencyTrace trace;
  trace.times.reserve(steps + 1);
  trace.freq.reserve(steps + 1);
  trace.times.push_back(0.0);
  trace.freq.push_back(f_nominal);

  std::vector<double> x(k + 1, 0.0), stage(k + 1), k1(k + 1), k2(k + 1), k3(k + 1), k4(k + 1);
  const double h = cfg.dt;
  for (std::size_t step = 1; step <= steps; ++step) {
    detail::coi_derivative(model, x, k1);
    for (std::size_t i = 0; i <= k; ++i) stage[i] = x[i] + 0.5 * h * k1[i];
    detail::clamp_governors(model, stage);
    detail::coi_derivative(model, stage, k2);
    for (std::size_t i = 0; i <= k; ++i) stage[i] = x[i] + 0.5 * h * k2[i];
    detail::clamp_governors(model, stage);
    detail::coi_derivative(model, stage, k3);
    for (std::size_t i = 0; i <= k; ++i) stage[i] = x[i] + h * k3[i];
    detail::clamp_governors(model, stage);
    detail::coi_derivative(model, stage, k4);
    for (std::size_t i = 0; i <= k; ++i) x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    detail::clamp_governors(model, x);

    const double f = f_nominal * (1.0 + x[0]);
    trace.times.push_back(static_cast<double>(step) * h);
    trace.freq.push_back(f);
    if (!std::isfinite(f) || std::abs(f - f_nominal) > kDivergenceHz) {
      trace.converged = false;
      break;
    }
  }
  return trace;
}

/// Simulates the loss of the largest committed unit at operating point `op`.
///
/// Throws DegenerateContingencyError when fewer than two units are committed,
/// ValidationError for an invalid point or a horizon shorter than ten
/// governor time constants.
inline FrequencyTrace simulate_contingency(const SystemSpec& spec, const OperatingPoint& op,
                                           const SimConfig& cfg = {}) {
  const CoiModel model = build_coi_model(spec, op);
  const double slowest = *std::max_element(model.time_constant.begin(), model.time_constant.end());
  if (cfg.horizon < 10.0 * slowest) {
    throw ValidationError({"SimConfig: horizon " + std::to_string(cfg.horizon) +
                           " s is shorter than 10 x governor_t = " + std::to_string(10.0 * slowest) + " s"});
  }
  return simulate_coi(model, cfg, spec.f_nominal);
}

/// Minimum frequency of a converged trace.
inline double nadir(const FrequencyTrace& trace) {
  if (!trace.converged) throw UnconvergedTraceError("nadir requested for an unconverged trace");
  if (trace.freq.empty()) throw UnconvergedTraceError("empty trace");
  return *std::min_element(trace.freq.begin(), trace.freq.end());
}

/// Closed-form quasi-steady-state frequency, ignoring headroom limits.
inline double steady_state_frequency(const CoiModel& model, double f_nominal) {
  double stiffness = model.damping;
  for (double g : model.gain) stiffness += g;
  if (stiffness == 0.0) throw NumericalError("steady state undefined: D + sum(1/R) = 0");
  return f_nominal * (1.0 - model.loss / stiffness);
}

inline double steady_state_frequency(const SystemSpec& spec, const OperatingPoint& op) {
  return steady_state_frequency(build_coi_model(spec, op), spec.f_nominal);
}

/// Trace dump with header "time_s,freq_hz".
inline void write_trace_csv(std::ostream& out, const FrequencyTrace& trace) {
  out << "time_s,freq_hz\n";
  char buf[64];
  for (std::size_t i = 0; i < trace.times.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.6f,%.9f\n", trace.times[i], trace.freq[i]);
    out << buf;
  }
}

}  // namespace freqsec

#endif  // FREQSEC_FREQ_SIM_HPP_
