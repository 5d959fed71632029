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

// ReLU multilayer perceptron regressor for the frequency nadir.
//
// Hidden layers are affine + ReLU, the output layer is affine only. Training
// minimises the batch-mean of a (possibly asymmetric) L1 or L2 loss, where
// over-prediction (yhat >= y) is weighted by c_plus and under-prediction by
// c_minus. With c_plus > c_minus the predictor leans conservative.

#ifndef FREQSEC_MLP_HPP_
#define FREQSEC_MLP_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "freqsec/dataset.hpp"
#include "freqsec/errors.hpp"
#include "freqsec/rng.hpp"
#include "json.hpp"

namespace freqsec {

struct Topology {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden;  // at least one layer, every size >= 1

  std::size_t num_hidden_neurons() const { return std::accumulate(hidden.begin(), hidden.end(), std::size_t{0}); }
  bool operator==(const Topology&) const = default;
};

/// Fully connected layer; weights are row-major (out x in).
struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weights;
  std::vector<double> bias;

  double w(std::size_t row, std::size_t col) const { return weights[row * in + col]; }
  double& w(std::size_t row, std::size_t col) { return weights[row * in + col]; }
  bool operator==(const DenseLayer&) const = default;
};

struct MlpParams {
  Topology topology;
  std::vector<DenseLayer> layers;  // hidden layers then the output layer
  // Factor mapping each raw host-model input to its feature value: 1 for
  // commitments, 1/Gamma for dispatch slots.
  std::vector<double> input_scale;

  bool operator==(const MlpParams&) const = default;
};

enum class LossFamily { kL1, kL2 };

struct LossSpec {
  LossFamily family = LossFamily::kL2;
  double c_plus = 1.0;   // weight on over-prediction
  double c_minus = 1.0;  // weight on under-prediction

  bool operator==(const LossSpec&) const = default;
};

enum class Optimizer { kSgd, kAdam };

struct TrainConfig {
  std::size_t epochs = 300;
  std::size_t batch_size = 32;
  double learning_rate = 3e-3;
  std::uint64_t seed = 1;
  Optimizer optimizer = Optimizer::kAdam;
};

struct Metrics {
  double mae = 0.0;  // Hz
  double r2 = 0.0;
  double conservative_proportion = 0.0;
};

struct TrainHistory {
  std::vector<double> train_loss;
  std::vector<double> test_loss;  // NaN when the test split is empty
};

struct TrainResult {
  MlpParams params;
  TrainHistory history;
};

inline void validate(const Topology& topo) {
  std::vector<std::string> bad;
  if (topo.input_dim < 1) bad.push_back("topology: input_dim must be >= 1");
  if (topo.hidden.empty()) bad.push_back("topology: at least one hidden layer required");
  for (std::size_t l = 0; l < topo.hidden.size(); ++l) {
    if (topo.hidden[l] < 1) bad.push_back("topology: hidden layer " + std::to_string(l) + " has size 0");
  }
  if (!bad.empty()) throw ValidationError(std::move(bad));
}

inline void validate(const LossSpec& loss) {
  if (!(loss.c_plus > 0.0) || !(loss.c_minus > 0.0)) {
    throw ValidationError({"loss: c_plus and c_minus must be > 0"});
  }
}

inline void validate(const MlpParams& params) {
  validate(params.topology);
  std::vector<std::string> bad;
  const auto& topo = params.topology;
  if (params.layers.size() != topo.hidden.size() + 1) bad.push_back("params: layer count does not match topology");
  std::size_t fan_in = topo.input_dim;
  for (std::size_t l = 0; l < params.layers.size() && bad.empty(); ++l) {
    const auto& layer = params.layers[l];
    const std::size_t fan_out = l < topo.hidden.size() ? topo.hidden[l] : 1;
    if (layer.in != fan_in || layer.out != fan_out || layer.weights.size() != fan_in * fan_out ||
        layer.bias.size() != fan_out) {
      bad.push_back("params: layer " + std::to_string(l) + " shape mismatch");
    }
    for (double v : layer.weights) {
      if (!std::isfinite(v)) {
        bad.push_back("params: layer " + std::to_string(l) + " has a non-finite weight");
        break;
      }
    }
    for (double v : layer.bias) {
      if (!std::isfinite(v)) {
        bad.push_back("params: layer " + std::to_string(l) + " has a non-finite bias");
        break;
      }
    }
    fan_in = fan_out;
  }
  if (params.input_scale.size() != topo.input_dim) bad.push_back("params: input_scale length != input_dim");
  if (!bad.empty()) throw ValidationError(std::move(bad));
}

/// Zero biases and Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)).
inline MlpParams init_params(const Topology& topo, std::uint64_t seed) {
  validate(topo);
  Rng rng(seed);
  MlpParams params;
  params.topology = topo;
  params.input_scale.assign(topo.input_dim, 1.0);
  std::size_t fan_in = topo.input_dim;
  for (std::size_t l = 0; l <= topo.hidden.size(); ++l) {
    const std::size_t fan_out = l < topo.hidden.size() ? topo.hidden[l] : 1;
    DenseLayer layer{fan_in, fan_out, std::vector<double>(fan_in * fan_out), std::vector<double>(fan_out, 0.0)};
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (double& w : layer.weights) w = rng.uniform(-limit, limit);
    params.layers.push_back(std::move(layer));
    fan_in = fan_out;
  }
  return params;
}

/// input_scale for the standard feature layout: ones for commitments, 1/Gamma
/// for the dispatch block.
inline std::vector<double> feature_input_scale(std::size_t num_generators, double gamma) {
  std::vector<double> scale(2 * num_generators, 1.0);
  for (std::size_t g = 0; g < num_generators; ++g) scale[num_generators + g] = 1.0 / gamma;
  return scale;
}

/// Per-layer pre-activations (Z) and outputs (z) of one forward pass.
struct ForwardTrace {
  std::vector<std::vector<double>> pre;
  std::vector<std::vector<double>> post;
};

inline ForwardTrace forward_trace(const MlpParams& params, std::span<const double> x) {
  if (x.size() != params.topology.input_dim) {
    throw DimensionError("forward: input has " + std::to_string(x.size()) + " entries, network expects " +
                         std::to_string(params.topology.input_dim));
  }
  ForwardTrace trace;
  std::vector<double> current(x.begin(), x.end());
  const std::size_t last = params.layers.size() - 1;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const auto& layer = params.layers[l];
    std::vector<double> z(layer.out);
    for (std::size_t n = 0; n < layer.out; ++n) {
      double acc = layer.bias[n];
      const double* row = &layer.weights[n * layer.in];
      for (std::size_t m = 0; m < layer.in; ++m) acc += row[m] * current[m];
      z[n] = acc;
    }
    trace.pre.push_back(z);
    if (l != last) {
      for (double& v : z) v = std::max(0.0, v);
    }
    trace.post.push_back(z);
    current = std::move(z);
  }
  return trace;
}

/// Predicted nadir (Hz) for a feature vector.
inline double forward(const MlpParams& params, std::span<const double> x) {
  return forward_trace(params, x).post.back()[0];
}

inline double forward(const MlpParams& params, const FeatureVector& fv) {
  return forward(params, std::span<const double>(fv.x));
}

inline double loss_value(const LossSpec& spec, double y, double yhat) {
  const double err = yhat - y;
  const double weight = err >= 0.0 ? spec.c_plus : spec.c_minus;
  return spec.family == LossFamily::kL1 ? weight * std::abs(err) : weight * err * err;
}

/// d loss / d yhat. The L1 kink at yhat == y takes subgradient 0.
inline double loss_gradient(const LossSpec& spec, double y, double yhat) {
  const double err = yhat - y;
  if (spec.family == LossFamily::kL1) {
    if (err > 0.0) return spec.c_plus;
    if (err < 0.0) return -spec.c_minus;
    return 0.0;
  }
  return 2.0 * (err >= 0.0 ? spec.c_plus : spec.c_minus) * err;
}

/// Same shapes as MlpParams::layers.
struct ParamGradients {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> bias;

  static ParamGradients zeros_like(const MlpParams& params) {
    ParamGradients g;
    for (const auto& layer : params.layers) {
      g.weights.emplace_back(layer.weights.size(), 0.0);
      g.bias.emplace_back(layer.bias.size(), 0.0);
    }
    return g;
  }
};

/// Adds d loss(y, forward(x)) / d params into `grads`; returns the loss.
inline double accumulate_gradient(const MlpParams& params, std::span<const double> x, double y, const LossSpec& loss,
                                  ParamGradients& grads) {
  const ForwardTrace trace = forward_trace(params, x);
  const double yhat = trace.post.back()[0];
  std::vector<double> delta{loss_gradient(loss, y, yhat)};
  for (std::size_t l = params.layers.size(); l-- > 0;) {
    const auto& layer = params.layers[l];
    const std::span<const double> input = l == 0 ? x : std::span<const double>(trace.post[l - 1]);
    auto& gw = grads.weights[l];
    auto& gb = grads.bias[l];
    for (std::size_t n = 0; n < layer.out; ++n) {
      gb[n] += delta[n];
      if (delta[n] == 0.0) continue;
      double* row = &gw[n * layer.in];
      for (std::size_t m = 0; m < layer.in; ++m) row[m] += delta[n] * input[m];
    }
    if (l == 0) break;
    std::vector<double> prev(layer.in, 0.0);
    for (std::size_t n = 0; n < layer.out; ++n) {
      if (delta[n] == 0.0) continue;
      const double* row = &layer.weights[n * layer.in];
      for (std::size_t m = 0; m < layer.in; ++m) prev[m] += delta[n] * row[m];
    }
    // ReLU derivative, taken as 0 at Z == 0.
    const auto& z_prev = trace.pre[l - 1];
    for (std::size_t m = 0; m < layer.in; ++m) {
      if (z_prev[m] <= 0.0) prev[m] = 0.0;
    }
    delta = std::move(prev);
  }
  return loss_value(loss, y, yhat);
}

inline double mean_loss(const MlpParams& params, const Dataset& data, const std::vector<std::size_t>& indices,
                        const LossSpec& loss) {
  if (indices.empty()) return std::numeric_limits<double>::quiet_NaN();
  double total = 0.0;
  for (auto i : indices) {
    const auto& s = data.samples[i];
    total += loss_value(loss, s.label_nadir, forward(params, s.features));
  }
  return total / static_cast<double>(indices.size());
}

/// Mini-batch training on the train split.
///
/// Hidden biases start at zero; the output bias starts at the mean training
/// label so the optimiser does not spend its first epochs walking a 50 Hz
/// offset. Deterministic for a fixed cfg.seed.
inline TrainResult train(const Dataset& data, const Topology& topo, const LossSpec& loss, const TrainConfig& cfg) {
  validate(loss);
  if (data.train_indices.empty()) throw ValidationError({"train: train split is empty"});
  if (cfg.epochs < 1 || cfg.batch_size < 1 || !(cfg.learning_rate > 0.0)) {
    throw ValidationError({"train: epochs, batch_size and learning_rate must be positive"});
  }
  Topology t = topo;
  t.input_dim = data.samples[data.train_indices.front()].features.size();

  TrainResult result;
  MlpParams& params = result.params;
  params = init_params(t, cfg.seed);
  if (data.gamma > 0.0 && 2 * data.num_generators == t.input_dim) {
    params.input_scale = feature_input_scale(data.num_generators, data.gamma);
  }
  double label_mean = 0.0;
  for (auto i : data.train_indices) label_mean += data.samples[i].label_nadir;
  params.layers.back().bias[0] = label_mean / static_cast<double>(data.train_indices.size());

  // Adam moments.
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  ParamGradients m1 = ParamGradients::zeros_like(params);
  ParamGradients m2 = ParamGradients::zeros_like(params);
  std::uint64_t step = 0;

  Rng rng(derive_seed(cfg.seed, 0xba7c));
  std::vector<std::size_t> order = data.train_indices;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      ParamGradients grads = ParamGradients::zeros_like(params);
      double batch_loss = 0.0;
      for (std::size_t k = start; k < end; ++k) {
        const auto& s = data.samples[order[k]];
        batch_loss += accumulate_gradient(params, s.features.x, s.label_nadir, loss, grads);
      }
      if (!std::isfinite(batch_loss)) {
        throw DivergenceError("train: loss became non-finite in epoch " + std::to_string(epoch));
      }
      const double inv = 1.0 / static_cast<double>(end - start);
      ++step;
      const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
      const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
      auto apply = [&](std::vector<double>& theta, const std::vector<double>& g, std::vector<double>& v1,
                       std::vector<double>& v2) {
        for (std::size_t i = 0; i < theta.size(); ++i) {
          const double gi = g[i] * inv;
          if (cfg.optimizer == Optimizer::kSgd) {
            theta[i] -= cfg.learning_rate * gi;
          } else {
            v1[i] = kBeta1 * v1[i] + (1.0 - kBeta1) * gi;
            v2[i] = kBeta2 * v2[i] + (1.0 - kBeta2) * gi * gi;
            theta[i] -= cfg.learning_rate * (v1[i] / bc1) / (std::sqrt(v2[i] / bc2) + kEps);
          }
        }
      };
      for (std::size_t l = 0; l < params.layers.size(); ++l) {
        apply(params.layers[l].weights, grads.weights[l], m1.weights[l], m2.weights[l]);
        apply(params.layers[l].bias, grads.bias[l], m1.bias[l], m2.bias[l]);
      }
    }
    const double train_loss = mean_loss(params, data, data.train_indices, loss);
    if (!std::isfinite(train_loss)) {
      throw DivergenceError("train: loss became non-finite in epoch " + std::to_string(epoch));
    }
    result.history.train_loss.push_back(train_loss);
    result.history.test_loss.push_back(mean_loss(params, data, data.test_indices, loss));
  }
  return result;
}

/// MAE, R^2 and the share of predictions at or below the true nadir.
inline Metrics evaluate(const MlpParams& params, const Dataset& data, Split split) {
  const auto indices = split_indices(data, split);
  if (indices.empty()) throw ValidationError({"evaluate: split is empty"});
  double mean = 0.0;
  for (auto i : indices) mean += data.samples[i].label_nadir;
  mean /= static_cast<double>(indices.size());
  double abs_err = 0.0, sse = 0.0, sst = 0.0;
  std::size_t conservative = 0;
  for (auto i : indices) {
    const auto& s = data.samples[i];
    const double yhat = forward(params, s.features);
    abs_err += std::abs(yhat - s.label_nadir);
    sse += (yhat - s.label_nadir) * (yhat - s.label_nadir);
    sst += (s.label_nadir - mean) * (s.label_nadir - mean);
    if (yhat <= s.label_nadir) ++conservative;
  }
  if (sst == 0.0) throw UndefinedMetricError("evaluate: R^2 undefined, all labels are equal");
  const auto count = static_cast<double>(indices.size());
  return Metrics{abs_err / count, 1.0 - sse / sst, static_cast<double>(conservative) / count};
}

// --- model file ------------------------------------------------------------

struct TrainedModel {
  MlpParams params;
  LossSpec loss;
  std::uint64_t train_seed = 0;
};

inline std::string to_string(LossFamily family) { return family == LossFamily::kL1 ? "l1" : "l2"; }

inline LossFamily parse_loss_family(const std::string& text) {
  if (text == "l1") return LossFamily::kL1;
  if (text == "l2") return LossFamily::kL2;
  throw ParseError("unknown loss family '" + text + "' (expected l1 or l2)");
}

inline nlohmann::json to_json(const TrainedModel& model) {
  const auto& p = model.params;
  nlohmann::json doc;
  doc["topology"] = {{"input_dim", p.topology.input_dim}, {"hidden_sizes", p.topology.hidden}, {"output_dim", 1}};
  doc["weights"] = nlohmann::json::array();
  doc["biases"] = nlohmann::json::array();
  for (const auto& layer : p.layers) {
    doc["weights"].push_back(layer.weights);
    doc["biases"].push_back(layer.bias);
  }
  doc["input_scale"] = p.input_scale;
  doc["loss_spec"] = {{"family", to_string(model.loss.family)}, {"c_plus", model.loss.c_plus},
                      {"c_minus", model.loss.c_minus}};
  doc["train_seed"] = model.train_seed;
  return doc;
}

inline TrainedModel model_from_json(const nlohmann::json& doc) {
  TrainedModel model;
  try {
    auto& p = model.params;
    p.topology.input_dim = doc.at("topology").at("input_dim").get<std::size_t>();
    p.topology.hidden = doc.at("topology").at("hidden_sizes").get<std::vector<std::size_t>>();
    validate(p.topology);
    const auto& weights = doc.at("weights");
    const auto& biases = doc.at("biases");
    if (weights.size() != p.topology.hidden.size() + 1 || biases.size() != weights.size()) {
      throw ParseError("model: weights/biases layer count does not match topology");
    }
    std::size_t fan_in = p.topology.input_dim;
    for (std::size_t l = 0; l < weights.size(); ++l) {
      const std::size_t fan_out = l < p.topology.hidden.size() ? p.topology.hidden[l] : 1;
      p.layers.push_back(DenseLayer{fan_in, fan_out, weights[l].get<std::vector<double>>(),
                                    biases[l].get<std::vector<double>>()});
      fan_in = fan_out;
    }
    p.input_scale = doc.at("input_scale").get<std::vector<double>>();
    model.loss.family = parse_loss_family(doc.at("loss_spec").at("family").get<std::string>());
    model.loss.c_plus = doc.at("loss_spec").at("c_plus").get<double>();
    model.loss.c_minus = doc.at("loss_spec").at("c_minus").get<double>();
    model.train_seed = doc.at("train_seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model: ") + e.what());
  }
  validate(model.params);
  return model;
}

inline void save_model(const TrainedModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << to_json(model).dump(2) << '\n';
}

inline TrainedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  return model_from_json(doc);
}

}  // namespace freqsec

#endif  // FREQSEC_MLP_HPP_
