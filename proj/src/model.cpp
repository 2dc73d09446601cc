/*
 * Copyright 2026 the edgecache authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "edgecache/model.hpp"

#include <cmath>
#include <string>

namespace edgecache {

ModelParams ModelParams::init(const std::vector<LayerSpec>& specs, RngStream& rng) {
  if (specs.empty()) throw ConfigError("ModelParams::init: no layers");
  ModelParams params;
  params.layers.reserve(specs.size());
  for (const auto& spec : specs) {
    if (spec.in_dim < 1 || spec.out_dim < 1)
      throw ConfigError("ModelParams::init: layer dims must be >= 1");
    const double bound = std::sqrt(6.0 / static_cast<double>(spec.in_dim + spec.out_dim));
    Layer layer;
    layer.weight = Matrix::random_uniform(spec.out_dim, spec.in_dim, -bound, bound, rng);
    layer.bias.assign(spec.out_dim, 0.0);
    layer.activation = spec.activation;
    params.layers.push_back(std::move(layer));
  }
  params.validate();
  return params;
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers) n += layer.weight.size() + layer.bias.size();
  return n;
}

void ModelParams::validate() const {
  if (layers.empty()) throw ConfigError("ModelParams: no layers");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (layers[l].bias.size() != layers[l].out_dim())
      throw ShapeError("ModelParams: bias length mismatch at layer " + std::to_string(l + 1));
    if (l + 1 < layers.size() && layers[l + 1].in_dim() != layers[l].out_dim())
      throw ShapeError("ModelParams: layer " + std::to_string(l + 2) + " in_dim " +
                       std::to_string(layers[l + 1].in_dim()) + " != layer " +
                       std::to_string(l + 1) + " out_dim " + std::to_string(layers[l].out_dim()));
  }
}

bool ModelParams::same_shape(const ModelParams& other) const {
  if (layers.size() != other.layers.size()) return false;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (!layers[l].weight.same_shape(other.layers[l].weight)) return false;
    if (layers[l].bias.size() != other.layers[l].bias.size()) return false;
  }
  return true;
}

bool ModelParams::bit_equal(const ModelParams& other) const {
  if (!same_shape(other)) return false;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (layers[l].weight.data() != other.layers[l].weight.data()) return false;
    if (layers[l].bias != other.layers[l].bias) return false;
  }
  return true;
}

std::size_t DropoutSpec::input_index(std::size_t layer_count) const {
  // "after layer k" masks the input of layer k+1; with 1-based layer indices
  // that is 0-based index k. Default: after the last hidden layer.
  const std::size_t after = after_layer == 0 ? layer_count - 1 : after_layer;
  return after;
}

void DropoutSpec::validate(std::size_t layer_count) const {
  if (rate < 0.0 || rate >= 1.0)
    throw ConfigError("DropoutSpec: rate must be in [0,1), got " + std::to_string(rate));
  if (rate == 0.0) return;
  if (layer_count < 2) throw ConfigError("DropoutSpec: dropout needs at least one hidden layer");
  const std::size_t after = after_layer == 0 ? layer_count - 1 : after_layer;
  if (after < 1 || after > layer_count - 1)
    throw ConfigError("DropoutSpec: after_layer must be in [1, " +
                      std::to_string(layer_count - 1) + "], got " + std::to_string(after));
}

Gradient Gradient::zeros_like(const ModelParams& params) {
  Gradient g;
  g.dweights.reserve(params.layers.size());
  g.dbiases.reserve(params.layers.size());
  for (const auto& layer : params.layers) {
    g.dweights.emplace_back(layer.weight.rows(), layer.weight.cols());
    g.dbiases.emplace_back(layer.bias.size(), 0.0);
  }
  return g;
}

bool Gradient::same_shape(const Gradient& other) const {
  if (dweights.size() != other.dweights.size()) return false;
  for (std::size_t l = 0; l < dweights.size(); ++l) {
    if (!dweights[l].same_shape(other.dweights[l])) return false;
    if (dbiases[l].size() != other.dbiases[l].size()) return false;
  }
  return true;
}

namespace {

inline double apply_activation(double z, Activation act) {
  return act == Activation::relu ? (z > 0.0 ? z : 0.0) : z;
}

inline double activation_grad(double z, Activation act) {
  return act == Activation::relu ? (z > 0.0 ? 1.0 : 0.0) : 1.0;
}

// Per-sample observed-entry counts (one per batch column); total count out.
std::vector<double> column_mask_counts(const Matrix& mask, double* total) {
  std::vector<double> counts(mask.cols(), 0.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < mask.rows(); ++i)
    for (std::size_t u = 0; u < mask.cols(); ++u) {
      counts[u] += mask(i, u);
      sum += mask(i, u);
    }
  if (total) *total = sum;
  return counts;
}

}  // namespace

Matrix forward_layer(const Matrix& x, const Matrix& w, const std::vector<double>& v,
                     Activation activation) {
  if (w.cols() != x.rows())
    throw ShapeError("forward_layer: weight " + w.shape_str() + " incompatible with input " +
                     x.shape_str());
  if (v.size() != w.rows())
    throw ShapeError("forward_layer: bias length " + std::to_string(v.size()) +
                     " != weight rows " + std::to_string(w.rows()));
  Matrix z = matmul(w, x);
  for (std::size_t i = 0; i < z.rows(); ++i)
    for (std::size_t u = 0; u < z.cols(); ++u)
      z(i, u) = apply_activation(z(i, u) + v[i], activation);
  return z;
}

Matrix draw_dropout_mask(std::size_t rows, std::size_t cols, double rate, RngStream& rng) {
  if (rate < 0.0 || rate >= 1.0)
    throw ConfigError("draw_dropout_mask: rate must be in [0,1)");
  Matrix mask(rows, cols);
  const double keep_scale = 1.0 / (1.0 - rate);
  for (auto& m : mask.data()) m = rng.next_double() < rate ? 0.0 : keep_scale;
  return mask;
}

std::pair<Matrix, ForwardTrace> forward(const ModelParams& params, const Matrix& x,
                                        const DropoutSpec& dropout, RunMode mode,
                                        RngStream* rng) {
  params.validate();
  dropout.validate(params.layer_count());
  if (x.rows() != params.in_dim())
    throw ShapeError("forward: input rows " + std::to_string(x.rows()) +
                     " != first-layer in_dim " + std::to_string(params.in_dim()));

  const bool use_dropout = mode == RunMode::train && dropout.rate > 0.0;
  const std::size_t drop_idx = use_dropout ? dropout.input_index(params.layer_count()) : 0;

  ForwardTrace trace;
  trace.inputs.reserve(params.layer_count());
  trace.pre_acts.reserve(params.layer_count());

  Matrix cur = x;
  for (std::size_t l = 0; l < params.layer_count(); ++l) {
    if (use_dropout && l == drop_idx) {
      if (rng == nullptr) throw ContractError("forward: train-mode dropout needs an RngStream");
      trace.dropout_mask = draw_dropout_mask(cur.rows(), cur.cols(), dropout.rate, *rng);
      trace.dropout_input_index = l;
      cur = hadamard(cur, trace.dropout_mask);
    }
    const Layer& layer = params.layers[l];
    if (layer.in_dim() != cur.rows())
      throw ShapeError("forward: layer " + std::to_string(l + 1) + " expects " +
                       std::to_string(layer.in_dim()) + " rows, got " +
                       std::to_string(cur.rows()));
    Matrix z = matmul(layer.weight, cur);
    for (std::size_t i = 0; i < z.rows(); ++i)
      for (std::size_t u = 0; u < z.cols(); ++u) z(i, u) += layer.bias[i];
    trace.inputs.push_back(std::move(cur));
    Matrix out = elementwise(z, [&](double v) { return apply_activation(v, layer.activation); });
    trace.pre_acts.push_back(std::move(z));
    cur = std::move(out);
  }
  return {std::move(cur), std::move(trace)};
}

double masked_mse(const Matrix& y, const Matrix& x, const Matrix& mask) {
  if (!y.same_shape(x) || !y.same_shape(mask))
    throw ShapeError("masked_mse: shape mismatch y" + y.shape_str() + " x" + x.shape_str() +
                     " mask" + mask.shape_str());
  double total = 0.0;
  const std::vector<double> counts = column_mask_counts(mask, &total);
  if (total == 0.0) throw DataError("masked_mse: mask has no observed entries");

  double loss = 0.0;
  for (std::size_t u = 0; u < y.cols(); ++u) {
    if (counts[u] == 0.0) continue;
    double sample = 0.0;
    for (std::size_t i = 0; i < y.rows(); ++i) {
      if (mask(i, u) == 0.0) continue;
      const double r = y(i, u) - x(i, u);
      sample += r * r;
    }
    loss += sample / counts[u];
  }
  return loss / static_cast<double>(y.cols());
}

Gradient backward(const ModelParams& params, const ForwardTrace& trace, const Matrix& y,
                  const Matrix& x, const Matrix& mask) {
  const std::size_t depth = params.layer_count();
  if (trace.inputs.size() != depth || trace.pre_acts.size() != depth)
    throw ContractError("backward: trace layer count " + std::to_string(trace.inputs.size()) +
                        " != model layer count " + std::to_string(depth));
  for (std::size_t l = 0; l < depth; ++l) {
    if (trace.inputs[l].rows() != params.layers[l].in_dim() ||
        trace.pre_acts[l].rows() != params.layers[l].out_dim())
      throw ContractError("backward: trace does not match model shapes at layer " +
                          std::to_string(l + 1));
  }
  if (!y.same_shape(x) || !y.same_shape(mask) || y.rows() != params.out_dim() ||
      y.cols() != trace.inputs.front().cols())
    throw ContractError("backward: output/target/mask shapes do not match the trace");

  double total = 0.0;
  const std::vector<double> counts = column_mask_counts(mask, &total);
  if (total == 0.0) throw DataError("backward: mask has no observed entries");

  const double batch = static_cast<double>(y.cols());
  // d loss / d y for the per-sample-normalized masked MSE.
  Matrix delta(y.rows(), y.cols());
  for (std::size_t u = 0; u < y.cols(); ++u) {
    if (counts[u] == 0.0) continue;
    const double w = 2.0 / (batch * counts[u]);
    for (std::size_t i = 0; i < y.rows(); ++i)
      if (mask(i, u) != 0.0) delta(i, u) = w * (y(i, u) - x(i, u));
  }

  Gradient grad = Gradient::zeros_like(params);
  for (std::size_t l = depth; l-- > 0;) {
    const Layer& layer = params.layers[l];
    // delta currently holds dL/d(out_l); fold in the activation derivative.
    for (std::size_t i = 0; i < delta.rows(); ++i)
      for (std::size_t u = 0; u < delta.cols(); ++u)
        delta(i, u) *= activation_grad(trace.pre_acts[l](i, u), layer.activation);

    grad.dweights[l] = matmul(delta, transpose(trace.inputs[l]));
    for (std::size_t i = 0; i < delta.rows(); ++i) {
      double acc = 0.0;
      for (std::size_t u = 0; u < delta.cols(); ++u) acc += delta(i, u);
      grad.dbiases[l][i] = acc;
    }
    if (l > 0) {
      delta = matmul(transpose(layer.weight), delta);
      if (!trace.dropout_mask.empty() && trace.dropout_input_index == l)
        delta = hadamard(delta, trace.dropout_mask);
    }
  }
  return grad;
}

}  // namespace edgecache
