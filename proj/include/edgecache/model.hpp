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

#ifndef EDGECACHE_MODEL_HPP
#define EDGECACHE_MODEL_HPP

#include <cstddef>
#include <utility>
#include <vector>

#include "edgecache/matrix.hpp"
#include "edgecache/rng.hpp"

namespace edgecache {

// Feed-forward reconstruction network. Convention throughout: network inputs
// carry features (content ids) on rows and batch samples (users) on columns,
// so a layer computes act(W * X + v) with v broadcast across columns. Rating
// matrices store users as rows; callers transpose a batch of user rows into
// the network orientation.

enum class Activation { relu, linear };

struct LayerSpec {
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  Activation activation = Activation::relu;
};

struct Layer {
  Matrix weight;             // (out_dim x in_dim)
  std::vector<double> bias;  // out_dim
  Activation activation = Activation::relu;

  std::size_t in_dim() const { return weight.cols(); }
  std::size_t out_dim() const { return weight.rows(); }
};

struct ModelParams {
  std::vector<Layer> layers;

  // Scaled uniform init: weights in +-sqrt(6/(in+out)), biases zero.
  static ModelParams init(const std::vector<LayerSpec>& specs, RngStream& rng);

  std::size_t layer_count() const { return layers.size(); }
  std::size_t in_dim() const { return layers.front().in_dim(); }
  std::size_t out_dim() const { return layers.back().out_dim(); }
  std::size_t parameter_count() const;

  // Checks per-layer shape consistency and consecutive-layer compatibility.
  void validate() const;

  bool same_shape(const ModelParams& other) const;
  bool bit_equal(const ModelParams& other) const;
};

// rate = fraction of elements dropped; survivors are scaled by exactly
// 1/(1-rate). after_layer is the 1-based index of the layer whose output the
// mask sits after (0 selects the default: the last hidden layer).
struct DropoutSpec {
  double rate = 0.0;
  std::size_t after_layer = 0;

  // Resolved 0-based index of the layer whose *input* gets masked.
  std::size_t input_index(std::size_t layer_count) const;
  void validate(std::size_t layer_count) const;
};

// Everything backward() needs from the matching forward() call.
struct ForwardTrace {
  std::vector<Matrix> inputs;    // X^l actually fed to layer l (post-dropout)
  std::vector<Matrix> pre_acts;  // W_l X^l + v_l
  Matrix dropout_mask;           // entries in {0, 1/(1-r)}; empty if unused
  std::size_t dropout_input_index = 0;  // valid iff dropout_mask non-empty
};

// Gradient of the loss with respect to every layer's weight and bias; shapes
// mirror ModelParams layer by layer.
struct Gradient {
  std::vector<Matrix> dweights;
  std::vector<std::vector<double>> dbiases;

  static Gradient zeros_like(const ModelParams& params);
  bool same_shape(const Gradient& other) const;
};

enum class RunMode { train, infer };

// act(W x + v), v broadcast across batch columns.
Matrix forward_layer(const Matrix& x, const Matrix& w, const std::vector<double>& v,
                     Activation activation);

// Bernoulli keep mask with survivors pre-scaled by 1/(1-rate); entries are 0
// or 1/(1-rate).
Matrix draw_dropout_mask(std::size_t rows, std::size_t cols, double rate, RngStream& rng);

// Chained forward pass. In train mode with rate > 0 the dropout mask is drawn
// from rng; in infer mode (or rate 0) no mask is applied and rng is unused
// (nullptr is fine).
std::pair<Matrix, ForwardTrace> forward(const ModelParams& params, const Matrix& x,
                                        const DropoutSpec& dropout, RunMode mode,
                                        RngStream* rng = nullptr);

// Mean over batch columns of the per-sample mean squared error restricted to
// observed entries: samples with no observed entry contribute 0. mask holds
// 0/1 indicators shaped like y. Throws DataError when the mask is all-zero.
double masked_mse(const Matrix& y, const Matrix& x, const Matrix& mask);

// Gradient of masked_mse with respect to every weight and bias. The trace
// must come from a matching train-mode forward; dropped units get zero
// gradient through the stored mask.
Gradient backward(const ModelParams& params, const ForwardTrace& trace, const Matrix& y,
                  const Matrix& x, const Matrix& mask);

}  // namespace edgecache

#endif  // EDGECACHE_MODEL_HPP
