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

#include "edgecache/optim.hpp"

#include <cmath>
#include <string>

namespace edgecache {

void AdamConfig::validate() const {
  if (!(step > 0.0)) throw ConfigError("AdamConfig: step must be > 0");
  if (decay_mean < 0.0 || decay_mean >= 1.0 || decay_var < 0.0 || decay_var >= 1.0)
    throw ConfigError("AdamConfig: decay factors must be in [0,1)");
  if (!(epsilon > 0.0)) throw ConfigError("AdamConfig: epsilon must be > 0");
}

AdamState AdamState::init(const ModelParams& params) {
  AdamState state;
  for (const auto& layer : params.layers) {
    state.mean.emplace_back(layer.weight.rows(), layer.weight.cols());
    state.variance.emplace_back(layer.weight.rows(), layer.weight.cols());
    state.mean_bias.emplace_back(layer.bias.size(), 0.0);
    state.variance_bias.emplace_back(layer.bias.size(), 0.0);
  }
  return state;
}

Gradient average_gradients(const std::vector<Gradient>& grads) {
  if (grads.empty()) throw ContractError("average_gradients: empty gradient list");
  Gradient acc = grads.front();
  for (std::size_t n = 1; n < grads.size(); ++n) {
    const Gradient& g = grads[n];
    if (!acc.same_shape(g))
      throw ContractError("average_gradients: shape mismatch at index " + std::to_string(n));
    for (std::size_t l = 0; l < acc.dweights.size(); ++l) {
      for (std::size_t i = 0; i < acc.dweights[l].size(); ++i)
        acc.dweights[l].data()[i] += g.dweights[l].data()[i];
      for (std::size_t i = 0; i < acc.dbiases[l].size(); ++i)
        acc.dbiases[l][i] += g.dbiases[l][i];
    }
  }
  const double inv = 1.0 / static_cast<double>(grads.size());
  for (std::size_t l = 0; l < acc.dweights.size(); ++l) {
    for (auto& x : acc.dweights[l].data()) x *= inv;
    for (auto& x : acc.dbiases[l]) x *= inv;
  }
  return acc;
}

namespace {

struct StepCoeffs {
  double c_mean, c_var, step_t;
};

StepCoeffs coefficients(const AdamConfig& cfg, long long tau) {
  StepCoeffs c{};
  const double t_bias = static_cast<double>(tau + 1);
  if (cfg.mode == AdamMode::paper) {
    const double t_mom = static_cast<double>(tau);
    c.c_mean = std::pow(cfg.decay_mean, t_mom);
    c.c_var = std::pow(cfg.decay_var, t_mom);
  } else {
    c.c_mean = cfg.decay_mean;
    c.c_var = cfg.decay_var;
  }
  c.step_t = cfg.step * std::sqrt(1.0 - std::pow(cfg.decay_var, t_bias)) /
             (1.0 - std::pow(cfg.decay_mean, t_bias));
  return c;
}

void update_span(double* w, double* m, double* v, const double* g, std::size_t n,
                 const StepCoeffs& c, double epsilon, std::size_t layer) {
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(g[i]))
      throw NumericError("adam_step: non-finite gradient element in layer " +
                         std::to_string(layer + 1));
    m[i] = c.c_mean * m[i] + (1.0 - c.c_mean) * g[i];
    v[i] = c.c_var * v[i] + (1.0 - c.c_var) * g[i] * g[i];
    w[i] -= c.step_t * m[i] / (std::sqrt(v[i]) + epsilon);
  }
}

}  // namespace

std::pair<ModelParams, AdamState> adam_step(ModelParams params, AdamState state,
                                            const Gradient& g, const AdamConfig& cfg) {
  cfg.validate();
  if (state.step_count < 0) throw ContractError("adam_step: negative step counter");
  if (g.dweights.size() != params.layers.size() || state.mean.size() != params.layers.size())
    throw ContractError("adam_step: gradient/state layer count does not mirror params");
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    if (!g.dweights[l].same_shape(params.layers[l].weight) ||
        g.dbiases[l].size() != params.layers[l].bias.size())
      throw ContractError("adam_step: gradient shape does not mirror layer " +
                          std::to_string(l + 1));
  }

  const StepCoeffs c = coefficients(cfg, state.step_count);
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    update_span(params.layers[l].weight.data().data(), state.mean[l].data().data(),
                state.variance[l].data().data(), g.dweights[l].data().data(),
                g.dweights[l].size(), c, cfg.epsilon, l);
    update_span(params.layers[l].bias.data(), state.mean_bias[l].data(),
                state.variance_bias[l].data(), g.dbiases[l].data(), g.dbiases[l].size(), c,
                cfg.epsilon, l);
  }
  state.step_count += 1;
  return {std::move(params), std::move(state)};
}

}  // namespace edgecache
