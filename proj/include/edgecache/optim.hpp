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

#ifndef EDGECACHE_OPTIM_HPP
#define EDGECACHE_OPTIM_HPP

#include <utility>
#include <vector>

#include "edgecache/model.hpp"

namespace edgecache {

// Two moment-recurrence flavors share the update skeleton
//   mean'     = c_mean * mean + (1 - c_mean) * g
//   variance' = c_var  * variance + (1 - c_var) * g^2
//   step_t    = step * sqrt(1 - decay_var^t) / (1 - decay_mean^t),  t = tau + 1
//   omega'    = omega - step_t * mean' / (sqrt(variance') + epsilon)
// and differ only in the moment coefficients:
//   paper:    c_mean = decay_mean^tau, c_var = decay_var^tau (powers of the
//             0-based step counter; the first step leaves the moments, and
//             hence omega, unchanged)
//   standard: c_mean = decay_mean, c_var = decay_var (constants)
enum class AdamMode { paper, standard };

struct AdamConfig {
  double step = 1e-3;        // base step size
  double decay_mean = 0.9;   // decay of the gradient moving average
  double decay_var = 0.999;  // decay of the squared-gradient moving average
  double epsilon = 1e-8;     // zero-division guard
  AdamMode mode = AdamMode::paper;

  void validate() const;
};

struct AdamState {
  std::vector<Matrix> mean;                      // gradient moving average
  std::vector<std::vector<double>> mean_bias;    //   ... for bias vectors
  std::vector<Matrix> variance;                  // squared-gradient average
  std::vector<std::vector<double>> variance_bias;
  long long step_count = 0;  // tau; increments by exactly 1 per step

  static AdamState init(const ModelParams& params);
};

// Elementwise arithmetic mean, accumulated in list order so the reduction is
// deterministic. Empty list or mismatched shapes throw ContractError.
Gradient average_gradients(const std::vector<Gradient>& grads);

// One optimizer step; returns the updated (params, state) pair. Throws
// NumericError naming the layer on non-finite gradient elements.
std::pair<ModelParams, AdamState> adam_step(ModelParams params, AdamState state,
                                            const Gradient& g, const AdamConfig& cfg);

}  // namespace edgecache

#endif  // EDGECACHE_OPTIM_HPP
