// Copyright 2026 The edgepress authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "edgepress/tensor.hpp"

namespace edgepress {

// Probabilities are clipped into [kBceClip, 1 - kBceClip] before the log.
inline constexpr float kBceClip = 1e-7f;

// -[y ln p + (1-y) ln(1-p)], p clipped.
float bce_loss(float p, float y);

struct ElasticNetCoeffs {
  float l1_weight = 0.0f;
  float l2_weight = 0.0f;
  float l2_bias = 0.0f;

  bool any() const { return l1_weight > 0.0f || l2_weight > 0.0f || l2_bias > 0.0f; }
};

// l1 * sum|w| + l2 * sum w^2 over the weight tensor.
float elastic_net_penalty(const Tensor& weights, const ElasticNetCoeffs& coeffs);

// l2_bias * sum b^2.
float bias_l2_penalty(const Tensor& bias, const ElasticNetCoeffs& coeffs);

// Adds d(penalty)/dw into grad (l1*sign(w) + 2*l2*w).
void add_elastic_net_grad(const Tensor& weights, const ElasticNetCoeffs& coeffs, Tensor* grad);
void add_bias_l2_grad(const Tensor& bias, const ElasticNetCoeffs& coeffs, Tensor* grad);

}  // namespace edgepress
