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

#include "edgepress/loss.hpp"

#include <algorithm>
#include <cmath>

namespace edgepress {

float bce_loss(float p, float y) {
  const float pc = std::clamp(p, kBceClip, 1.0f - kBceClip);
  return -(y * std::log(pc) + (1.0f - y) * std::log(1.0f - pc));
}

float elastic_net_penalty(const Tensor& weights, const ElasticNetCoeffs& coeffs) {
  if (coeffs.l1_weight == 0.0f && coeffs.l2_weight == 0.0f) return 0.0f;
  double l1 = 0.0, l2 = 0.0;
  for (float w : weights.vec()) {
    l1 += std::fabs(w);
    l2 += static_cast<double>(w) * w;
  }
  return static_cast<float>(coeffs.l1_weight * l1 + coeffs.l2_weight * l2);
}

float bias_l2_penalty(const Tensor& bias, const ElasticNetCoeffs& coeffs) {
  if (coeffs.l2_bias == 0.0f) return 0.0f;
  double l2 = 0.0;
  for (float b : bias.vec()) l2 += static_cast<double>(b) * b;
  return static_cast<float>(coeffs.l2_bias * l2);
}

void add_elastic_net_grad(const Tensor& weights, const ElasticNetCoeffs& coeffs, Tensor* grad) {
  if (coeffs.l1_weight == 0.0f && coeffs.l2_weight == 0.0f) return;
  for (size_t i = 0; i < weights.size(); ++i) {
    const float w = weights[i];
    const float sign = w > 0.0f ? 1.0f : (w < 0.0f ? -1.0f : 0.0f);
    (*grad)[i] += coeffs.l1_weight * sign + 2.0f * coeffs.l2_weight * w;
  }
}

void add_bias_l2_grad(const Tensor& bias, const ElasticNetCoeffs& coeffs, Tensor* grad) {
  if (coeffs.l2_bias == 0.0f) return;
  for (size_t i = 0; i < bias.size(); ++i) (*grad)[i] += 2.0f * coeffs.l2_bias * bias[i];
}

}  // namespace edgepress
