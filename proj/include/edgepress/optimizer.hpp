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

#include <map>
#include <string>

#include "edgepress/tensor.hpp"

namespace edgepress {

enum class OptimizerKind { kAdam, kAdamax };

// Gradients keyed by parameter name; std::map keeps iteration order stable.
using Gradients = std::map<std::string, Tensor>;

// Adam with bias correction, or Adamax with an infinity-norm second moment.
// Moments are lazily shape-matched to their parameters on first update.
struct OptimizerState {
  OptimizerKind kind = OptimizerKind::kAdam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  long step_count = 0;
  std::map<std::string, Tensor> first_moment;
  std::map<std::string, Tensor> second_moment;

  OptimizerState() = default;
  OptimizerState(OptimizerKind k, double lr) : kind(k), learning_rate(lr) {}

  static OptimizerState adam(double lr) { return {OptimizerKind::kAdam, lr}; }
  static OptimizerState adamax(double lr) { return {OptimizerKind::kAdamax, lr}; }
};

// One update over all named parameters. Deterministic given inputs;
// step_count increments by exactly 1.
void optimizer_step(OptimizerState& state, std::map<std::string, Tensor*>& params,
                    const Gradients& grads);

OptimizerKind optimizer_kind_from_string(const std::string& name);
std::string optimizer_kind_to_string(OptimizerKind kind);

}  // namespace edgepress
