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

#include "edgepress/optimizer.hpp"

#include <cmath>

#include "edgepress/errors.hpp"

namespace edgepress {

void optimizer_step(OptimizerState& state, std::map<std::string, Tensor*>& params,
                    const Gradients& grads) {
  if (state.learning_rate <= 0.0) throw ParamError("learning_rate must be positive");
  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double bc1 = 1.0 - std::pow(state.beta1, t);
  const double bc2 = 1.0 - std::pow(state.beta2, t);

  for (auto& [name, param] : params) {
    auto git = grads.find(name);
    if (git == grads.end()) continue;
    const Tensor& g = git->second;
    if (!g.same_shape(*param)) {
      throw ShapeError("gradient shape " + g.shape_str() + " != parameter shape " +
                       param->shape_str() + " for " + name);
    }
    Tensor& m = state.first_moment.try_emplace(name, param->shape()).first->second;
    Tensor& v = state.second_moment.try_emplace(name, param->shape()).first->second;
    float* pw = param->data();
    const float* pg = g.data();
    float* pm = m.data();
    float* pv = v.data();
    const size_t n = param->size();
    if (state.kind == OptimizerKind::kAdam) {
      for (size_t i = 0; i < n; ++i) {
        const double gi = pg[i];
        const double mi = state.beta1 * pm[i] + (1.0 - state.beta1) * gi;
        const double vi = state.beta2 * pv[i] + (1.0 - state.beta2) * gi * gi;
        pm[i] = static_cast<float>(mi);
        pv[i] = static_cast<float>(vi);
        const double m_hat = mi / bc1;
        const double v_hat = vi / bc2;
        pw[i] = static_cast<float>(pw[i] - state.learning_rate * m_hat /
                                               (std::sqrt(v_hat) + state.epsilon));
      }
    } else {
      for (size_t i = 0; i < n; ++i) {
        const double gi = pg[i];
        const double mi = state.beta1 * pm[i] + (1.0 - state.beta1) * gi;
        const double ui = std::max(state.beta2 * pv[i], std::fabs(gi));
        pm[i] = static_cast<float>(mi);
        pv[i] = static_cast<float>(ui);
        pw[i] = static_cast<float>(pw[i] -
                                   state.learning_rate * mi / (bc1 * (ui + state.epsilon)));
      }
    }
  }
}

OptimizerKind optimizer_kind_from_string(const std::string& name) {
  if (name == "adam") return OptimizerKind::kAdam;
  if (name == "adamax") return OptimizerKind::kAdamax;
  throw ConfigError("unknown optimizer '" + name + "' (expected adam or adamax)");
}

std::string optimizer_kind_to_string(OptimizerKind kind) {
  return kind == OptimizerKind::kAdam ? "adam" : "adamax";
}

}  // namespace edgepress
