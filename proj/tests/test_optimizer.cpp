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

#include <doctest.h>

#include <cmath>

#include "edgepress/errors.hpp"
#include "edgepress/loss.hpp"
#include "edgepress/optimizer.hpp"

using namespace edgepress;

TEST_CASE("zero gradient with zero moments leaves parameters unchanged") {
  Tensor w({3}, {0.5f, -0.25f, 2.0f});
  std::map<std::string, Tensor*> params{{"w", &w}};
  Gradients grads;
  grads.emplace("w", Tensor({3}));
  OptimizerState opt = OptimizerState::adam(0.1);
  optimizer_step(opt, params, grads);
  CHECK(w[0] == 0.5f);
  CHECK(w[1] == -0.25f);
  CHECK(w[2] == 2.0f);
  CHECK(opt.step_count == 1);
}

TEST_CASE("first Adam step moves by about lr in the gradient direction") {
  Tensor w({2}, {1.0f, -1.0f});
  std::map<std::string, Tensor*> params{{"w", &w}};
  Gradients grads;
  grads.emplace("w", Tensor({2}, {0.3f, -0.7f}));
  const double lr = 1e-2;
  OptimizerState opt = OptimizerState::adam(lr);
  optimizer_step(opt, params, grads);
  // With bias correction, m_hat = g and v_hat = g^2, so the update is
  // lr * g / (|g| + eps) ~= lr * sign(g).
  CHECK(w[0] == doctest::Approx(1.0f - lr).epsilon(1e-4));
  CHECK(w[1] == doctest::Approx(-1.0f + lr).epsilon(1e-4));
}

TEST_CASE("three Adamax steps match a scalar hand-rolled oracle") {
  const double lr = 5e-3, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  const double g = 0.42;
  Tensor w({1}, {1.0f});
  std::map<std::string, Tensor*> params{{"w", &w}};
  OptimizerState opt = OptimizerState::adamax(lr);

  double ref_w = 1.0, m = 0.0, u = 0.0;
  for (int t = 1; t <= 3; ++t) {
    Gradients grads;
    grads.emplace("w", Tensor({1}, {static_cast<float>(g)}));
    optimizer_step(opt, params, grads);

    m = beta1 * m + (1.0 - beta1) * g;
    u = std::max(beta2 * u, std::fabs(g));
    ref_w -= lr * m / ((1.0 - std::pow(beta1, t)) * (u + eps));
    CHECK(std::fabs(w[0] - ref_w) < 1e-7);
  }
  CHECK(opt.step_count == 3);
}

TEST_CASE("Adam matches a scalar hand-rolled oracle over several steps") {
  const double lr = 1e-2, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  Tensor w({1}, {0.2f});
  std::map<std::string, Tensor*> params{{"w", &w}};
  OptimizerState opt = OptimizerState::adam(lr);

  double ref_w = 0.2, m = 0.0, v = 0.0;
  const double gs[] = {0.5, -0.25, 0.1, 0.9};
  for (int t = 1; t <= 4; ++t) {
    const double g = gs[t - 1];
    Gradients grads;
    grads.emplace("w", Tensor({1}, {static_cast<float>(g)}));
    optimizer_step(opt, params, grads);

    m = beta1 * m + (1.0 - beta1) * g;
    v = beta2 * v + (1.0 - beta2) * g * g;
    const double m_hat = m / (1.0 - std::pow(beta1, t));
    const double v_hat = v / (1.0 - std::pow(beta2, t));
    ref_w -= lr * m_hat / (std::sqrt(v_hat) + eps);
    CHECK(std::fabs(w[0] - ref_w) < 1e-6);
  }
}

TEST_CASE("optimizer updates are deterministic") {
  auto run = [] {
    Tensor w({4}, {0.1f, 0.2f, 0.3f, 0.4f});
    std::map<std::string, Tensor*> params{{"w", &w}};
    OptimizerState opt = OptimizerState::adam(3e-3);
    for (int t = 0; t < 5; ++t) {
      Gradients grads;
      Tensor g({4});
      for (int i = 0; i < 4; ++i) g[i] = 0.01f * static_cast<float>(t + i);
      grads.emplace("w", std::move(g));
      optimizer_step(opt, params, grads);
    }
    return w;
  };
  Tensor a = run();
  Tensor b = run();
  for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);  // bit-identical
}

TEST_CASE("optimizer rejects bad inputs") {
  Tensor w({2});
  std::map<std::string, Tensor*> params{{"w", &w}};
  Gradients grads;
  grads.emplace("w", Tensor({3}));
  OptimizerState opt = OptimizerState::adam(1e-3);
  CHECK_THROWS_AS(optimizer_step(opt, params, grads), ShapeError);
  OptimizerState bad = OptimizerState::adam(0.0);
  Gradients ok;
  ok.emplace("w", Tensor({2}));
  CHECK_THROWS_AS(optimizer_step(bad, params, ok), ParamError);
}
