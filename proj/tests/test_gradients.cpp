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
#include "edgepress/model.hpp"
#include "edgepress/rng.hpp"
#include "reference_model.hpp"

using namespace edgepress;

namespace {

Tensor random_input(const std::vector<int>& shape, Rng& rng) {
  Tensor t(shape);
  for (size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform_f(-1.0f, 1.0f);
  return t;
}

// Max relative error between analytic and central-difference gradients over
// every parameter element. Denominator floored so exact zero/zero pairs
// (dead units, masked weights) compare clean.
double max_fd_error(Model& model, const Tensor& input, float target) {
  Gradients grads = model.gradients(input, target);
  double worst = 0.0;
  for (auto& [name, g] : grads) {
    for (size_t i = 0; i < g.size(); ++i) {
      const double fd = testref::fd_gradient(model, name, i, input, target);
      const double ga = g[i];
      const double denom = std::max({std::fabs(ga), std::fabs(fd), 1e-6});
      worst = std::max(worst, std::fabs(ga - fd) / denom);
    }
  }
  return worst;
}

ModelConfig dense_tanh_config(int in, int hidden, uint64_t seed) {
  ModelConfig cfg;
  cfg.input_shape = {in};
  cfg.seed = seed;
  LayerSpec fc1;
  fc1.kind = LayerKind::kDense;
  fc1.name = "fc1";
  fc1.units = hidden;
  LayerSpec act1;
  act1.kind = LayerKind::kActivation;
  act1.name = "tanh1";
  act1.activation = ActKind::kTanh;
  LayerSpec fc2;
  fc2.kind = LayerKind::kDense;
  fc2.name = "fc2";
  fc2.units = 1;
  LayerSpec out;
  out.kind = LayerKind::kActivation;
  out.name = "out";
  out.activation = ActKind::kSigmoid;
  cfg.layers = {fc1, act1, fc2, out};
  return cfg;
}

}  // namespace

TEST_CASE("dense+sigmoid+BCE closed-form gradient") {
  ModelConfig cfg;
  cfg.input_shape = {3};
  cfg.seed = 7;
  LayerSpec fc;
  fc.kind = LayerKind::kDense;
  fc.name = "fc";
  fc.units = 1;
  LayerSpec out;
  out.kind = LayerKind::kActivation;
  out.name = "out";
  out.activation = ActKind::kSigmoid;
  cfg.layers = {fc, out};
  Model model = Model::build(cfg);

  Rng rng(31);
  Tensor x = random_input({3}, rng);
  const float y = 1.0f;
  const float p = model.forward(x);
  Gradients g = model.gradients(x, y);

  // d(loss)/d(bias) is the logit gradient: p - y.
  CHECK(g.at("fc/bias")[0] == doctest::Approx(p - y).epsilon(1e-5));
  // d(loss)/d(w_i) = (p - y) * x_i.
  for (int i = 0; i < 3; ++i) {
    CHECK(g.at("fc/kernel")[i] == doctest::Approx((p - y) * x[i]).epsilon(1e-4));
  }
}

TEST_CASE("near-perfect prediction gives near-zero gradients") {
  ModelConfig cfg = dense_tanh_config(4, 3, 77);
  Model model = Model::build(cfg);
  Rng rng(32);
  Tensor x = random_input({4}, rng);
  const float p = model.forward(x);
  // Train toward the current output: target == p means p - y == 0.
  Gradients g = model.gradients(x, p);
  for (auto& [name, tensor] : g) {
    for (size_t i = 0; i < tensor.size(); ++i) {
      CHECK(std::fabs(tensor[i]) < 1e-5);
    }
  }
}

TEST_CASE("2-layer dense net matches central differences") {
  ModelConfig cfg = dense_tanh_config(6, 5, 1234);
  Model model = Model::build(cfg);
  Rng rng(33);
  Tensor x = random_input({6}, rng);
  CHECK(max_fd_error(model, x, 1.0f) < 1e-3);
  CHECK(max_fd_error(model, x, 0.0f) < 1e-3);
}

TEST_CASE("regularized dense net matches central differences") {
  ModelConfig cfg = dense_tanh_config(5, 4, 99);
  cfg.layers[0].regularization = {3e-4f, 4e-3f, 3e-3f};
  cfg.layers[2].regularization = {1e-3f, 1e-2f, 1e-2f};
  Model model = Model::build(cfg);
  Rng rng(34);
  Tensor x = random_input({5}, rng);
  CHECK(max_fd_error(model, x, 1.0f) < 1e-3);
}

TEST_CASE("conv/pool/relu net matches central differences") {
  ModelConfig cfg;
  cfg.input_shape = {6, 6, 1};
  cfg.seed = 4321;
  LayerSpec conv;
  conv.kind = LayerKind::kConv2d;
  conv.name = "conv";
  conv.filters = 3;
  conv.kernel_h = conv.kernel_w = 3;
  conv.padding = Padding::kSame;
  LayerSpec act;
  act.kind = LayerKind::kActivation;
  act.name = "relu";
  act.activation = ActKind::kRelu;
  LayerSpec pool;
  pool.kind = LayerKind::kMaxPool;
  pool.name = "pool";
  pool.pool_h = pool.pool_w = 2;
  pool.stride = {2, 2};
  LayerSpec flat;
  flat.kind = LayerKind::kFlatten;
  flat.name = "flat";
  LayerSpec fc;
  fc.kind = LayerKind::kDense;
  fc.name = "fc";
  fc.units = 1;
  LayerSpec out;
  out.kind = LayerKind::kActivation;
  out.name = "out";
  out.activation = ActKind::kSigmoid;
  cfg.layers = {conv, act, pool, flat, fc, out};
  Model model = Model::build(cfg);
  Rng rng(35);
  Tensor x = random_input({6, 6, 1}, rng);
  CHECK(max_fd_error(model, x, 0.0f) < 1e-3);
}

TEST_CASE("lstm+attention net matches central differences") {
  ModelConfig cfg;
  cfg.input_shape = {4, 3};  // [T, d]
  cfg.seed = 2024;
  LayerSpec lstm;
  lstm.kind = LayerKind::kLstm;
  lstm.name = "lstm";
  lstm.units = 4;
  LayerSpec attn;
  attn.kind = LayerKind::kAttention;
  attn.name = "attn";
  attn.prunable = false;
  LayerSpec fc;
  fc.kind = LayerKind::kDense;
  fc.name = "fc";
  fc.units = 1;
  LayerSpec out;
  out.kind = LayerKind::kActivation;
  out.name = "out";
  out.activation = ActKind::kSigmoid;
  cfg.layers = {lstm, attn, fc, out};
  Model model = Model::build(cfg);
  Rng rng(36);
  Tensor x = random_input({4, 3}, rng);
  CHECK(max_fd_error(model, x, 1.0f) < 1e-3);
}

TEST_CASE("conv->lstm time-major repack matches central differences") {
  ModelConfig cfg;
  cfg.input_shape = {4, 5, 1};
  cfg.seed = 555;
  LayerSpec conv;
  conv.kind = LayerKind::kConv2d;
  conv.name = "conv";
  conv.filters = 2;
  conv.kernel_h = conv.kernel_w = 2;
  conv.padding = Padding::kSame;
  LayerSpec act;
  act.kind = LayerKind::kActivation;
  act.name = "tanh";
  act.activation = ActKind::kTanh;
  LayerSpec lstm;
  lstm.kind = LayerKind::kLstm;
  lstm.name = "lstm";
  lstm.units = 3;
  LayerSpec attn;
  attn.kind = LayerKind::kAttention;
  attn.name = "attn";
  attn.prunable = false;
  LayerSpec fc;
  fc.kind = LayerKind::kDense;
  fc.name = "fc";
  fc.units = 1;
  LayerSpec out;
  out.kind = LayerKind::kActivation;
  out.name = "out";
  out.activation = ActKind::kSigmoid;
  cfg.layers = {conv, act, lstm, attn, fc, out};
  Model model = Model::build(cfg);
  Rng rng(37);
  Tensor x = random_input({4, 5, 1}, rng);
  CHECK(max_fd_error(model, x, 1.0f) < 1e-3);
}

TEST_CASE("random small models satisfy the finite-difference property") {
  // A few random architectures under 1e3 parameters each.
  const uint64_t seeds[] = {10, 20, 30};
  for (uint64_t seed : seeds) {
    ModelConfig cfg = dense_tanh_config(8, 7, seed);
    Model model = Model::build(cfg);
    REQUIRE(model.param_count() <= 1000);
    Rng rng(40 + seed);
    Tensor x = random_input({8}, rng);
    CHECK(max_fd_error(model, x, static_cast<float>(seed % 2)) < 1e-3);
  }
}

TEST_CASE("non-finite intermediate names the offending layer") {
  ModelConfig cfg = dense_tanh_config(3, 2, 5);
  Model model = Model::build(cfg);
  model.find_parameter("fc1/kernel")->value[0] = std::numeric_limits<float>::quiet_NaN();
  Rng rng(41);
  Tensor x = random_input({3}, rng);
  try {
    model.gradients(x, 1.0f);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("fc1") != std::string::npos);
  }
}
