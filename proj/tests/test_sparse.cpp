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
#include "edgepress/pruning.hpp"
#include "edgepress/rng.hpp"
#include "edgepress/sparse.hpp"

using namespace edgepress;

namespace {

Tensor random_sparse(int rows, int cols, double sparsity, uint64_t seed) {
  Rng rng(seed);
  Tensor t({rows, cols});
  for (size_t i = 0; i < t.size(); ++i) {
    t[i] = rng.uniform() < sparsity ? 0.0f : rng.uniform_f(-1.0f, 1.0f);
  }
  return t;
}

}  // namespace

TEST_CASE("to_csr of the identity") {
  Tensor eye({4, 4});
  for (int i = 0; i < 4; ++i) eye.at(i, i) = 1.0f;
  CsrMatrix m = to_csr(eye);
  m.check();
  CHECK(m.nnz() == 4);
  CHECK(m.col_idx == std::vector<int>{0, 1, 2, 3});
  CHECK(m.row_ptr == std::vector<int>{0, 1, 2, 3, 4});
}

TEST_CASE("to_csr of the zero matrix") {
  CsrMatrix m = to_csr(Tensor({3, 5}));
  m.check();
  CHECK(m.nnz() == 0);
  for (int v : m.row_ptr) CHECK(v == 0);
}

TEST_CASE("to_csr hand-built example") {
  Tensor d({2, 2}, {0.0f, 5.0f, 7.0f, 0.0f});
  CsrMatrix m = to_csr(d);
  CHECK(m.row_ptr == std::vector<int>{0, 1, 2});
  CHECK(m.col_idx == std::vector<int>{1, 0});
  CHECK(m.values == std::vector<float>{5.0f, 7.0f});
}

TEST_CASE("csr round trip is lossless across sparsities") {
  for (double s : {0.0, 0.5, 0.9, 0.99}) {
    Tensor d = random_sparse(17, 23, s, 100 + static_cast<uint64_t>(s * 100));
    Tensor back = from_csr(to_csr(d));
    REQUIRE(back.shape() == d.shape());
    for (size_t i = 0; i < d.size(); ++i) CHECK(back[i] == d[i]);
  }
}

TEST_CASE("csr rejects invalid structures and inputs") {
  CHECK_THROWS_AS(to_csr(Tensor({2, 2, 2})), ShapeError);
  CsrMatrix bad;
  bad.rows = 2;
  bad.cols = 2;
  bad.row_ptr = {0, 1};  // wrong length
  bad.col_idx = {0};
  bad.values = {1.0f};
  CHECK_THROWS_AS(bad.check(), ShapeError);
}

TEST_CASE("csr_matvec identity and zero") {
  Tensor eye({3, 3});
  for (int i = 0; i < 3; ++i) eye.at(i, i) = 1.0f;
  std::vector<float> x{1.0f, -2.0f, 3.0f};
  CHECK(csr_matvec(to_csr(eye), x) == x);

  std::vector<float> y = csr_matvec(to_csr(Tensor({3, 3})), x);
  for (float v : y) CHECK(v == 0.0f);
}

TEST_CASE("csr_matvec matches the dense oracle at 90% sparsity") {
  Tensor a = random_sparse(64, 64, 0.9, 200);
  Rng rng(201);
  std::vector<float> x(64);
  for (auto& v : x) v = rng.uniform_f(-1.0f, 1.0f);
  std::vector<float> ys = csr_matvec(to_csr(a), x);
  std::vector<float> yd = dense_matvec(a, x);
  for (int i = 0; i < 64; ++i) CHECK(std::fabs(ys[i] - yd[i]) <= 1e-6f);
}

TEST_CASE("csr_matvec rejects wrong vector length") {
  Tensor a = random_sparse(4, 5, 0.5, 202);
  CHECK_THROWS_AS(csr_matvec(to_csr(a), std::vector<float>(4)), ShapeError);
}

namespace {

ModelConfig dense_net_config(uint64_t seed) {
  ModelConfig cfg;
  cfg.input_shape = {20};
  cfg.seed = seed;
  LayerSpec fc1;
  fc1.kind = LayerKind::kDense;
  fc1.name = "fc1";
  fc1.units = 30;
  LayerSpec act;
  act.kind = LayerKind::kActivation;
  act.name = "relu";
  act.activation = ActKind::kRelu;
  LayerSpec fc2;
  fc2.kind = LayerKind::kDense;
  fc2.name = "fc2";
  fc2.units = 1;
  LayerSpec out;
  out.kind = LayerKind::kActivation;
  out.name = "out";
  out.activation = ActKind::kSigmoid;
  cfg.layers = {fc1, act, fc2, out};
  return cfg;
}

}  // namespace

TEST_CASE("unpruned model converts nothing and outputs match exactly") {
  Model model = Model::build(dense_net_config(203));
  SparseModel sm = sparsify_model(model);
  for (const auto& r : sm.report) CHECK_FALSE(r.converted);
  CHECK(sm.kernels.empty());
  Rng rng(204);
  Tensor x({20});
  for (size_t i = 0; i < x.size(); ++i) x[i] = rng.uniform_f(-1.0f, 1.0f);
  CHECK(sm.forward(x) == model.forward(x));
}

TEST_CASE("heavily pruned dense layers execute as CSR within 1e-5") {
  Model model = Model::build(dense_net_config(205));
  for (const char* name : {"fc1/kernel", "fc2/kernel"}) {
    Parameter* k = model.find_parameter(name);
    k->mask = magnitude_mask(k->value, 0.95);
  }
  model.apply_masks_in_place();
  SparseModel sm = sparsify_model(model);
  REQUIRE(sm.kernels.size() == 2);
  for (const auto& r : sm.report) {
    CHECK(r.converted);
    CHECK(r.density <= 0.07);  // floor(0.95*30)=28 zeros leaves 2/30 in fc2
  }
  Rng rng(206);
  for (int it = 0; it < 20; ++it) {
    Tensor x({20});
    for (size_t i = 0; i < x.size(); ++i) x[i] = rng.uniform_f(-1.0f, 1.0f);
    CHECK(std::fabs(sm.forward(x) - model.forward(x)) <= 1e-5f);
  }
}

TEST_CASE("density exactly at the threshold converts") {
  Model model = Model::build(dense_net_config(207));
  Parameter* k = model.find_parameter("fc1/kernel");
  // 20x30 = 600 weights; zero exactly 60% so density == 0.4
  k->mask = magnitude_mask(k->value, 0.6);
  model.apply_masks_in_place();
  SparseModel sm = sparsify_model(model, 0.4);
  bool converted_fc1 = false;
  for (const auto& r : sm.report) {
    if (r.layer == "fc1") {
      CHECK(r.density == doctest::Approx(0.4));
      converted_fc1 = r.converted;
    }
  }
  CHECK(converted_fc1);
}
