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
#include "edgepress/ops.hpp"
#include "edgepress/rng.hpp"
#include "reference_model.hpp"

using namespace edgepress;

namespace {

Tensor random_tensor(std::vector<int> shape, Rng& rng, float lo = -1.0f, float hi = 1.0f) {
  Tensor t(std::move(shape));
  for (size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform_f(lo, hi);
  return t;
}

}  // namespace

TEST_CASE("tensor shape/data invariants") {
  Tensor t({2, 3});
  CHECK(t.size() == 6);
  CHECK_THROWS_AS(Tensor({2, 0}), ShapeError);
  CHECK_THROWS_AS(Tensor({2, 2}, {1.0f, 2.0f}), ShapeError);
  CHECK_THROWS_AS(t.reshaped({4}), ShapeError);
  CHECK(t.reshaped({3, 2}).shape() == std::vector<int>{3, 2});
}

TEST_CASE("matmul identity") {
  Rng rng(11);
  Tensor b = random_tensor({3, 4}, rng);
  Tensor eye({3, 3});
  for (int i = 0; i < 3; ++i) eye.at(i, i) = 1.0f;
  Tensor c = matmul(eye, b);
  for (size_t i = 0; i < b.size(); ++i) CHECK(c[i] == b[i]);
}

TEST_CASE("matmul small known product") {
  Tensor a = Tensor::from_rows({{1, 2}, {3, 4}});
  Tensor b = Tensor::from_rows({{5}, {6}});
  Tensor c = matmul(a, b);
  CHECK(c.at(0, 0) == doctest::Approx(17.0));
  CHECK(c.at(1, 0) == doctest::Approx(39.0));
}

TEST_CASE("matmul zero annihilator") {
  Rng rng(12);
  Tensor z({2, 3});
  Tensor b = random_tensor({3, 5}, rng);
  Tensor c = matmul(z, b);
  for (size_t i = 0; i < c.size(); ++i) CHECK(c[i] == 0.0f);
}

TEST_CASE("matmul dimension mismatch") {
  CHECK_THROWS_AS(matmul(Tensor({2, 3}), Tensor({4, 2})), ShapeError);
  CHECK_THROWS_AS(matmul(Tensor({2}), Tensor({2, 2})), ShapeError);
}

TEST_CASE("matmul matches naive loop oracle on random inputs") {
  Rng rng(13);
  for (int it = 0; it < 10; ++it) {
    const int m = rng.uniform_int(1, 8), k = rng.uniform_int(1, 8), n = rng.uniform_int(1, 8);
    Tensor a = random_tensor({m, k}, rng);
    Tensor b = random_tensor({k, n}, rng);
    Tensor c = matmul(a, b);
    // naive double-precision triple loop
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) {
        double acc = 0.0;
        for (int l = 0; l < k; ++l) {
          acc += static_cast<double>(a.at(i, l)) * b.at(l, j);
        }
        CHECK(std::fabs(c.at(i, j) - acc) < 1e-6);
      }
    }
  }
}

TEST_CASE("conv2d identity kernel") {
  Rng rng(14);
  Tensor in = random_tensor({4, 5, 1}, rng);
  Tensor k({1, 1, 1, 1});
  k[0] = 1.0f;
  Tensor out = conv2d_forward(in, k, {1, 1}, Padding::kValid);
  REQUIRE(out.shape() == in.shape());
  for (size_t i = 0; i < in.size(); ++i) CHECK(out[i] == in[i]);
}

TEST_CASE("conv2d all-ones kernel on constant field") {
  const float c = 0.37f;
  Tensor in = Tensor::full({5, 6, 1}, c);
  Tensor k = Tensor::full({3, 3, 1, 1}, 1.0f);
  Tensor out = conv2d_forward(in, k, {1, 1}, Padding::kValid);
  REQUIRE(out.shape() == std::vector<int>{3, 4, 1});
  for (size_t i = 0; i < out.size(); ++i) CHECK(out[i] == doctest::Approx(9.0f * c));
}

TEST_CASE("conv2d direct oracle 2x2") {
  Tensor in({2, 2, 1}, {1, 2, 3, 4});
  Tensor k({2, 2, 1, 1}, {1, 0, 0, 1});
  Tensor out = conv2d_forward(in, k, {1, 1}, Padding::kValid);
  REQUIRE(out.shape() == std::vector<int>{1, 1, 1});
  CHECK(out[0] == doctest::Approx(5.0f));
}

TEST_CASE("conv2d kernel larger than input") {
  CHECK_THROWS_AS(
      conv2d_forward(Tensor({2, 2, 1}), Tensor({3, 3, 1, 1}), {1, 1}, Padding::kValid),
      ShapeError);
}

TEST_CASE("conv2d matches reference on random inputs, both paddings") {
  Rng rng(15);
  for (int it = 0; it < 8; ++it) {
    const int h = rng.uniform_int(3, 8), w = rng.uniform_int(3, 8);
    const int c = rng.uniform_int(1, 3), f = rng.uniform_int(1, 4);
    const int kh = rng.uniform_int(1, 3), kw = rng.uniform_int(1, 3);
    const Stride stride{rng.uniform_int(1, 2), rng.uniform_int(1, 2)};
    const Padding pad = it % 2 == 0 ? Padding::kValid : Padding::kSame;
    Tensor in = random_tensor({h, w, c}, rng);
    Tensor k = random_tensor({kh, kw, c, f}, rng);
    Tensor out = conv2d_forward(in, k, stride, pad);
    testref::RefBuf rout =
        testref::ref_conv2d(testref::RefBuf::from(in), k, Tensor({f}), stride, pad);
    REQUIRE(out.shape() == rout.shape);
    for (size_t i = 0; i < out.size(); ++i) {
      CHECK(std::fabs(out[i] - rout.v[i]) < 1e-6);
    }
  }
}

TEST_CASE("max_pool constant input") {
  Tensor in = Tensor::full({4, 4, 2}, 1.5f);
  Tensor out = max_pool(in, {2, 2}, {2, 2});
  for (size_t i = 0; i < out.size(); ++i) CHECK(out[i] == 1.5f);
}

TEST_CASE("max_pool of four") {
  Tensor in({2, 2, 1}, {1, 2, 3, 4});
  Tensor out = max_pool(in, {2, 2}, {2, 2});
  REQUIRE(out.size() == 1);
  CHECK(out[0] == 4.0f);
}

TEST_CASE("max_pool ramp windows") {
  Tensor in({4, 4, 1});
  for (int i = 0; i < 16; ++i) in[i] = static_cast<float>(i);
  Tensor out = max_pool(in, {2, 2}, {2, 2});
  REQUIRE(out.shape() == std::vector<int>{2, 2, 1});
  CHECK(out[0] == 5.0f);
  CHECK(out[1] == 7.0f);
  CHECK(out[2] == 13.0f);
  CHECK(out[3] == 15.0f);
}

TEST_CASE("max_pool errors") {
  CHECK_THROWS_AS(max_pool(Tensor({2, 2, 1}), {0, 2}, {1, 1}), ParamError);
  CHECK_THROWS_AS(max_pool(Tensor({2, 2, 1}), {3, 3}, {1, 1}), ShapeError);
}

TEST_CASE("max_pool matches reference on random inputs") {
  Rng rng(16);
  for (int it = 0; it < 8; ++it) {
    const int h = rng.uniform_int(2, 8), w = rng.uniform_int(2, 8), c = rng.uniform_int(1, 3);
    const int wh = rng.uniform_int(1, h), ww = rng.uniform_int(1, w);
    const Stride stride{rng.uniform_int(1, 2), rng.uniform_int(1, 2)};
    Tensor in = random_tensor({h, w, c}, rng);
    Tensor out = max_pool(in, {wh, ww}, stride);
    testref::RefBuf rout = testref::ref_maxpool(testref::RefBuf::from(in), wh, ww, stride);
    REQUIRE(out.shape() == rout.shape);
    for (size_t i = 0; i < out.size(); ++i) {
      CHECK(std::fabs(out[i] - rout.v[i]) < 1e-6);
    }
  }
}

TEST_CASE("activations and softmax") {
  Tensor in({4}, {-1.0f, 0.0f, 0.5f, 2.0f});
  Tensor r = apply_activation(in, ActKind::kRelu);
  CHECK(r[0] == 0.0f);
  CHECK(r[3] == 2.0f);
  Tensor s = apply_activation(in, ActKind::kSigmoid);
  CHECK(s[1] == doctest::Approx(0.5f));
  Tensor t = apply_activation(in, ActKind::kTanh);
  CHECK(t[1] == 0.0f);
  CHECK(t[3] == doctest::Approx(std::tanh(2.0f)));

  auto sm = softmax({1.0f, 2.0f, 3.0f});
  float sum = 0.0f;
  for (float v : sm) {
    CHECK(v >= 0.0f);
    sum += v;
  }
  CHECK(sum == doctest::Approx(1.0f).epsilon(1e-6));
  CHECK(sm[2] > sm[1]);
}
