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

#include <utility>
#include <vector>

#include "edgepress/tensor.hpp"

namespace edgepress {

enum class Padding { kValid, kSame };

struct Stride {
  int h = 1;
  int w = 1;
};

// c[i][j] = sum_l a[i][l] * b[l][j]
Tensor matmul(const Tensor& a, const Tensor& b);

// Resolved conv/pool geometry.
struct ConvGeometry {
  int out_h = 0, out_w = 0;
  int pad_top = 0, pad_left = 0;
};
ConvGeometry conv2d_geometry(int in_h, int in_w, int k_h, int k_w, Stride stride,
                             Padding padding);

// input [H,W,C], kernels [kh,kw,C,F] -> [H',W',F]; cross-correlation.
Tensor conv2d_forward(const Tensor& input, const Tensor& kernels, Stride stride,
                      Padding padding);

// Gradients w.r.t. input and kernels given d(output).
void conv2d_backward(const Tensor& input, const Tensor& kernels, Stride stride,
                     Padding padding, const Tensor& grad_out, Tensor* grad_input,
                     Tensor* grad_kernels);

// input [H,W,F] -> window max. argmax (flat input indices) is recorded for
// backward when non-null.
Tensor max_pool(const Tensor& input, std::pair<int, int> window, Stride stride,
                std::vector<int>* argmax = nullptr);

Tensor max_pool_backward(const Tensor& grad_out, const std::vector<int>& input_shape,
                         const std::vector<int>& argmax);

enum class ActKind { kRelu, kSigmoid, kTanh };

float sigmoid(float x);
Tensor apply_activation(const Tensor& input, ActKind kind);
// grad w.r.t. input, given the layer OUTPUT (all three activations allow
// expressing the derivative from the output alone).
Tensor activation_backward(const Tensor& grad_out, const Tensor& output, ActKind kind);

// Numerically stable; result sums to 1.
std::vector<float> softmax(const std::vector<float>& logits);

}  // namespace edgepress
