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

#include <cstdint>
#include <string>
#include <vector>

#include "edgepress/model.hpp"
#include "edgepress/tensor.hpp"

namespace edgepress {

struct QuantParams {
  float scale = 1.0f;
  int zero_point = 0;  // in [0, 2^bits - 1]
};

// Unsigned affine payload: real = scale * (q - zero_point). Zero is always
// exactly representable at q == zero_point.
struct QuantizedTensor {
  int bits = 8;  // 8 or 16
  float scale = 1.0f;
  int zero_point = 0;
  std::vector<int> shape;
  std::vector<uint8_t> q8;    // used when bits == 8
  std::vector<uint16_t> q16;  // used when bits == 16

  size_t size() const { return bits == 8 ? q8.size() : q16.size(); }
  int at(size_t i) const { return bits == 8 ? q8[i] : q16[i]; }
  size_t payload_bytes() const { return size() * (bits == 8 ? 1 : 2); }
};

// Round-half-to-even.
double round_half_even(double v);

// Min-max parameters over the value range extended to include 0.
// Degenerate all-equal inputs: value 0 -> {1, 0}; otherwise the single value
// is made exactly representable at an end of the integer range.
QuantParams minmax_params(const Tensor& values, int bits);

QuantizedTensor quantize(const Tensor& values, const QuantParams& params, int bits);
Tensor dequantize(const QuantizedTensor& q);

// Per-layer execution data for the integer path: weights centered at their
// zero point so padded/zero activations contribute nothing.
struct QuantizedLayer {
  std::vector<std::pair<std::string, QuantizedTensor>> weights;
  std::vector<Parameter> float_params;  // biases stay 32-bit real
  // Execution caches (derived, not serialized):
  std::vector<std::vector<int16_t>> centered8;
  std::vector<std::vector<int32_t>> centered16;
};

// Weight-only min-max PTQ; activations are quantized dynamically per layer
// at inference time. Zero-shot: no retraining, no calibration data.
class QuantizedModel {
 public:
  ModelConfig config;
  int bits = 8;
  std::vector<QuantizedLayer> layers;

  // Dense/conv layers run on integer payloads (int16 x int16 -> int32 for
  // 8-bit, int32 x int32 -> int64 for 16-bit), rescaled to reals between
  // layers; LSTM/attention run on dequantized weights.
  float forward(const Tensor& input) const;

  // Model with every weight dequantized; used for the recurrent layers and
  // as a reference in tests.
  Model dequantized() const;
};

QuantizedModel quantize_model(const Model& model, int bits);

float quantized_forward(const QuantizedModel& qmodel, const Tensor& input);

}  // namespace edgepress
