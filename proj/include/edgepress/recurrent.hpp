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

// Gate layout along the 4h axis: [input, forget, candidate, output].
struct LstmParams {
  Tensor wx;  // [d, 4h]
  Tensor wh;  // [h, 4h]
  Tensor b;   // [4h]
};

struct LstmCache {
  Tensor gates;  // [T, 4h] post-activation
  Tensor cells;  // [T, h]
  Tensor hidden; // [T, h]
};

// seq [T, d] -> all hidden states [T, h]; zero initial state.
Tensor lstm_forward(const Tensor& seq, const LstmParams& params, LstmCache* cache = nullptr);

// BPTT. grad_hidden is dLoss/dH for every step [T, h]; returns dLoss/dseq.
Tensor lstm_backward(const Tensor& seq, const LstmParams& params, const LstmCache& cache,
                     const Tensor& grad_hidden, LstmParams* grads);

struct AttentionCache {
  Tensor scores_tanh;        // [T, a]
  std::vector<float> alpha;  // [T], sums to 1
};

// e_t = score_vector . tanh(score_matrix . h_t); alpha = softmax(e);
// output = sum_t alpha_t h_t.
Tensor attention_pool(const Tensor& hidden, const Tensor& score_matrix,
                      const Tensor& score_vector, AttentionCache* cache = nullptr);

// Returns dLoss/dhidden [T, h]; accumulates into grad_matrix/grad_vector.
Tensor attention_backward(const Tensor& hidden, const Tensor& score_matrix,
                          const Tensor& score_vector, const AttentionCache& cache,
                          const Tensor& grad_out, Tensor* grad_matrix, Tensor* grad_vector);

}  // namespace edgepress
