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

#include "edgepress/recurrent.hpp"

#include <cmath>

#include "edgepress/errors.hpp"
#include "edgepress/ops.hpp"

namespace edgepress {

namespace {

void check_lstm_shapes(const Tensor& seq, const LstmParams& p) {
  if (seq.rank() != 2) throw ShapeError("lstm input must be [T,d], got " + seq.shape_str());
  if (p.wx.rank() != 2 || p.wh.rank() != 2 || p.b.rank() != 1) {
    throw ShapeError("lstm parameter ranks invalid");
  }
  const int d = seq.dim(1);
  const int h4 = p.wx.dim(1);
  if (h4 % 4 != 0 || p.wx.dim(0) != d || p.wh.dim(1) != h4 || p.wh.dim(0) != h4 / 4 ||
      p.b.dim(0) != h4) {
    throw ShapeError("lstm parameter shapes inconsistent: wx " + p.wx.shape_str() + ", wh " +
                     p.wh.shape_str() + ", b " + p.b.shape_str() + ", input " + seq.shape_str());
  }
  if (seq.dim(0) < 1) throw ShapeError("lstm needs at least one timestep");
}

}  // namespace

Tensor lstm_forward(const Tensor& seq, const LstmParams& params, LstmCache* cache) {
  check_lstm_shapes(seq, params);
  const int steps = seq.dim(0), d = seq.dim(1);
  const int h4 = params.wx.dim(1), h = h4 / 4;

  Tensor gates({steps, h4});
  Tensor cells({steps, h});
  Tensor hidden({steps, h});
  std::vector<float> pre(h4);

  for (int t = 0; t < steps; ++t) {
    for (int j = 0; j < h4; ++j) pre[j] = params.b[j];
    const float* x = seq.data() + static_cast<size_t>(t) * d;
    for (int i = 0; i < d; ++i) {
      const float xi = x[i];
      const float* row = params.wx.data() + static_cast<size_t>(i) * h4;
      for (int j = 0; j < h4; ++j) pre[j] += xi * row[j];
    }
    if (t > 0) {
      const float* hp = hidden.data() + static_cast<size_t>(t - 1) * h;
      for (int i = 0; i < h; ++i) {
        const float hi = hp[i];
        const float* row = params.wh.data() + static_cast<size_t>(i) * h4;
        for (int j = 0; j < h4; ++j) pre[j] += hi * row[j];
      }
    }
    float* g = gates.data() + static_cast<size_t>(t) * h4;
    for (int j = 0; j < h; ++j) {
      const float ig = sigmoid(pre[j]);
      const float fg = sigmoid(pre[h + j]);
      const float cand = std::tanh(pre[2 * h + j]);
      const float og = sigmoid(pre[3 * h + j]);
      g[j] = ig;
      g[h + j] = fg;
      g[2 * h + j] = cand;
      g[3 * h + j] = og;
      const float c_prev = t > 0 ? cells.at(t - 1, j) : 0.0f;
      const float c = fg * c_prev + ig * cand;
      cells.at(t, j) = c;
      hidden.at(t, j) = og * std::tanh(c);
    }
  }
  if (cache) {
    cache->gates = std::move(gates);
    cache->cells = std::move(cells);
    cache->hidden = hidden;
  }
  return hidden;
}

Tensor lstm_backward(const Tensor& seq, const LstmParams& params, const LstmCache& cache,
                     const Tensor& grad_hidden, LstmParams* grads) {
  check_lstm_shapes(seq, params);
  const int steps = seq.dim(0), d = seq.dim(1);
  const int h4 = params.wx.dim(1), h = h4 / 4;

  Tensor grad_seq({steps, d});
  grads->wx = Tensor(params.wx.shape());
  grads->wh = Tensor(params.wh.shape());
  grads->b = Tensor(params.b.shape());

  std::vector<float> dh(h, 0.0f), dc(h, 0.0f), dpre(h4);
  for (int t = steps - 1; t >= 0; --t) {
    const float* g = cache.gates.data() + static_cast<size_t>(t) * h4;
    for (int j = 0; j < h; ++j) {
      const float dht = dh[j] + grad_hidden.at(t, j);
      const float ig = g[j], fg = g[h + j], cand = g[2 * h + j], og = g[3 * h + j];
      const float c = cache.cells.at(t, j);
      const float tc = std::tanh(c);
      const float dct = dc[j] + dht * og * (1.0f - tc * tc);
      const float c_prev = t > 0 ? cache.cells.at(t - 1, j) : 0.0f;
      dpre[j] = dct * cand * ig * (1.0f - ig);
      dpre[h + j] = dct * c_prev * fg * (1.0f - fg);
      dpre[2 * h + j] = dct * ig * (1.0f - cand * cand);
      dpre[3 * h + j] = dht * tc * og * (1.0f - og);
      dc[j] = dct * fg;
    }
    for (int j = 0; j < h4; ++j) grads->b[j] += dpre[j];
    const float* x = seq.data() + static_cast<size_t>(t) * d;
    float* dx = grad_seq.data() + static_cast<size_t>(t) * d;
    for (int i = 0; i < d; ++i) {
      const float* row = params.wx.data() + static_cast<size_t>(i) * h4;
      float* grow = grads->wx.data() + static_cast<size_t>(i) * h4;
      float acc = 0.0f;
      for (int j = 0; j < h4; ++j) {
        acc += row[j] * dpre[j];
        grow[j] += x[i] * dpre[j];
      }
      dx[i] = acc;
    }
    std::fill(dh.begin(), dh.end(), 0.0f);
    if (t > 0) {
      const float* hp = cache.hidden.data() + static_cast<size_t>(t - 1) * h;
      for (int i = 0; i < h; ++i) {
        const float* row = params.wh.data() + static_cast<size_t>(i) * h4;
        float* grow = grads->wh.data() + static_cast<size_t>(i) * h4;
        float acc = 0.0f;
        for (int j = 0; j < h4; ++j) {
          acc += row[j] * dpre[j];
          grow[j] += hp[i] * dpre[j];
        }
        dh[i] = acc;
      }
    }
  }
  return grad_seq;
}

Tensor attention_pool(const Tensor& hidden, const Tensor& score_matrix,
                      const Tensor& score_vector, AttentionCache* cache) {
  if (hidden.rank() != 2 || hidden.dim(0) < 1) {
    throw ShapeError("attention expects hidden [T,h] with T >= 1, got " + hidden.shape_str());
  }
  const int steps = hidden.dim(0), h = hidden.dim(1);
  if (score_matrix.rank() != 2 || score_matrix.dim(1) != h || score_vector.rank() != 1 ||
      score_vector.dim(0) != score_matrix.dim(0)) {
    throw ShapeError("attention score shapes inconsistent: matrix " + score_matrix.shape_str() +
                     ", vector " + score_vector.shape_str() + ", hidden " + hidden.shape_str());
  }
  const int a = score_matrix.dim(0);

  Tensor scores_tanh({steps, a});
  std::vector<float> energies(steps);
  for (int t = 0; t < steps; ++t) {
    const float* ht = hidden.data() + static_cast<size_t>(t) * h;
    float e = 0.0f;
    for (int p = 0; p < a; ++p) {
      const float* row = score_matrix.data() + static_cast<size_t>(p) * h;
      float u = 0.0f;
      for (int q = 0; q < h; ++q) u += row[q] * ht[q];
      const float s = std::tanh(u);
      scores_tanh.at(t, p) = s;
      e += score_vector[p] * s;
    }
    energies[t] = e;
  }
  std::vector<float> alpha = softmax(energies);

  Tensor out({h});
  for (int t = 0; t < steps; ++t) {
    const float* ht = hidden.data() + static_cast<size_t>(t) * h;
    const float at = alpha[t];
    for (int q = 0; q < h; ++q) out[q] += at * ht[q];
  }
  if (cache) {
    cache->scores_tanh = std::move(scores_tanh);
    cache->alpha = std::move(alpha);
  }
  return out;
}

Tensor attention_backward(const Tensor& hidden, const Tensor& score_matrix,
                          const Tensor& score_vector, const AttentionCache& cache,
                          const Tensor& grad_out, Tensor* grad_matrix, Tensor* grad_vector) {
  const int steps = hidden.dim(0), h = hidden.dim(1);
  const int a = score_matrix.dim(0);
  Tensor grad_hidden({steps, h});

  // d(out)/d(alpha_t) and the direct d(out)/d(h_t) term.
  std::vector<float> dalpha(steps);
  for (int t = 0; t < steps; ++t) {
    const float* ht = hidden.data() + static_cast<size_t>(t) * h;
    float acc = 0.0f;
    for (int q = 0; q < h; ++q) {
      acc += grad_out[q] * ht[q];
      grad_hidden.at(t, q) += cache.alpha[t] * grad_out[q];
    }
    dalpha[t] = acc;
  }
  // Softmax backward.
  float dot = 0.0f;
  for (int t = 0; t < steps; ++t) dot += cache.alpha[t] * dalpha[t];
  std::vector<float> denergy(steps);
  for (int t = 0; t < steps; ++t) denergy[t] = cache.alpha[t] * (dalpha[t] - dot);

  for (int t = 0; t < steps; ++t) {
    const float* ht = hidden.data() + static_cast<size_t>(t) * h;
    const float de = denergy[t];
    for (int p = 0; p < a; ++p) {
      const float s = cache.scores_tanh.at(t, p);
      (*grad_vector)[p] += de * s;
      const float du = de * score_vector[p] * (1.0f - s * s);
      const float* row = score_matrix.data() + static_cast<size_t>(p) * h;
      float* grow = grad_matrix->data() + static_cast<size_t>(p) * h;
      for (int q = 0; q < h; ++q) {
        grow[q] += du * ht[q];
        grad_hidden.at(t, q) += du * row[q];
      }
    }
  }
  return grad_hidden;
}

}  // namespace edgepress
