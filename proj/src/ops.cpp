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

#include "edgepress/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "edgepress/errors.hpp"

namespace edgepress {

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2) {
    throw ShapeError("matmul expects 2-D tensors, got " + a.shape_str() + " x " + b.shape_str());
  }
  const int m = a.dim(0), k = a.dim(1), k2 = b.dim(0), n = b.dim(1);
  if (k != k2) {
    throw ShapeError("matmul inner dimensions disagree: " + a.shape_str() + " x " + b.shape_str());
  }
  Tensor c({m, n});
  const float* pa = a.data();
  const float* pb = b.data();
  float* pc = c.data();
  for (int i = 0; i < m; ++i) {
    for (int l = 0; l < k; ++l) {
      const float ail = pa[static_cast<size_t>(i) * k + l];
      const float* brow = pb + static_cast<size_t>(l) * n;
      float* crow = pc + static_cast<size_t>(i) * n;
      for (int j = 0; j < n; ++j) crow[j] += ail * brow[j];
    }
  }
  return c;
}

ConvGeometry conv2d_geometry(int in_h, int in_w, int k_h, int k_w, Stride stride,
                             Padding padding) {
  if (stride.h < 1 || stride.w < 1) throw ParamError("conv2d stride must be positive");
  ConvGeometry g;
  if (padding == Padding::kValid) {
    if (k_h > in_h || k_w > in_w) {
      throw ShapeError("kernel " + std::to_string(k_h) + "x" + std::to_string(k_w) +
                       " larger than input " + std::to_string(in_h) + "x" + std::to_string(in_w));
    }
    g.out_h = (in_h - k_h) / stride.h + 1;
    g.out_w = (in_w - k_w) / stride.w + 1;
  } else {
    g.out_h = (in_h + stride.h - 1) / stride.h;
    g.out_w = (in_w + stride.w - 1) / stride.w;
    const int pad_h = std::max(0, (g.out_h - 1) * stride.h + k_h - in_h);
    const int pad_w = std::max(0, (g.out_w - 1) * stride.w + k_w - in_w);
    g.pad_top = pad_h / 2;
    g.pad_left = pad_w / 2;
  }
  return g;
}

Tensor conv2d_forward(const Tensor& input, const Tensor& kernels, Stride stride,
                      Padding padding) {
  if (input.rank() != 3 || kernels.rank() != 4) {
    throw ShapeError("conv2d expects input [H,W,C] and kernels [kh,kw,C,F], got " +
                     input.shape_str() + " and " + kernels.shape_str());
  }
  const int in_h = input.dim(0), in_w = input.dim(1), in_c = input.dim(2);
  const int k_h = kernels.dim(0), k_w = kernels.dim(1), k_c = kernels.dim(2),
            filters = kernels.dim(3);
  if (in_c != k_c) {
    throw ShapeError("conv2d channel mismatch: input " + input.shape_str() + ", kernels " +
                     kernels.shape_str());
  }
  const ConvGeometry g = conv2d_geometry(in_h, in_w, k_h, k_w, stride, padding);
  Tensor out({g.out_h, g.out_w, filters});
  const float* pin = input.data();
  const float* pk = kernels.data();
  float* po = out.data();
  for (int oh = 0; oh < g.out_h; ++oh) {
    for (int ow = 0; ow < g.out_w; ++ow) {
      float* ocell = po + (static_cast<size_t>(oh) * g.out_w + ow) * filters;
      for (int kh = 0; kh < k_h; ++kh) {
        const int ih = oh * stride.h + kh - g.pad_top;
        if (ih < 0 || ih >= in_h) continue;
        for (int kw = 0; kw < k_w; ++kw) {
          const int iw = ow * stride.w + kw - g.pad_left;
          if (iw < 0 || iw >= in_w) continue;
          const float* icell = pin + (static_cast<size_t>(ih) * in_w + iw) * in_c;
          const float* kcell = pk + ((static_cast<size_t>(kh) * k_w + kw) * in_c) * filters;
          for (int c = 0; c < in_c; ++c) {
            const float x = icell[c];
            const float* kvec = kcell + static_cast<size_t>(c) * filters;
            for (int f = 0; f < filters; ++f) ocell[f] += x * kvec[f];
          }
        }
      }
    }
  }
  return out;
}

void conv2d_backward(const Tensor& input, const Tensor& kernels, Stride stride,
                     Padding padding, const Tensor& grad_out, Tensor* grad_input,
                     Tensor* grad_kernels) {
  const int in_h = input.dim(0), in_w = input.dim(1), in_c = input.dim(2);
  const int k_h = kernels.dim(0), k_w = kernels.dim(1), filters = kernels.dim(3);
  const ConvGeometry g = conv2d_geometry(in_h, in_w, k_h, k_w, stride, padding);
  if (grad_out.shape() != std::vector<int>{g.out_h, g.out_w, filters}) {
    throw ShapeError("conv2d_backward grad shape " + grad_out.shape_str());
  }
  if (grad_input) *grad_input = Tensor({in_h, in_w, in_c});
  if (grad_kernels) *grad_kernels = Tensor(kernels.shape());
  const float* pin = input.data();
  const float* pk = kernels.data();
  const float* pg = grad_out.data();
  float* gi = grad_input ? grad_input->data() : nullptr;
  float* gk = grad_kernels ? grad_kernels->data() : nullptr;
  for (int oh = 0; oh < g.out_h; ++oh) {
    for (int ow = 0; ow < g.out_w; ++ow) {
      const float* gcell = pg + (static_cast<size_t>(oh) * g.out_w + ow) * filters;
      for (int kh = 0; kh < k_h; ++kh) {
        const int ih = oh * stride.h + kh - g.pad_top;
        if (ih < 0 || ih >= in_h) continue;
        for (int kw = 0; kw < k_w; ++kw) {
          const int iw = ow * stride.w + kw - g.pad_left;
          if (iw < 0 || iw >= in_w) continue;
          const size_t i_off = (static_cast<size_t>(ih) * in_w + iw) * in_c;
          const size_t k_off = (static_cast<size_t>(kh) * k_w + kw) * in_c * filters;
          for (int c = 0; c < in_c; ++c) {
            const float x = pin[i_off + c];
            const float* kvec = pk + k_off + static_cast<size_t>(c) * filters;
            float acc = 0.0f;
            for (int f = 0; f < filters; ++f) {
              const float go = gcell[f];
              acc += kvec[f] * go;
              if (gk) gk[k_off + static_cast<size_t>(c) * filters + f] += x * go;
            }
            if (gi) gi[i_off + c] += acc;
          }
        }
      }
    }
  }
}

Tensor max_pool(const Tensor& input, std::pair<int, int> window, Stride stride,
                std::vector<int>* argmax) {
  if (input.rank() != 3) throw ShapeError("max_pool expects [H,W,F], got " + input.shape_str());
  const int w_h = window.first, w_w = window.second;
  if (w_h <= 0 || w_w <= 0) throw ParamError("max_pool window must be positive");
  if (stride.h < 1 || stride.w < 1) throw ParamError("max_pool stride must be positive");
  const int in_h = input.dim(0), in_w = input.dim(1), chans = input.dim(2);
  if (w_h > in_h || w_w > in_w) {
    throw ShapeError("max_pool window exceeds input extent " + input.shape_str());
  }
  const int out_h = (in_h - w_h) / stride.h + 1;
  const int out_w = (in_w - w_w) / stride.w + 1;
  Tensor out({out_h, out_w, chans});
  if (argmax) argmax->assign(out.size(), 0);
  const float* pin = input.data();
  float* po = out.data();
  for (int oh = 0; oh < out_h; ++oh) {
    for (int ow = 0; ow < out_w; ++ow) {
      for (int c = 0; c < chans; ++c) {
        float best = -std::numeric_limits<float>::infinity();
        int best_idx = 0;
        for (int kh = 0; kh < w_h; ++kh) {
          const int ih = oh * stride.h + kh;
          for (int kw = 0; kw < w_w; ++kw) {
            const int iw = ow * stride.w + kw;
            const int idx = (ih * in_w + iw) * chans + c;
            if (pin[idx] > best) {
              best = pin[idx];
              best_idx = idx;
            }
          }
        }
        const size_t o_idx = (static_cast<size_t>(oh) * out_w + ow) * chans + c;
        po[o_idx] = best;
        if (argmax) (*argmax)[o_idx] = best_idx;
      }
    }
  }
  return out;
}

Tensor max_pool_backward(const Tensor& grad_out, const std::vector<int>& input_shape,
                         const std::vector<int>& argmax) {
  Tensor grad_in(input_shape);
  for (size_t i = 0; i < argmax.size(); ++i) grad_in[argmax[i]] += grad_out[i];
  return grad_in;
}

float sigmoid(float x) { return 1.0f / (1.0f + std::exp(-x)); }

Tensor apply_activation(const Tensor& input, ActKind kind) {
  Tensor out(input.shape());
  const float* pi = input.data();
  float* po = out.data();
  const size_t n = input.size();
  switch (kind) {
    case ActKind::kRelu:
      for (size_t i = 0; i < n; ++i) po[i] = pi[i] > 0.0f ? pi[i] : 0.0f;
      break;
    case ActKind::kSigmoid:
      for (size_t i = 0; i < n; ++i) po[i] = sigmoid(pi[i]);
      break;
    case ActKind::kTanh:
      for (size_t i = 0; i < n; ++i) po[i] = std::tanh(pi[i]);
      break;
  }
  return out;
}

Tensor activation_backward(const Tensor& grad_out, const Tensor& output, ActKind kind) {
  Tensor grad_in(grad_out.shape());
  const float* pg = grad_out.data();
  const float* po = output.data();
  float* pi = grad_in.data();
  const size_t n = grad_out.size();
  switch (kind) {
    case ActKind::kRelu:
      for (size_t i = 0; i < n; ++i) pi[i] = po[i] > 0.0f ? pg[i] : 0.0f;
      break;
    case ActKind::kSigmoid:
      for (size_t i = 0; i < n; ++i) pi[i] = pg[i] * po[i] * (1.0f - po[i]);
      break;
    case ActKind::kTanh:
      for (size_t i = 0; i < n; ++i) pi[i] = pg[i] * (1.0f - po[i] * po[i]);
      break;
  }
  return grad_in;
}

std::vector<float> softmax(const std::vector<float>& logits) {
  float mx = -std::numeric_limits<float>::infinity();
  for (float v : logits) mx = std::max(mx, v);
  std::vector<float> out(logits.size());
  double sum = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - mx);
    sum += out[i];
  }
  for (auto& v : out) v = static_cast<float>(v / sum);
  return out;
}

}  // namespace edgepress
