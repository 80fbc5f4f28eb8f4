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

// Test-only double-precision reference implementations: plain scalar loops,
// independent of the library's execution paths. They serve as oracles for
// layer outputs and as the function under central differences in the
// gradient checks.

#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "edgepress/model.hpp"

namespace edgepress::testref {

inline double ref_sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline double ref_bce(double p, double y) {
  const double pc = std::clamp(p, 1e-7, 1.0 - 1e-7);
  return -(y * std::log(pc) + (1.0 - y) * std::log(1.0 - pc));
}

// Value plus its shape; all reference math flows through this.
struct RefBuf {
  std::vector<int> shape;
  std::vector<double> v;

  static RefBuf from(const Tensor& t) {
    RefBuf b;
    b.shape = t.shape();
    b.v.assign(t.vec().begin(), t.vec().end());
    return b;
  }
  int dim(size_t i) const { return shape[i]; }
};

inline double kernel_at(const Tensor& k, int y, int x, int c, int f) {
  const int kw = k.dim(1), kc = k.dim(2), kf = k.dim(3);
  return k[(((static_cast<size_t>(y) * kw + x) * kc + c) * kf + f)];
}

inline RefBuf ref_conv2d(const RefBuf& in, const Tensor& kernel, const Tensor& bias,
                         Stride stride, Padding padding) {
  const int ih = in.dim(0), iw = in.dim(1), ic = in.dim(2);
  const int kh = kernel.dim(0), kw = kernel.dim(1), f = kernel.dim(3);
  int oh, ow, pad_top = 0, pad_left = 0;
  if (padding == Padding::kValid) {
    oh = (ih - kh) / stride.h + 1;
    ow = (iw - kw) / stride.w + 1;
  } else {
    oh = (ih + stride.h - 1) / stride.h;
    ow = (iw + stride.w - 1) / stride.w;
    pad_top = std::max(0, (oh - 1) * stride.h + kh - ih) / 2;
    pad_left = std::max(0, (ow - 1) * stride.w + kw - iw) / 2;
  }
  RefBuf out;
  out.shape = {oh, ow, f};
  out.v.assign(static_cast<size_t>(oh) * ow * f, 0.0);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      for (int ff = 0; ff < f; ++ff) {
        double acc = bias.empty() ? 0.0 : bias[ff];
        for (int u = 0; u < kh; ++u) {
          const int sy = y * stride.h + u - pad_top;
          if (sy < 0 || sy >= ih) continue;
          for (int vXX = 0; vXX < kw; ++vXX) {
            const int sx = x * stride.w + vXX - pad_left;
            if (sx < 0 || sx >= iw) continue;
            for (int cc = 0; cc < ic; ++cc) {
              acc += in.v[(static_cast<size_t>(sy) * iw + sx) * ic + cc] *
                     kernel_at(kernel, u, vXX, cc, ff);
            }
          }
        }
        out.v[(static_cast<size_t>(y) * ow + x) * f + ff] = acc;
      }
    }
  }
  return out;
}

inline RefBuf ref_maxpool(const RefBuf& in, int wh, int ww, Stride stride) {
  const int ih = in.dim(0), iw = in.dim(1), ch = in.dim(2);
  const int oh = (ih - wh) / stride.h + 1;
  const int ow = (iw - ww) / stride.w + 1;
  RefBuf out;
  out.shape = {oh, ow, ch};
  out.v.assign(static_cast<size_t>(oh) * ow * ch, 0.0);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      for (int c = 0; c < ch; ++c) {
        double best = -1e300;
        for (int u = 0; u < wh; ++u) {
          for (int v = 0; v < ww; ++v) {
            best = std::max(best,
                            in.v[(static_cast<size_t>(y * stride.h + u) * iw +
                                  (x * stride.w + v)) * ch + c]);
          }
        }
        out.v[(static_cast<size_t>(y) * ow + x) * ch + c] = best;
      }
    }
  }
  return out;
}

inline RefBuf ref_dense(const RefBuf& in, const Tensor& w, const Tensor& b) {
  const int n = w.dim(0), units = w.dim(1);
  RefBuf out;
  out.shape = {units};
  out.v.assign(units, 0.0);
  for (int j = 0; j < units; ++j) {
    double acc = b[j];
    for (int i = 0; i < n; ++i) acc += in.v[i] * w.at(i, j);
    out.v[j] = acc;
  }
  return out;
}

// Scalar-loop LSTM over [T,d]; gate order i,f,g,o along the 4h axis.
inline RefBuf ref_lstm(const RefBuf& seq, const Tensor& wx, const Tensor& wh,
                       const Tensor& bias) {
  const int steps = seq.dim(0), d = seq.dim(1);
  const int h4 = wx.dim(1), h = h4 / 4;
  RefBuf out;
  out.shape = {steps, h};
  out.v.assign(static_cast<size_t>(steps) * h, 0.0);
  std::vector<double> c_prev(h, 0.0), h_prev(h, 0.0), pre(h4);
  for (int t = 0; t < steps; ++t) {
    for (int j = 0; j < h4; ++j) {
      double acc = bias[j];
      for (int i = 0; i < d; ++i) acc += seq.v[static_cast<size_t>(t) * d + i] * wx.at(i, j);
      for (int i = 0; i < h; ++i) acc += h_prev[i] * wh.at(i, j);
      pre[j] = acc;
    }
    for (int j = 0; j < h; ++j) {
      const double ig = ref_sigmoid(pre[j]);
      const double fg = ref_sigmoid(pre[h + j]);
      const double gg = std::tanh(pre[2 * h + j]);
      const double og = ref_sigmoid(pre[3 * h + j]);
      const double c = fg * c_prev[j] + ig * gg;
      c_prev[j] = c;
      h_prev[j] = og * std::tanh(c);
      out.v[static_cast<size_t>(t) * h + j] = h_prev[j];
    }
  }
  return out;
}

// Direct-summation attention: e_t = v . tanh(W h_t), alpha = softmax(e).
inline RefBuf ref_attention(const RefBuf& hidden, const Tensor& w, const Tensor& v) {
  const int steps = hidden.dim(0), h = hidden.dim(1);
  const int a = w.dim(0);
  std::vector<double> e(steps, 0.0);
  for (int t = 0; t < steps; ++t) {
    for (int p = 0; p < a; ++p) {
      double u = 0.0;
      for (int q = 0; q < h; ++q) u += w.at(p, q) * hidden.v[static_cast<size_t>(t) * h + q];
      e[t] += v[p] * std::tanh(u);
    }
  }
  const double mx = *std::max_element(e.begin(), e.end());
  double z = 0.0;
  std::vector<double> alpha(steps);
  for (int t = 0; t < steps; ++t) {
    alpha[t] = std::exp(e[t] - mx);
    z += alpha[t];
  }
  RefBuf out;
  out.shape = {h};
  out.v.assign(h, 0.0);
  for (int t = 0; t < steps; ++t) {
    for (int q = 0; q < h; ++q) {
      out.v[q] += (alpha[t] / z) * hidden.v[static_cast<size_t>(t) * h + q];
    }
  }
  return out;
}

// Full-model reference forward in double; dropout is identity.
inline double ref_forward(const Model& model, const Tensor& input) {
  const Tensor shaped = input.shape() == model.config.input_shape
                            ? input
                            : input.reshaped(model.config.input_shape);
  RefBuf cur = RefBuf::from(shaped);
  for (size_t li = 0; li < model.config.layers.size(); ++li) {
    const LayerSpec& s = model.config.layers[li];
    const auto& params = model.layer_params[li];
    switch (s.kind) {
      case LayerKind::kConv2d:
        cur = ref_conv2d(cur, params[0].value, params[1].value, s.stride, s.padding);
        break;
      case LayerKind::kMaxPool:
        cur = ref_maxpool(cur, s.pool_h, s.pool_w, s.stride);
        break;
      case LayerKind::kDense:
        cur = ref_dense(cur, params[0].value, params[1].value);
        break;
      case LayerKind::kFlatten:
        cur.shape = {static_cast<int>(cur.v.size())};
        break;
      case LayerKind::kLstm: {
        if (cur.shape.size() == 3) {
          const int hh = cur.dim(0), ww = cur.dim(1), cc = cur.dim(2);
          RefBuf repacked;
          repacked.shape = {ww, hh * cc};
          repacked.v.assign(cur.v.size(), 0.0);
          for (int y = 0; y < hh; ++y) {
            for (int x = 0; x < ww; ++x) {
              for (int c = 0; c < cc; ++c) {
                repacked.v[static_cast<size_t>(x) * (hh * cc) + y * cc + c] =
                    cur.v[(static_cast<size_t>(y) * ww + x) * cc + c];
              }
            }
          }
          cur = std::move(repacked);
        }
        cur = ref_lstm(cur, params[0].value, params[1].value, params[2].value);
        break;
      }
      case LayerKind::kAttention:
        cur = ref_attention(cur, params[0].value, params[1].value);
        break;
      case LayerKind::kDropout:
        break;
      case LayerKind::kActivation:
        for (auto& x : cur.v) {
          switch (s.activation) {
            case ActKind::kRelu: x = x > 0.0 ? x : 0.0; break;
            case ActKind::kSigmoid: x = ref_sigmoid(x); break;
            case ActKind::kTanh: x = std::tanh(x); break;
          }
        }
        break;
    }
  }
  return cur.v[0];
}

// BCE + elastic-net penalties, all in double; the function differentiated by
// the finite-difference checks.
inline double ref_loss(const Model& model, const Tensor& input, double target) {
  double loss = ref_bce(ref_forward(model, input), target);
  for (size_t li = 0; li < model.config.layers.size(); ++li) {
    const auto& coeffs = model.config.layers[li].regularization;
    if (!coeffs.any()) continue;
    for (const auto& p : model.layer_params[li]) {
      if (p.is_weight) {
        for (float wv : p.value.vec()) {
          loss += coeffs.l1_weight * std::fabs(static_cast<double>(wv)) +
                  coeffs.l2_weight * static_cast<double>(wv) * wv;
        }
      } else {
        for (float bv : p.value.vec()) {
          loss += coeffs.l2_bias * static_cast<double>(bv) * bv;
        }
      }
    }
  }
  return loss;
}

// Central-difference gradient over ref_loss w.r.t. one parameter element.
// The perturbed f32 values are used exactly in the quotient denominator.
inline double fd_gradient(Model& model, const std::string& param, size_t index,
                          const Tensor& input, double target, float step = 1e-3f) {
  Parameter* p = model.find_parameter(param);
  const float orig = p->value[index];
  const float up = orig + step;
  const float down = orig - step;
  p->value[index] = up;
  const double f_up = ref_loss(model, input, target);
  p->value[index] = down;
  const double f_down = ref_loss(model, input, target);
  p->value[index] = orig;
  return (f_up - f_down) / (static_cast<double>(up) - static_cast<double>(down));
}

}  // namespace edgepress::testref
