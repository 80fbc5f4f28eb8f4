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

#include "edgepress/quantization.hpp"

#include <algorithm>
#include <cmath>

#include "edgepress/errors.hpp"

namespace edgepress {

double round_half_even(double v) { return std::nearbyint(v); }

QuantParams minmax_params(const Tensor& values, int bits) {
  if (bits != 8 && bits != 16) throw ParamError("bits must be 8 or 16");
  if (!values.all_finite()) throw NumericError("minmax_params: non-finite values");
  const double qmax = bits == 8 ? 255.0 : 65535.0;
  double lo = 0.0, hi = 0.0;  // range always includes 0
  for (float v : values.vec()) {
    lo = std::min(lo, static_cast<double>(v));
    hi = std::max(hi, static_cast<double>(v));
  }
  QuantParams p;
  if (lo == hi) {
    // All-equal input. lo == hi == 0 because the range is 0-extended, so the
    // tensor itself is all-zero (or empty).
    p.scale = 1.0f;
    p.zero_point = 0;
    return p;
  }
  p.scale = static_cast<float>((hi - lo) / qmax);
  // The exact ratio, not the float-rounded scale, decides the half-way
  // rounding (e.g. a [-1,1] span must land exactly on 127.5).
  const double zp = round_half_even(qmax * (-lo) / (hi - lo));
  p.zero_point = static_cast<int>(std::clamp(zp, 0.0, qmax));
  return p;
}

QuantizedTensor quantize(const Tensor& values, const QuantParams& params, int bits) {
  if (bits != 8 && bits != 16) throw ParamError("bits must be 8 or 16");
  if (params.scale <= 0.0f) throw ParamError("quantize: scale must be positive");
  const int qmax = bits == 8 ? 255 : 65535;
  QuantizedTensor out;
  out.bits = bits;
  out.scale = params.scale;
  out.zero_point = params.zero_point;
  out.shape = values.shape();
  const size_t n = values.size();
  if (bits == 8) out.q8.resize(n);
  else out.q16.resize(n);
  for (size_t i = 0; i < n; ++i) {
    const double q =
        round_half_even(static_cast<double>(values[i]) / params.scale) + params.zero_point;
    const int qi = static_cast<int>(std::clamp(q, 0.0, static_cast<double>(qmax)));
    if (bits == 8) out.q8[i] = static_cast<uint8_t>(qi);
    else out.q16[i] = static_cast<uint16_t>(qi);
  }
  return out;
}

Tensor dequantize(const QuantizedTensor& q) {
  Tensor out(q.shape);
  for (size_t i = 0; i < q.size(); ++i) {
    out[i] = q.scale * static_cast<float>(q.at(i) - q.zero_point);
  }
  return out;
}

namespace {

bool layer_has_quant_weights(LayerKind kind) {
  switch (kind) {
    case LayerKind::kConv2d:
    case LayerKind::kDense:
    case LayerKind::kLstm:
    case LayerKind::kAttention:
      return true;
    default:
      return false;
  }
}

// Dynamic activation quantization: returns centered integer activations and
// their scale. Bits match the model.
template <typename CenteredT>
float center_activations(const Tensor& x, int bits, std::vector<CenteredT>& out) {
  QuantParams p = minmax_params(x, bits);
  QuantizedTensor q = quantize(x, p, bits);
  out.resize(q.size());
  for (size_t i = 0; i < q.size(); ++i) {
    out[i] = static_cast<CenteredT>(q.at(i) - q.zero_point);
  }
  return p.scale;
}

}  // namespace

QuantizedModel quantize_model(const Model& model, int bits) {
  if (bits != 8 && bits != 16) throw ParamError("bits must be 8 or 16");
  QuantizedModel qm;
  qm.config = model.config;
  qm.bits = bits;
  for (size_t li = 0; li < model.config.layers.size(); ++li) {
    QuantizedLayer ql;
    for (const auto& p : model.layer_params[li]) {
      if (!p.value.all_finite()) {
        throw NumericError("quantize_model: non-finite weight in " + p.name);
      }
      const bool quantize_this = p.is_weight && layer_has_quant_weights(model.config.layers[li].kind);
      if (!quantize_this) {
        ql.float_params.push_back(p);
        continue;
      }
      QuantParams params = minmax_params(p.value, bits);
      QuantizedTensor q = quantize(p.value, params, bits);
      if (bits == 8) {
        std::vector<int16_t> centered(q.size());
        for (size_t i = 0; i < q.size(); ++i) {
          centered[i] = static_cast<int16_t>(q.at(i) - q.zero_point);
        }
        ql.centered8.push_back(std::move(centered));
      } else {
        std::vector<int32_t> centered(q.size());
        for (size_t i = 0; i < q.size(); ++i) {
          centered[i] = static_cast<int32_t>(q.at(i) - q.zero_point);
        }
        ql.centered16.push_back(std::move(centered));
      }
      ql.weights.emplace_back(p.name, std::move(q));
    }
    qm.layers.push_back(std::move(ql));
  }
  return qm;
}

Model QuantizedModel::dequantized() const {
  Model m = Model::build(config);
  for (size_t li = 0; li < layers.size(); ++li) {
    for (const auto& [name, q] : layers[li].weights) {
      Parameter* p = m.find_parameter(name);
      if (!p) throw DataError("dequantized: unknown parameter " + name);
      p->value = dequantize(q);
    }
    for (const auto& fp : layers[li].float_params) {
      Parameter* p = m.find_parameter(fp.name);
      if (!p) throw DataError("dequantized: unknown parameter " + fp.name);
      p->value = fp.value;
    }
  }
  return m;
}

namespace {

struct QuantExec {
  const QuantizedModel& qm;
  // Lazily dequantized weights for recurrent layers (built once per call;
  // cheap relative to the recurrence itself on desk-scale models).
  Tensor dequant(size_t li, size_t wi) const {
    return dequantize(qm.layers[li].weights[wi].second);
  }
};

// Integer dense: y[j] = sx*sw * sum_i cx[i]*cw[i][j] + b[j].
template <typename CT, typename AccT>
Tensor int_dense(const std::vector<CT>& cx, float sx, const std::vector<CT>& cw, float sw,
                 const Tensor& bias, int in, int units) {
  Tensor out({units});
  std::vector<AccT> acc(units, 0);
  for (int i = 0; i < in; ++i) {
    const AccT xi = cx[i];
    if (xi == 0) continue;
    const CT* row = cw.data() + static_cast<size_t>(i) * units;
    for (int j = 0; j < units; ++j) acc[j] += xi * static_cast<AccT>(row[j]);
  }
  const float rescale = sx * sw;
  for (int j = 0; j < units; ++j) {
    out[j] = rescale * static_cast<float>(acc[j]) + bias[j];
  }
  return out;
}

// Integer conv over centered activations; padded cells are zero-centered so
// they contribute nothing, matching real zero padding.
template <typename CT, typename AccT>
Tensor int_conv(const std::vector<CT>& cx, float sx, const std::vector<CT>& ck, float sw,
                const Tensor& bias, int in_h, int in_w, int in_c, int k_h, int k_w,
                int filters, Stride stride, Padding padding) {
  const ConvGeometry g = conv2d_geometry(in_h, in_w, k_h, k_w, stride, padding);
  Tensor out({g.out_h, g.out_w, filters});
  std::vector<AccT> acc(filters);
  const float rescale = sx * sw;
  for (int oh = 0; oh < g.out_h; ++oh) {
    for (int ow = 0; ow < g.out_w; ++ow) {
      std::fill(acc.begin(), acc.end(), 0);
      for (int kh = 0; kh < k_h; ++kh) {
        const int ih = oh * stride.h + kh - g.pad_top;
        if (ih < 0 || ih >= in_h) continue;
        for (int kw = 0; kw < k_w; ++kw) {
          const int iw = ow * stride.w + kw - g.pad_left;
          if (iw < 0 || iw >= in_w) continue;
          const CT* icell = cx.data() + (static_cast<size_t>(ih) * in_w + iw) * in_c;
          const CT* kcell = ck.data() + (static_cast<size_t>(kh) * k_w + kw) * in_c * filters;
          for (int c = 0; c < in_c; ++c) {
            const AccT xi = icell[c];
            if (xi == 0) continue;
            const CT* kvec = kcell + static_cast<size_t>(c) * filters;
            for (int f = 0; f < filters; ++f) acc[f] += xi * static_cast<AccT>(kvec[f]);
          }
        }
      }
      float* ocell = out.data() + (static_cast<size_t>(oh) * g.out_w + ow) * filters;
      for (int f = 0; f < filters; ++f) {
        ocell[f] = rescale * static_cast<float>(acc[f]) + bias[f];
      }
    }
  }
  return out;
}

}  // namespace

float QuantizedModel::forward(const Tensor& input) const {
  Tensor cur = input;
  if (cur.shape() != config.input_shape) {
    if (cur.size() != shape_numel(config.input_shape)) {
      throw ShapeError("input shape " + cur.shape_str() + " != model input " +
                       shape_to_string(config.input_shape));
    }
    cur = cur.reshaped(config.input_shape);
  }
  QuantExec exec{*this};
  std::vector<int16_t> cx8;
  std::vector<int32_t> cx16;

  for (size_t li = 0; li < config.layers.size(); ++li) {
    const LayerSpec& s = config.layers[li];
    const QuantizedLayer& ql = layers[li];
    switch (s.kind) {
      case LayerKind::kConv2d: {
        const Tensor& bias = ql.float_params[0].value;
        const int in_h = cur.dim(0), in_w = cur.dim(1), in_c = cur.dim(2);
        const float sw = ql.weights[0].second.scale;
        if (bits == 8) {
          const float sx = center_activations(cur, 8, cx8);
          cur = int_conv<int16_t, int32_t>(cx8, sx, ql.centered8[0], sw, bias, in_h, in_w,
                                           in_c, s.kernel_h, s.kernel_w, s.filters, s.stride,
                                           s.padding);
        } else {
          const float sx = center_activations(cur, 16, cx16);
          cur = int_conv<int32_t, int64_t>(cx16, sx, ql.centered16[0], sw, bias, in_h, in_w,
                                           in_c, s.kernel_h, s.kernel_w, s.filters, s.stride,
                                           s.padding);
        }
        break;
      }
      case LayerKind::kDense: {
        const Tensor& bias = ql.float_params[0].value;
        const int in = cur.dim(0);
        const int units = s.units;
        const float sw = ql.weights[0].second.scale;
        if (bits == 8) {
          const float sx = center_activations(cur, 8, cx8);
          cur = int_dense<int16_t, int32_t>(cx8, sx, ql.centered8[0], sw, bias, in, units);
        } else {
          const float sx = center_activations(cur, 16, cx16);
          cur = int_dense<int32_t, int64_t>(cx16, sx, ql.centered16[0], sw, bias, in, units);
        }
        break;
      }
      case LayerKind::kMaxPool:
        cur = max_pool(cur, {s.pool_h, s.pool_w}, s.stride);
        break;
      case LayerKind::kFlatten:
        cur = cur.reshaped({static_cast<int>(cur.size())});
        break;
      case LayerKind::kLstm: {
        if (cur.rank() == 3) {
          const int h = cur.dim(0), w = cur.dim(1), c = cur.dim(2);
          Tensor repacked({w, h * c});
          for (int ih = 0; ih < h; ++ih) {
            for (int iw = 0; iw < w; ++iw) {
              for (int ic = 0; ic < c; ++ic) repacked.at(iw, ih * c + ic) = cur.at(ih, iw, ic);
            }
          }
          cur = std::move(repacked);
        }
        LstmParams lp{exec.dequant(li, 0), exec.dequant(li, 1), ql.float_params[0].value};
        cur = lstm_forward(cur, lp);
        break;
      }
      case LayerKind::kAttention:
        cur = attention_pool(cur, exec.dequant(li, 0), exec.dequant(li, 1));
        break;
      case LayerKind::kDropout:
        break;  // identity at inference
      case LayerKind::kActivation:
        cur = apply_activation(cur, s.activation);
        break;
    }
  }
  const float p = cur[0];
  if (!std::isfinite(p)) throw NumericError("non-finite quantized model output");
  return p;
}

float quantized_forward(const QuantizedModel& qmodel, const Tensor& input) {
  return qmodel.forward(input);
}

}  // namespace edgepress
