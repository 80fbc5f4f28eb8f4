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

#include "edgepress/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "edgepress/errors.hpp"
#include "edgepress/metrics.hpp"

namespace edgepress {

using nlohmann::json;

std::string layer_kind_to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::kConv2d: return "conv2d";
    case LayerKind::kMaxPool: return "maxpool";
    case LayerKind::kDense: return "dense";
    case LayerKind::kFlatten: return "flatten";
    case LayerKind::kLstm: return "lstm";
    case LayerKind::kAttention: return "attention";
    case LayerKind::kDropout: return "dropout";
    case LayerKind::kActivation: return "activation";
  }
  return "?";
}

LayerKind layer_kind_from_string(const std::string& name) {
  if (name == "conv2d") return LayerKind::kConv2d;
  if (name == "maxpool") return LayerKind::kMaxPool;
  if (name == "dense") return LayerKind::kDense;
  if (name == "flatten") return LayerKind::kFlatten;
  if (name == "lstm") return LayerKind::kLstm;
  if (name == "attention") return LayerKind::kAttention;
  if (name == "dropout") return LayerKind::kDropout;
  if (name == "activation") return LayerKind::kActivation;
  throw ConfigError("unknown layer kind '" + name + "'");
}

namespace {

ActKind act_from_string(const std::string& name) {
  if (name == "relu") return ActKind::kRelu;
  if (name == "sigmoid") return ActKind::kSigmoid;
  if (name == "tanh") return ActKind::kTanh;
  throw ConfigError("unknown activation '" + name + "'");
}

std::string act_to_string(ActKind kind) {
  switch (kind) {
    case ActKind::kRelu: return "relu";
    case ActKind::kSigmoid: return "sigmoid";
    case ActKind::kTanh: return "tanh";
  }
  return "?";
}

// Time-major repack: [H,W,C] -> [W, H*C].
Tensor repack_time_major(const Tensor& in) {
  const int h = in.dim(0), w = in.dim(1), c = in.dim(2);
  Tensor out({w, h * c});
  for (int ih = 0; ih < h; ++ih) {
    for (int iw = 0; iw < w; ++iw) {
      for (int ic = 0; ic < c; ++ic) out.at(iw, ih * c + ic) = in.at(ih, iw, ic);
    }
  }
  return out;
}

Tensor unpack_time_major(const Tensor& grad, const std::vector<int>& hwc) {
  const int h = hwc[0], w = hwc[1], c = hwc[2];
  Tensor out(hwc);
  for (int ih = 0; ih < h; ++ih) {
    for (int iw = 0; iw < w; ++iw) {
      for (int ic = 0; ic < c; ++ic) out.at(ih, iw, ic) = grad.at(iw, ih * c + ic);
    }
  }
  return out;
}

Tensor glorot_uniform(std::vector<int> shape, int fan_in, int fan_out, Rng& rng) {
  Tensor t(std::move(shape));
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  for (size_t i = 0; i < t.size(); ++i) t[i] = static_cast<float>(rng.uniform(-limit, limit));
  return t;
}

Parameter make_param(std::string name, Tensor value, bool is_weight) {
  Parameter p;
  p.name = std::move(name);
  p.value = std::move(value);
  p.is_weight = is_weight;
  return p;
}

}  // namespace

std::vector<std::vector<int>> ModelConfig::validate() const {
  if (input_shape.empty()) throw ConfigError("input_shape missing");
  for (int d : input_shape) {
    if (d <= 0) throw ConfigError("input_shape has non-positive dimension");
  }
  if (layers.empty()) throw ConfigError("model has no layers");

  std::set<std::string> names;
  std::vector<std::vector<int>> shapes;
  std::vector<int> cur = input_shape;
  for (const auto& spec : layers) {
    if (spec.name.empty()) throw ConfigError("layer with empty name");
    if (!names.insert(spec.name).second) {
      throw ConfigError("duplicate layer name '" + spec.name + "'");
    }
    const std::string where = "layer '" + spec.name + "'";
    switch (spec.kind) {
      case LayerKind::kConv2d: {
        if (cur.size() != 3) throw ConfigError(where + ": conv2d needs [H,W,C] input");
        if (spec.filters < 1 || spec.kernel_h < 1 || spec.kernel_w < 1) {
          throw ConfigError(where + ": conv2d needs positive filters and kernel");
        }
        ConvGeometry g;
        try {
          g = conv2d_geometry(cur[0], cur[1], spec.kernel_h, spec.kernel_w, spec.stride,
                              spec.padding);
        } catch (const std::exception& e) {
          throw ConfigError(where + ": " + e.what());
        }
        cur = {g.out_h, g.out_w, spec.filters};
        break;
      }
      case LayerKind::kMaxPool: {
        if (cur.size() != 3) throw ConfigError(where + ": maxpool needs [H,W,C] input");
        if (spec.pool_h < 1 || spec.pool_w < 1) {
          throw ConfigError(where + ": maxpool needs a positive window");
        }
        if (spec.pool_h > cur[0] || spec.pool_w > cur[1]) {
          throw ConfigError(where + ": window exceeds input extent");
        }
        cur = {(cur[0] - spec.pool_h) / spec.stride.h + 1,
               (cur[1] - spec.pool_w) / spec.stride.w + 1, cur[2]};
        break;
      }
      case LayerKind::kDense: {
        if (cur.size() != 1) throw ConfigError(where + ": dense needs flat input (add flatten)");
        if (spec.units < 1) throw ConfigError(where + ": dense needs positive units");
        cur = {spec.units};
        break;
      }
      case LayerKind::kFlatten: {
        cur = {static_cast<int>(shape_numel(cur))};
        break;
      }
      case LayerKind::kLstm: {
        if (spec.units < 1) throw ConfigError(where + ": lstm needs positive units");
        if (cur.size() == 3) {
          cur = {cur[1], spec.units};  // time-major repack: T = W
        } else if (cur.size() == 2) {
          cur = {cur[0], spec.units};
        } else {
          throw ConfigError(where + ": lstm needs [T,d] or [H,W,C] input");
        }
        break;
      }
      case LayerKind::kAttention: {
        if (cur.size() != 2) throw ConfigError(where + ": attention needs [T,h] input");
        cur = {cur[1]};
        break;
      }
      case LayerKind::kDropout: {
        if (spec.rate < 0.0f || spec.rate >= 1.0f) {
          throw ConfigError(where + ": dropout rate must be in [0,1)");
        }
        break;
      }
      case LayerKind::kActivation:
        break;
    }
    shapes.push_back(cur);
  }
  const auto& last = layers.back();
  if (cur != std::vector<int>{1} || last.kind != LayerKind::kActivation ||
      last.activation != ActKind::kSigmoid) {
    throw ConfigError("final layer must be a sigmoid activation producing a scalar");
  }
  return shapes;
}

ModelConfig ModelConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model config is not valid JSON: ") + e.what());
  }
  try {
    ModelConfig cfg;
    cfg.input_shape = j.at("input_shape").get<std::vector<int>>();
    cfg.seed = j.value("seed", 0ULL);
    for (const auto& lj : j.at("layers")) {
      LayerSpec s;
      s.kind = layer_kind_from_string(lj.at("kind").get<std::string>());
      s.name = lj.at("name").get<std::string>();
      s.prunable = lj.value("prunable", s.kind != LayerKind::kAttention);
      switch (s.kind) {
        case LayerKind::kConv2d: {
          s.filters = lj.at("filters").get<int>();
          auto k = lj.at("kernel").get<std::vector<int>>();
          if (k.size() != 2) throw ConfigError("conv kernel must be [kh,kw]");
          s.kernel_h = k[0];
          s.kernel_w = k[1];
          auto st = lj.value("stride", std::vector<int>{1, 1});
          if (st.size() != 2) throw ConfigError("stride must be [sh,sw]");
          s.stride = {st[0], st[1]};
          const std::string pad = lj.value("padding", "valid");
          if (pad != "valid" && pad != "same") throw ConfigError("padding must be valid|same");
          s.padding = pad == "same" ? Padding::kSame : Padding::kValid;
          break;
        }
        case LayerKind::kMaxPool: {
          auto w = lj.at("window").get<std::vector<int>>();
          if (w.size() != 2) throw ConfigError("pool window must be [h,w]");
          s.pool_h = w[0];
          s.pool_w = w[1];
          auto st = lj.value("stride", w);
          s.stride = {st[0], st[1]};
          break;
        }
        case LayerKind::kDense:
        case LayerKind::kLstm:
          s.units = lj.at("units").get<int>();
          break;
        case LayerKind::kAttention:
          s.units = lj.value("units", 0);
          break;
        case LayerKind::kDropout:
          s.rate = lj.at("rate").get<float>();
          break;
        case LayerKind::kActivation:
          s.activation = act_from_string(lj.at("activation").get<std::string>());
          break;
        case LayerKind::kFlatten:
          break;
      }
      if (lj.contains("regularization")) {
        const auto& rj = lj.at("regularization");
        s.regularization.l1_weight = rj.value("l1_weight", 0.0f);
        s.regularization.l2_weight = rj.value("l2_weight", 0.0f);
        s.regularization.l2_bias = rj.value("l2_bias", 0.0f);
      }
      cfg.layers.push_back(std::move(s));
    }
    if (j.contains("training")) {
      const auto& tj = j.at("training");
      cfg.training.optimizer =
          optimizer_kind_from_string(tj.value("optimizer", std::string("adam")));
      cfg.training.learning_rate = tj.value("learning_rate", 1e-3);
      cfg.training.epochs = tj.value("epochs", 10);
      cfg.training.batch_size = tj.value("batch_size", 32);
    }
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model config field error: ") + e.what());
  }
}

ModelConfig ModelConfig::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

std::string ModelConfig::to_json() const {
  json j;
  j["input_shape"] = input_shape;
  j["seed"] = seed;
  json layers_j = json::array();
  for (const auto& s : layers) {
    json lj;
    lj["kind"] = layer_kind_to_string(s.kind);
    lj["name"] = s.name;
    switch (s.kind) {
      case LayerKind::kConv2d:
        lj["filters"] = s.filters;
        lj["kernel"] = {s.kernel_h, s.kernel_w};
        lj["stride"] = {s.stride.h, s.stride.w};
        lj["padding"] = s.padding == Padding::kSame ? "same" : "valid";
        break;
      case LayerKind::kMaxPool:
        lj["window"] = {s.pool_h, s.pool_w};
        lj["stride"] = {s.stride.h, s.stride.w};
        break;
      case LayerKind::kDense:
      case LayerKind::kLstm:
        lj["units"] = s.units;
        break;
      case LayerKind::kAttention:
        if (s.units > 0) lj["units"] = s.units;
        break;
      case LayerKind::kDropout:
        lj["rate"] = s.rate;
        break;
      case LayerKind::kActivation:
        lj["activation"] = act_to_string(s.activation);
        break;
      case LayerKind::kFlatten:
        break;
    }
    if (s.regularization.any()) {
      lj["regularization"] = {{"l1_weight", s.regularization.l1_weight},
                              {"l2_weight", s.regularization.l2_weight},
                              {"l2_bias", s.regularization.l2_bias}};
    }
    lj["prunable"] = s.prunable;
    layers_j.push_back(lj);
  }
  j["layers"] = layers_j;
  j["training"] = {{"optimizer", optimizer_kind_to_string(training.optimizer)},
                   {"learning_rate", training.learning_rate},
                   {"epochs", training.epochs},
                   {"batch_size", training.batch_size}};
  return j.dump(2);
}

Model Model::build(const ModelConfig& config) {
  Model model;
  model.config = config;
  model.output_shapes = config.validate();
  Rng rng(config.seed);

  std::vector<int> cur = config.input_shape;
  for (size_t li = 0; li < config.layers.size(); ++li) {
    const LayerSpec& s = config.layers[li];
    std::vector<Parameter> params;
    switch (s.kind) {
      case LayerKind::kConv2d: {
        const int c = cur[2];
        const int fan_in = s.kernel_h * s.kernel_w * c;
        const int fan_out = s.kernel_h * s.kernel_w * s.filters;
        Parameter kernel = make_param(
            s.name + "/kernel",
            glorot_uniform({s.kernel_h, s.kernel_w, c, s.filters}, fan_in, fan_out, rng), true);
        if (s.prunable) kernel.mask = Tensor::full(kernel.value.shape(), 1.0f);
        params.push_back(std::move(kernel));
        params.push_back(make_param(s.name + "/bias", Tensor({s.filters}), false));
        break;
      }
      case LayerKind::kDense: {
        const int in = cur[0];
        Parameter kernel =
            make_param(s.name + "/kernel", glorot_uniform({in, s.units}, in, s.units, rng), true);
        if (s.prunable) kernel.mask = Tensor::full(kernel.value.shape(), 1.0f);
        params.push_back(std::move(kernel));
        params.push_back(make_param(s.name + "/bias", Tensor({s.units}), false));
        break;
      }
      case LayerKind::kLstm: {
        const int d = cur.size() == 3 ? cur[0] * cur[2] : cur[1];
        const int h = s.units;
        Parameter wx = make_param(s.name + "/wx", glorot_uniform({d, 4 * h}, d, 4 * h, rng), true);
        Parameter wh = make_param(s.name + "/wh", glorot_uniform({h, 4 * h}, h, 4 * h, rng), true);
        if (s.prunable) {
          wx.mask = Tensor::full(wx.value.shape(), 1.0f);
          wh.mask = Tensor::full(wh.value.shape(), 1.0f);
        }
        params.push_back(std::move(wx));
        params.push_back(std::move(wh));
        params.push_back(make_param(s.name + "/bias", Tensor({4 * h}), false));
        break;
      }
      case LayerKind::kAttention: {
        const int h = cur[1];
        const int a = s.units > 0 ? s.units : h;
        Parameter w = make_param(s.name + "/score_w", glorot_uniform({a, h}, h, a, rng), true);
        Parameter v = make_param(s.name + "/score_v", glorot_uniform({a}, a, 1, rng), true);
        if (s.prunable) {
          w.mask = Tensor::full(w.value.shape(), 1.0f);
          v.mask = Tensor::full(v.value.shape(), 1.0f);
        }
        params.push_back(std::move(w));
        params.push_back(std::move(v));
        break;
      }
      default:
        break;
    }
    model.layer_params.push_back(std::move(params));
    cur = model.output_shapes[li];
  }
  return model;
}

size_t Model::param_count() const {
  size_t n = 0;
  for (const auto& lp : layer_params) {
    for (const auto& p : lp) n += p.value.size();
  }
  return n;
}

std::map<std::string, Tensor*> Model::parameter_ptrs() {
  std::map<std::string, Tensor*> out;
  for (auto& lp : layer_params) {
    for (auto& p : lp) out[p.name] = &p.value;
  }
  return out;
}

Parameter* Model::find_parameter(const std::string& name) {
  for (auto& lp : layer_params) {
    for (auto& p : lp) {
      if (p.name == name) return &p;
    }
  }
  return nullptr;
}

const Parameter* Model::find_parameter(const std::string& name) const {
  return const_cast<Model*>(this)->find_parameter(name);
}

void Model::apply_masks_in_place() {
  for (auto& lp : layer_params) {
    for (auto& p : lp) {
      if (p.mask.empty()) continue;
      if (!p.mask.same_shape(p.value)) {
        throw ShapeError("mask shape " + p.mask.shape_str() + " != value shape " +
                         p.value.shape_str() + " for " + p.name);
      }
      for (size_t i = 0; i < p.value.size(); ++i) {
        if (p.mask[i] == 0.0f) p.value[i] = 0.0f;
      }
    }
  }
}

float Model::regularization_penalty() const {
  double total = 0.0;
  for (size_t li = 0; li < config.layers.size(); ++li) {
    const auto& coeffs = config.layers[li].regularization;
    if (!coeffs.any()) continue;
    for (const auto& p : layer_params[li]) {
      total += p.is_weight ? elastic_net_penalty(p.value, coeffs)
                           : bias_l2_penalty(p.value, coeffs);
    }
  }
  return static_cast<float>(total);
}

void Model::add_regularization_grads(Gradients* grads) const {
  for (size_t li = 0; li < config.layers.size(); ++li) {
    const auto& coeffs = config.layers[li].regularization;
    if (!coeffs.any()) continue;
    for (const auto& p : layer_params[li]) {
      Tensor& g = grads->try_emplace(p.name, p.value.shape()).first->second;
      if (p.is_weight) {
        add_elastic_net_grad(p.value, coeffs, &g);
      } else {
        add_bias_l2_grad(p.value, coeffs, &g);
      }
    }
  }
}

Tensor Model::run_layer(size_t idx, const Tensor& input, bool training, Rng* dropout_rng,
                        TapeEntry* entry) const {
  const LayerSpec& s = config.layers[idx];
  const auto& params = layer_params[idx];
  Tensor out;
  Tensor consumed = input;  // lstm may repack below
  switch (s.kind) {
    case LayerKind::kConv2d: {
      out = conv2d_forward(input, params[0].value, s.stride, s.padding);
      const Tensor& bias = params[1].value;
      const int filters = s.filters;
      float* po = out.data();
      for (size_t i = 0; i < out.size(); i += filters) {
        for (int f = 0; f < filters; ++f) po[i + f] += bias[f];
      }
      break;
    }
    case LayerKind::kMaxPool:
      out = max_pool(input, {s.pool_h, s.pool_w}, s.stride, entry ? &entry->argmax : nullptr);
      break;
    case LayerKind::kDense: {
      const Tensor& w = params[0].value;
      const Tensor& b = params[1].value;
      if (input.rank() != 1 || input.dim(0) != w.dim(0)) {
        throw ShapeError("dense '" + s.name + "' input " + input.shape_str() +
                         " incompatible with kernel " + w.shape_str());
      }
      const int in = w.dim(0), units = w.dim(1);
      out = Tensor({units});
      float* po = out.data();
      for (int j = 0; j < units; ++j) po[j] = b[j];
      for (int i = 0; i < in; ++i) {
        const float xi = input[i];
        const float* row = w.data() + static_cast<size_t>(i) * units;
        for (int j = 0; j < units; ++j) po[j] += xi * row[j];
      }
      break;
    }
    case LayerKind::kFlatten:
      out = input.reshaped({static_cast<int>(input.size())});
      break;
    case LayerKind::kLstm: {
      if (input.rank() == 3) consumed = repack_time_major(input);
      LstmParams lp{params[0].value, params[1].value, params[2].value};
      out = lstm_forward(consumed, lp, entry ? &entry->lstm : nullptr);
      break;
    }
    case LayerKind::kAttention:
      out = attention_pool(input, params[0].value, params[1].value,
                           entry ? &entry->attn : nullptr);
      break;
    case LayerKind::kDropout: {
      if (training && dropout_rng && s.rate > 0.0f) {
        Tensor mask(input.shape());
        const float keep_scale = 1.0f / (1.0f - s.rate);
        for (size_t i = 0; i < mask.size(); ++i) {
          mask[i] = dropout_rng->uniform() >= s.rate ? keep_scale : 0.0f;
        }
        out = Tensor(input.shape());
        for (size_t i = 0; i < out.size(); ++i) out[i] = input[i] * mask[i];
        if (entry) entry->dropout_mask = std::move(mask);
      } else {
        out = input;
        if (entry) entry->dropout_mask = Tensor::full(input.shape(), 1.0f);
      }
      break;
    }
    case LayerKind::kActivation:
      out = apply_activation(input, s.activation);
      break;
  }
  if (entry) {
    entry->input = std::move(consumed);
    entry->output = out;
  }
  return out;
}

namespace {

Tensor canonical_input(const Tensor& input, const std::vector<int>& want) {
  if (input.shape() == want) return input;
  if (input.size() == shape_numel(want)) return input.reshaped(want);
  throw ShapeError("input shape " + input.shape_str() + " != model input " +
                   shape_to_string(want));
}

}  // namespace

float Model::forward(const Tensor& input) const {
  Tensor cur = canonical_input(input, config.input_shape);
  for (size_t li = 0; li < config.layers.size(); ++li) {
    cur = run_layer(li, cur, /*training=*/false, nullptr, nullptr);
  }
  const float p = cur[0];
  if (!std::isfinite(p)) throw NumericError("non-finite model output");
  return p;
}

Tensor Model::infer_layer(size_t idx, const Tensor& input) const {
  return run_layer(idx, input, /*training=*/false, nullptr, nullptr);
}

float Model::forward_train(const Tensor& input, Rng* dropout_rng, Tape* tape) const {
  Tensor cur = canonical_input(input, config.input_shape);
  tape->entries.resize(config.layers.size());
  for (size_t li = 0; li < config.layers.size(); ++li) {
    cur = run_layer(li, cur, /*training=*/true, dropout_rng, &tape->entries[li]);
    if (!cur.all_finite()) {
      throw NumericError("non-finite values in layer '" + config.layers[li].name + "'");
    }
  }
  tape->p = cur[0];
  return tape->p;
}

Gradients Model::backward(const Tape& tape, float target) const {
  const size_t layer_count = config.layers.size();
  Gradients grads;
  // The config guarantees a final sigmoid; BCE+sigmoid backward is fused, so
  // the seed gradient is w.r.t. the sigmoid's input (the logit): p - y.
  Tensor grad({1});
  grad[0] = tape.p - target;

  for (size_t li = layer_count - 1; li-- > 0;) {
    const LayerSpec& s = config.layers[li];
    const TapeEntry& entry = tape.entries[li];
    const auto& params = layer_params[li];
    switch (s.kind) {
      case LayerKind::kConv2d: {
        Tensor grad_bias({s.filters});
        for (size_t i = 0; i < grad.size(); i += s.filters) {
          for (int f = 0; f < s.filters; ++f) grad_bias[f] += grad[i + f];
        }
        Tensor grad_in, grad_kernel;
        conv2d_backward(entry.input, params[0].value, s.stride, s.padding, grad, &grad_in,
                        &grad_kernel);
        grads[params[0].name] = std::move(grad_kernel);
        grads[params[1].name] = std::move(grad_bias);
        grad = std::move(grad_in);
        break;
      }
      case LayerKind::kMaxPool:
        grad = max_pool_backward(grad, entry.input.shape(), entry.argmax);
        break;
      case LayerKind::kDense: {
        const Tensor& w = params[0].value;
        const Tensor& x = entry.input;
        const int in = w.dim(0), units = w.dim(1);
        Tensor grad_w(w.shape());
        Tensor grad_in({in});
        for (int i = 0; i < in; ++i) {
          const float xi = x[i];
          const float* wrow = w.data() + static_cast<size_t>(i) * units;
          float* grow = grad_w.data() + static_cast<size_t>(i) * units;
          float acc = 0.0f;
          for (int j = 0; j < units; ++j) {
            grow[j] = xi * grad[j];
            acc += wrow[j] * grad[j];
          }
          grad_in[i] = acc;
        }
        grads[params[0].name] = std::move(grad_w);
        grads[params[1].name] = grad;  // d(bias) = d(out)
        grad = std::move(grad_in);
        break;
      }
      case LayerKind::kFlatten:
        grad = grad.reshaped(entry.input.shape());
        break;
      case LayerKind::kLstm: {
        LstmParams p{params[0].value, params[1].value, params[2].value};
        LstmParams g;
        Tensor grad_seq = lstm_backward(entry.input, p, entry.lstm, grad, &g);
        grads[params[0].name] = std::move(g.wx);
        grads[params[1].name] = std::move(g.wh);
        grads[params[2].name] = std::move(g.b);
        // If the layer consumed a repacked [H,W,C] block, route the gradient
        // back through the repack.
        const std::vector<int>& feed =
            li == 0 ? config.input_shape : output_shapes[li - 1];
        grad = feed.size() == 3 ? unpack_time_major(grad_seq, feed) : std::move(grad_seq);
        break;
      }
      case LayerKind::kAttention: {
        Tensor grad_w(params[0].value.shape());
        Tensor grad_v(params[1].value.shape());
        grad = attention_backward(entry.input, params[0].value, params[1].value, entry.attn,
                                  grad, &grad_w, &grad_v);
        grads[params[0].name] = std::move(grad_w);
        grads[params[1].name] = std::move(grad_v);
        break;
      }
      case LayerKind::kDropout: {
        Tensor grad_in(grad.shape());
        for (size_t i = 0; i < grad.size(); ++i) grad_in[i] = grad[i] * entry.dropout_mask[i];
        grad = std::move(grad_in);
        break;
      }
      case LayerKind::kActivation:
        grad = activation_backward(grad, entry.output, s.activation);
        break;
    }
  }
  return grads;
}

Gradients Model::gradients(const Tensor& input, float target, float* loss_out) const {
  Tape tape;
  forward_train(input, nullptr, &tape);
  if (loss_out) *loss_out = bce_loss(tape.p, target) + regularization_penalty();
  Gradients g = backward(tape, target);
  add_regularization_grads(&g);
  return g;
}

double evaluate_auc(const Model& model, const Dataset& data) {
  std::vector<double> scores(data.size());
  std::vector<int> labels(data.size());
  for (size_t i = 0; i < data.size(); ++i) {
    scores[i] = model.forward(data.features[i]);
    labels[i] = data.labels[i] > 0.5f ? 1 : 0;
  }
  return auc_roc(scores, labels);
}

TrainHistory train_model(Model& model, const Dataset& train_set, const Dataset& val_set,
                         OptimizerState& optimizer, const TrainOptions& options,
                         const StepHooks* hooks) {
  if (train_set.size() == 0) throw DataError("training set is empty");
  bool has_pos = false, has_neg = false;
  for (float y : train_set.labels) (y > 0.5f ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg) throw DataError("training set must contain both classes");
  if (options.batch_size < 1) throw ParamError("batch_size must be positive");
  if (options.epochs < 0) throw ParamError("epochs must be non-negative");

  TrainHistory history;
  Rng shuffle_rng(Rng::derive(options.seed, 1));
  Rng dropout_rng(Rng::derive(options.seed, 2));
  auto params = model.parameter_ptrs();
  std::vector<size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  long step = 0;

  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double loss_sum = 0.0;
    int batch_count = 0;
    for (size_t start = 0; start < order.size(); start += options.batch_size) {
      const size_t stop = std::min(order.size(), start + options.batch_size);
      const auto batch_n = static_cast<float>(stop - start);
      if (hooks && hooks->on_step_begin) hooks->on_step_begin(step);

      Gradients batch_grads;
      double bce_sum = 0.0;
      for (size_t bi = start; bi < stop; ++bi) {
        const size_t si = order[bi];
        Tape tape;
        model.forward_train(train_set.features[si], &dropout_rng, &tape);
        bce_sum += bce_loss(tape.p, train_set.labels[si]);
        Gradients g = model.backward(tape, train_set.labels[si]);
        for (auto& [name, tensor] : g) {
          auto [it, inserted] = batch_grads.try_emplace(name, std::move(tensor));
          if (!inserted) {
            for (size_t i = 0; i < it->second.size(); ++i) it->second[i] += tensor[i];
          }
        }
      }
      for (auto& [name, tensor] : batch_grads) {
        for (auto& v : tensor.vec()) v /= batch_n;
      }
      model.add_regularization_grads(&batch_grads);
      if (hooks && hooks->on_gradients) hooks->on_gradients(batch_grads);

      optimizer_step(optimizer, params, batch_grads);
      if (hooks && hooks->on_step_end) hooks->on_step_end();

      loss_sum += bce_sum / batch_n + model.regularization_penalty();
      ++batch_count;
      ++step;
    }
    EpochStats stats;
    stats.train_loss = loss_sum / std::max(1, batch_count);
    stats.val_auc = std::numeric_limits<double>::quiet_NaN();
    if (val_set.size() >= 2) {
      try {
        stats.val_auc = evaluate_auc(model, val_set);
      } catch (const MetricError&) {
        // single-class validation set; leave NaN
      }
    }
    if (options.verbose) {
      std::cerr << "[train] epoch=" << epoch + 1 << "/" << options.epochs
                << " loss=" << stats.train_loss << " val_auc=" << stats.val_auc << "\n";
    }
    history.push_back(stats);
  }
  return history;
}

}  // namespace edgepress
