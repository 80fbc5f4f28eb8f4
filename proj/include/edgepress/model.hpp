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
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "edgepress/loss.hpp"
#include "edgepress/ops.hpp"
#include "edgepress/optimizer.hpp"
#include "edgepress/recurrent.hpp"
#include "edgepress/rng.hpp"
#include "edgepress/tensor.hpp"

namespace edgepress {

enum class LayerKind {
  kConv2d,
  kMaxPool,
  kDense,
  kFlatten,
  kLstm,
  kAttention,
  kDropout,
  kActivation,
};

std::string layer_kind_to_string(LayerKind kind);
LayerKind layer_kind_from_string(const std::string& name);

struct LayerSpec {
  LayerKind kind = LayerKind::kDense;
  std::string name;
  // conv2d
  int filters = 0;
  int kernel_h = 0, kernel_w = 0;
  Stride stride{1, 1};
  Padding padding = Padding::kValid;
  // maxpool
  int pool_h = 0, pool_w = 0;
  // dense / lstm / attention (attention: score dimension, 0 = hidden size)
  int units = 0;
  // dropout
  float rate = 0.0f;
  // activation
  ActKind activation = ActKind::kRelu;

  ElasticNetCoeffs regularization;
  bool prunable = true;  // attention layers default to false at parse time
};

struct TrainingConfig {
  OptimizerKind optimizer = OptimizerKind::kAdam;
  double learning_rate = 1e-3;
  int epochs = 10;
  int batch_size = 32;
};

struct ModelConfig {
  std::vector<int> input_shape;
  uint64_t seed = 0;
  std::vector<LayerSpec> layers;
  TrainingConfig training;

  static ModelConfig from_json(const std::string& text);
  static ModelConfig load(const std::string& path);
  std::string to_json() const;

  // Shape-chains every layer; throws ConfigError naming the first bad layer.
  // Returns the resolved output shape of each layer.
  std::vector<std::vector<int>> validate() const;
};

struct Parameter {
  std::string name;  // "<layer>/<tensor>"
  Tensor value;
  bool is_weight = false;  // pruning/regularization never touch biases
  Tensor mask;             // same shape as value when prunable, else empty

  bool prunable() const { return !mask.empty(); }
};

// Per-layer forward record for backprop.
struct TapeEntry {
  Tensor input;   // as consumed by the layer (post time-major repack for lstm)
  Tensor output;
  std::vector<int> argmax;  // maxpool
  Tensor dropout_mask;      // scaled keep mask
  LstmCache lstm;
  AttentionCache attn;
};

struct Tape {
  std::vector<TapeEntry> entries;
  float p = 0.0f;
};

class Model {
 public:
  ModelConfig config;
  std::vector<std::vector<Parameter>> layer_params;   // parallel to config.layers
  std::vector<std::vector<int>> output_shapes;        // resolved at build

  // Initializes parameters from config.seed (uniform Glorot, zero biases)
  // and all-ones masks on prunable weights.
  static Model build(const ModelConfig& config);

  size_t param_count() const;

  // Inference: dropout inactive, deterministic. Returns p in [0,1].
  float forward(const Tensor& input) const;

  // Training-mode forward; dropout active, every layer output finite-checked.
  float forward_train(const Tensor& input, Rng* dropout_rng, Tape* tape) const;

  // Single layer in inference mode; used by the alternative execution paths.
  Tensor infer_layer(size_t idx, const Tensor& input) const;

  // Gradient of (BCE + regularization is added by the caller) w.r.t. every
  // trainable parameter, from a recorded tape.
  Gradients backward(const Tape& tape, float target) const;

  // Convenience: forward_train + backward, dropout inactive.
  Gradients gradients(const Tensor& input, float target, float* loss_out = nullptr) const;

  std::map<std::string, Tensor*> parameter_ptrs();
  Parameter* find_parameter(const std::string& name);
  const Parameter* find_parameter(const std::string& name) const;

  // Zeroes every weight whose mask entry is 0. Idempotent.
  void apply_masks_in_place();

  float regularization_penalty() const;
  void add_regularization_grads(Gradients* grads) const;

 private:
  Tensor run_layer(size_t idx, const Tensor& input, bool training, Rng* dropout_rng,
                   TapeEntry* entry) const;
};

struct Dataset {
  std::vector<Tensor> features;
  std::vector<float> labels;

  size_t size() const { return features.size(); }
  void add(Tensor x, float y) {
    features.push_back(std::move(x));
    labels.push_back(y);
  }
};

struct SplitDatasets {
  Dataset train, val, test;
};

struct EpochStats {
  double train_loss = 0.0;
  double val_auc = 0.0;
};
using TrainHistory = std::vector<EpochStats>;

struct TrainOptions {
  int epochs = 10;
  int batch_size = 32;
  uint64_t seed = 0;  // shuffle + dropout stream
  bool verbose = false;
};

// Optional per-step callbacks; the pruning fine-tuner hangs mask updates here.
struct StepHooks {
  std::function<void(long)> on_step_begin;       // global 0-based step index
  std::function<void(Gradients&)> on_gradients;  // after batch grads + reg grads
  std::function<void()> on_step_end;             // after the optimizer update
};

// Mini-batch training with seeded shuffling. Loss = mean batch BCE +
// elastic-net penalties. History has exactly options.epochs entries.
TrainHistory train_model(Model& model, const Dataset& train_set, const Dataset& val_set,
                         OptimizerState& optimizer, const TrainOptions& options,
                         const StepHooks* hooks = nullptr);

double evaluate_auc(const Model& model, const Dataset& data);

}  // namespace edgepress
