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

#include <set>
#include <string>
#include <vector>

#include "edgepress/model.hpp"
#include "edgepress/tensor.hpp"

namespace edgepress {

enum class ScheduleKind { kConstant, kPolynomial };

std::string schedule_kind_to_string(ScheduleKind kind);
ScheduleKind schedule_kind_from_string(const std::string& name);

// Sparsity trajectory over fine-tuning steps. Constant jumps to
// final_sparsity at begin_step; polynomial ramps
// s(t) = s_f + (s_i - s_f) * (1 - (t - t0)/(te - t0))^3.
struct PruningSchedule {
  ScheduleKind kind = ScheduleKind::kPolynomial;
  double initial_sparsity = 0.0;  // in [0,1)
  double final_sparsity = 0.0;    // in [0,1]
  long begin_step = 0;
  long end_step = 0;
  int exponent = 3;
  long frequency = 100;  // steps between mask updates

  static PruningSchedule constant(double sparsity);
  static PruningSchedule polynomial(double final_sparsity, long begin, long end);
  void check() const;
};

// Clamped to [initial, final] outside [begin_step, end_step]; monotone
// non-decreasing in t.
double sparsity_at(const PruningSchedule& schedule, long step);

// Binary mask with exactly floor(s * n) zeros at the smallest |w|; ties go
// to the lowest flat index.
Tensor magnitude_mask(const Tensor& weights, double sparsity);

// Pure version of Model::apply_masks_in_place.
Model apply_masks(const Model& model);

struct PruneLayerReport {
  std::string name;           // parameter name, e.g. "fc1/kernel"
  double target_sparsity = 0.0;
  size_t achieved_zero_count = 0;
  size_t total = 0;
};

struct PruneReport {
  std::vector<PruneLayerReport> layers;
  long steps_executed = 0;
  TrainHistory history;

  std::string to_json() const;
};

struct PruneOptions {
  PruningSchedule schedule;
  int epochs = 10;
  int batch_size = 32;
  uint64_t seed = 0;
  std::set<std::string> excluded_layers;  // layer names kept dense
  bool verbose = false;
};

// Magnitude pruning inside a fine-tuning loop: every `frequency` steps masks
// are recomputed at sparsity_at(t) and re-applied; masked weights get no
// gradient and are re-zeroed after every optimizer step. A final mask update
// at end_step pins the exact target sparsity. Excluded (and non-prunable)
// layers keep all-ones masks.
PruneReport prune_fine_tune(Model& model, const Dataset& train_set, const Dataset& val_set,
                            OptimizerState& optimizer, const PruneOptions& options);

}  // namespace edgepress
