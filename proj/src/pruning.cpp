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

#include "edgepress/pruning.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>

#include <json.hpp>

#include "edgepress/errors.hpp"

namespace edgepress {

std::string schedule_kind_to_string(ScheduleKind kind) {
  return kind == ScheduleKind::kConstant ? "constant" : "polynomial";
}

ScheduleKind schedule_kind_from_string(const std::string& name) {
  if (name == "constant") return ScheduleKind::kConstant;
  if (name == "polynomial") return ScheduleKind::kPolynomial;
  throw ConfigError("unknown schedule '" + name + "' (expected constant or polynomial)");
}

PruningSchedule PruningSchedule::constant(double sparsity) {
  PruningSchedule s;
  s.kind = ScheduleKind::kConstant;
  s.final_sparsity = sparsity;
  s.check();
  return s;
}

PruningSchedule PruningSchedule::polynomial(double final_sparsity, long begin, long end) {
  PruningSchedule s;
  s.kind = ScheduleKind::kPolynomial;
  s.final_sparsity = final_sparsity;
  s.begin_step = begin;
  s.end_step = end;
  s.check();
  return s;
}

void PruningSchedule::check() const {
  if (initial_sparsity < 0.0 || initial_sparsity >= 1.0) {
    throw ParamError("initial_sparsity must be in [0,1)");
  }
  if (final_sparsity < 0.0 || final_sparsity > 1.0) {
    throw ParamError("final_sparsity must be in [0,1]");
  }
  if (initial_sparsity > final_sparsity) {
    throw ParamError("initial_sparsity must not exceed final_sparsity");
  }
  if (begin_step > end_step) throw ParamError("begin_step must not exceed end_step");
  if (frequency < 1) throw ParamError("frequency must be >= 1");
}

double sparsity_at(const PruningSchedule& schedule, long step) {
  if (schedule.kind == ScheduleKind::kConstant) {
    return step >= schedule.begin_step ? schedule.final_sparsity : schedule.initial_sparsity;
  }
  // end first: a degenerate window (begin == end) resolves to the target
  if (step >= schedule.end_step) return schedule.final_sparsity;
  if (step <= schedule.begin_step) return schedule.initial_sparsity;
  const double progress = static_cast<double>(step - schedule.begin_step) /
                          static_cast<double>(schedule.end_step - schedule.begin_step);
  double decay = 1.0;
  for (int i = 0; i < schedule.exponent; ++i) decay *= (1.0 - progress);
  return schedule.final_sparsity +
         (schedule.initial_sparsity - schedule.final_sparsity) * decay;
}

Tensor magnitude_mask(const Tensor& weights, double sparsity) {
  if (sparsity < 0.0 || sparsity > 1.0) throw ParamError("sparsity must be in [0,1]");
  const size_t n = weights.size();
  const auto k = static_cast<size_t>(std::floor(sparsity * static_cast<double>(n)));
  Tensor mask = Tensor::full(weights.shape(), 1.0f);
  if (k == 0) return mask;
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  // stable partial sort on |w|: ties resolved by lowest flat index.
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return std::fabs(weights[a]) < std::fabs(weights[b]);
  });
  for (size_t i = 0; i < k; ++i) mask[order[i]] = 0.0f;
  return mask;
}

Model apply_masks(const Model& model) {
  Model out = model;
  out.apply_masks_in_place();
  return out;
}

std::string PruneReport::to_json() const {
  nlohmann::json j;
  j["steps_executed"] = steps_executed;
  nlohmann::json layers_j = nlohmann::json::array();
  for (const auto& l : layers) {
    layers_j.push_back({{"name", l.name},
                        {"target_sparsity", l.target_sparsity},
                        {"achieved_zero_count", l.achieved_zero_count},
                        {"total", l.total}});
  }
  j["layers"] = layers_j;
  nlohmann::json hist = nlohmann::json::array();
  for (const auto& e : history) {
    hist.push_back({{"train_loss", e.train_loss}, {"val_auc", e.val_auc}});
  }
  j["val_history"] = hist;
  return j.dump(2);
}

namespace {

// Prunable weight params of non-excluded layers.
std::vector<Parameter*> prunable_params(Model& model, const std::set<std::string>& excluded) {
  std::vector<Parameter*> out;
  for (size_t li = 0; li < model.config.layers.size(); ++li) {
    if (excluded.count(model.config.layers[li].name)) continue;
    for (auto& p : model.layer_params[li]) {
      if (p.prunable()) out.push_back(&p);
    }
  }
  return out;
}

}  // namespace

PruneReport prune_fine_tune(Model& model, const Dataset& train_set, const Dataset& val_set,
                            OptimizerState& optimizer, const PruneOptions& options) {
  PruningSchedule schedule = options.schedule;
  schedule.check();

  const long steps_per_epoch =
      static_cast<long>((train_set.size() + options.batch_size - 1) / options.batch_size);
  const long total_steps = steps_per_epoch * options.epochs;
  if (schedule.end_step <= 0) {
    // Default window: ramp over the first 80% of fine-tuning so the final
    // 20% trains at the fixed target.
    schedule.begin_step = 0;
    schedule.end_step = std::max<long>(1, (total_steps * 8) / 10);
  }

  if (schedule.final_sparsity >= 1.0) {
    std::cerr << "[prune] warning: final sparsity 1.0 removes every prunable weight; "
                 "the model may collapse to a constant output\n";
  }

  auto targets = prunable_params(model, options.excluded_layers);

  auto update_masks = [&](long step) {
    const double s = sparsity_at(schedule, step);
    for (Parameter* p : targets) p->mask = magnitude_mask(p->value, s);
    model.apply_masks_in_place();
  };

  StepHooks hooks;
  long last_update = -1;
  hooks.on_step_begin = [&](long step) {
    const bool due = step >= schedule.begin_step &&
                     (step - schedule.begin_step) % schedule.frequency == 0;
    // Pin the exact target once the ramp window closes, even when the
    // frequency grid never lands on end_step.
    const bool final_due = step >= schedule.end_step && last_update < schedule.end_step;
    if ((due && step <= schedule.end_step) || final_due) {
      update_masks(step);
      last_update = step;
    }
  };
  hooks.on_gradients = [&](Gradients& grads) {
    for (Parameter* p : targets) {
      auto it = grads.find(p->name);
      if (it == grads.end()) continue;
      for (size_t i = 0; i < p->mask.size(); ++i) {
        if (p->mask[i] == 0.0f) it->second[i] = 0.0f;
      }
    }
  };
  hooks.on_step_end = [&] { model.apply_masks_in_place(); };

  TrainOptions topts;
  topts.epochs = options.epochs;
  topts.batch_size = options.batch_size;
  topts.seed = options.seed;
  topts.verbose = options.verbose;
  TrainHistory history = train_model(model, train_set, val_set, optimizer, topts, &hooks);

  // The loop may end before reaching end_step (short runs, epochs=0); pin
  // the exact target sparsity regardless.
  if (last_update < schedule.end_step) update_masks(schedule.end_step);

  PruneReport report;
  report.steps_executed = total_steps;
  report.history = std::move(history);
  for (size_t li = 0; li < model.config.layers.size(); ++li) {
    for (auto& p : model.layer_params[li]) {
      if (!p.prunable()) continue;
      PruneLayerReport lr;
      lr.name = p.name;
      const bool excluded = options.excluded_layers.count(model.config.layers[li].name) > 0;
      lr.target_sparsity = excluded ? 0.0 : schedule.final_sparsity;
      lr.total = p.value.size();
      for (size_t i = 0; i < p.value.size(); ++i) {
        if (p.mask[i] == 0.0f) lr.achieved_zero_count += 1;
      }
      report.layers.push_back(std::move(lr));
    }
  }
  return report;
}

}  // namespace edgepress
