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

#include "edgepress/features.hpp"
#include "edgepress/model.hpp"
#include "edgepress/pruning.hpp"

namespace edgepress {

// The default sparsity grid (percentages from the experiment protocol).
std::vector<double> default_sparsity_grid();

struct SweepDatasetConfig {
  int synthetic_n = 96;
  uint64_t seed = 7;
  FeatureMode mode = FeatureMode::kMfcc;
  bool augment = false;
  std::string manifest;  // when set, WAV files from a manifest instead
};

struct SweepConfig {
  std::vector<ScheduleKind> schedules{ScheduleKind::kConstant, ScheduleKind::kPolynomial};
  std::vector<double> sparsities = default_sparsity_grid();
  int num_seeds = 3;
  uint64_t seed_base = 1234;  // run seeds are seed_base + run index
  bool with_q8 = true;
  bool with_q16 = true;
  ModelConfig model;          // desk-scale CNN unless overridden
  std::string model_config;   // optional path that replaces `model`
  SweepDatasetConfig dataset;
  int baseline_epochs = 8;
  int finetune_epochs = 10;
  double finetune_lr_scale = 0.1;
  int timing_samples = 16;
  int threads = 0;  // 0 = hardware concurrency

  SweepConfig();

  static SweepConfig from_json(const std::string& text);
  static SweepConfig load(const std::string& path);
  std::string to_json() const;
  void check() const;
};

struct SweepRow {
  std::string schedule;  // "none" for the baseline row
  double sparsity = 0.0;
  uint64_t seed = 0;
  double auc = 0.0, auc_q8 = 0.0, auc_q16 = 0.0;
  size_t size = 0, size_q8 = 0, size_q16 = 0;
  double t_us = 0.0, t_q8_us = 0.0, t_q16_us = 0.0;
  double t_std_us = 0.0, t_q8_std_us = 0.0, t_q16_std_us = 0.0;
  std::string error;  // non-empty marks a failed cell

  bool ok() const { return error.empty(); }
};

// Per seed: one baseline training, then a fresh pruned fine-tune per
// (schedule, sparsity) cell; f32/8/16 variants evaluated on the held-out
// test set. Failed cells carry an error tag; the sweep continues. Rows are
// sorted by (schedule, sparsity, seed). AUC and size columns are
// reproducible bit-for-bit across reruns; timings are not.
std::vector<SweepRow> run_sweep(const SweepConfig& config);

// 12-column CSV: schedule,sparsity,seed,auc,auc_q8,auc_q16,size,size_q8,
// size_q16,t_us,t_q8_us,t_q16_us. Failed cells are logged, not emitted.
void emit_report(const std::vector<SweepRow>& rows, const std::string& csv_path);
std::vector<SweepRow> read_report(const std::string& csv_path);

// Three line charts (auc/size/time vs sparsity) with one series per
// precision and +-std bands across seeds. Only the polynomial schedule is
// drawn when both are present, mirroring the experiment figures.
void emit_plots(const std::vector<SweepRow>& rows, const std::string& dir);

struct AggregateRow {
  std::string schedule;
  double sparsity = 0.0;
  double auc_mean = 0.0, auc_std = 0.0;
  double auc_q8_mean = 0.0, auc_q8_std = 0.0;
  double auc_q16_mean = 0.0, auc_q16_std = 0.0;
  double size_mean = 0.0, size_std = 0.0;
  double size_q8_mean = 0.0, size_q8_std = 0.0;
  double size_q16_mean = 0.0, size_q16_std = 0.0;
  double t_mean = 0.0, t_std = 0.0;
  double t_q8_mean = 0.0, t_q8_std = 0.0;
  double t_q16_mean = 0.0, t_q16_std = 0.0;
};

// Mean +- std across seeds per (schedule, sparsity) cell.
std::vector<AggregateRow> aggregate_rows(const std::vector<SweepRow>& rows);
void emit_summary(const std::vector<AggregateRow>& rows, const std::string& csv_path);

}  // namespace edgepress
