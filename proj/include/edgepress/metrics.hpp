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

#include <chrono>
#include <cmath>
#include <functional>
#include <vector>

#include "edgepress/tensor.hpp"

namespace edgepress {

// Rank-based ROC AUC: P(score_pos > score_neg) + 0.5 * P(tie). Ties get
// average ranks. Throws MetricError when only one class is present.
double auc_roc(const std::vector<double>& scores, const std::vector<int>& labels);

struct TimingStats {
  double mean_us = 0.0;
  double std_us = 0.0;
  // Median over 5 equal groups of per-sample means; robust to scheduler
  // noise spikes.
  double median_of_means_us = 0.0;
};

// Times one single-input forward per sample (no batching), after `warmup`
// untimed calls. Monotonic clock.
TimingStats time_single_inference(const std::function<void(const Tensor&)>& forward_one,
                                  const std::vector<Tensor>& samples, int warmup = 10);

}  // namespace edgepress
