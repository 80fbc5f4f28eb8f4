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

#include "edgepress/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "edgepress/errors.hpp"

namespace edgepress {

double auc_roc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) throw MetricError("scores/labels length mismatch");
  size_t n_pos = 0, n_neg = 0;
  for (int y : labels) (y ? n_pos : n_neg) += 1;
  if (n_pos == 0 || n_neg == 0) {
    throw MetricError("auc_roc needs both classes present");
  }
  const size_t n = scores.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return scores[a] < scores[b]; });

  // Average ranks over tie groups (ranks are 1-based).
  double pos_rank_sum = 0.0;
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // mean of i+1 .. j
    for (size_t k = i; k < j; ++k) {
      if (labels[order[k]]) pos_rank_sum += avg_rank;
    }
    i = j;
  }
  const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
  return (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

TimingStats time_single_inference(const std::function<void(const Tensor&)>& forward_one,
                                  const std::vector<Tensor>& samples, int warmup) {
  if (samples.empty()) throw ParamError("time_single_inference needs at least one sample");
  using clock = std::chrono::steady_clock;

  for (int i = 0; i < warmup; ++i) forward_one(samples[i % samples.size()]);

  std::vector<double> times_us(samples.size());
  for (size_t i = 0; i < samples.size(); ++i) {
    const auto t0 = clock::now();
    forward_one(samples[i]);
    const auto t1 = clock::now();
    times_us[i] = std::chrono::duration<double, std::micro>(t1 - t0).count();
  }

  TimingStats stats;
  double sum = 0.0;
  for (double t : times_us) sum += t;
  stats.mean_us = sum / static_cast<double>(times_us.size());
  double var = 0.0;
  for (double t : times_us) var += (t - stats.mean_us) * (t - stats.mean_us);
  stats.std_us = std::sqrt(var / static_cast<double>(times_us.size()));

  const size_t groups = std::min<size_t>(5, times_us.size());
  std::vector<double> means(groups, 0.0);
  std::vector<size_t> counts(groups, 0);
  for (size_t i = 0; i < times_us.size(); ++i) {
    means[i % groups] += times_us[i];
    counts[i % groups] += 1;
  }
  for (size_t g = 0; g < groups; ++g) means[g] /= static_cast<double>(counts[g]);
  std::sort(means.begin(), means.end());
  stats.median_of_means_us = means[groups / 2];
  return stats;
}

}  // namespace edgepress
