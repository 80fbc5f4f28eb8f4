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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

#include "edgepress/errors.hpp"
#include "edgepress/features.hpp"
#include "edgepress/parallel.hpp"

namespace edgepress {

namespace {

constexpr double kSilenceRms = 1e-4;

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double rms(const AudioSignal& s) {
  if (s.samples.empty()) return 0.0;
  double acc = 0.0;
  for (float v : s.samples) acc += static_cast<double>(v) * v;
  return std::sqrt(acc / static_cast<double>(s.samples.size()));
}

}  // namespace

DatasetManifest read_manifest_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest '" + path + "'");
  DatasetManifest manifest;
  std::string line;
  bool first = true;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (first) {
      first = false;
      if (fields.size() >= 3 && fields[0] == "path") continue;  // header
    }
    if (fields.size() < 3) {
      throw ParseError("manifest line " + std::to_string(lineno) +
                       ": expected path,label,source_id[,split]");
    }
    ManifestEntry e;
    e.id = fields[0];
    if (fields[1] != "0" && fields[1] != "1") {
      throw ParseError("manifest line " + std::to_string(lineno) + ": label must be 0 or 1");
    }
    e.label = fields[1] == "1" ? 1 : 0;
    e.source_id = fields[2];
    if (fields.size() >= 4 && !fields[3].empty()) {
      if (fields[3] != "train" && fields[3] != "val" && fields[3] != "test") {
        throw ParseError("manifest line " + std::to_string(lineno) +
                         ": split must be train|val|test");
      }
      e.split = fields[3];
    }
    manifest.entries.push_back(std::move(e));
  }
  return manifest;
}

void write_manifest_csv(const std::string& path, const DatasetManifest& manifest) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write manifest '" + path + "'");
  out << "path,label,source_id,split\n";
  for (const auto& e : manifest.entries) {
    out << e.id << ',' << e.label << ',' << e.source_id << ',' << e.split << '\n';
  }
}

namespace {

enum Split { kTrain = 0, kVal = 1, kTest = 2 };

// Assign a split index per entry, whole source groups at a time.
std::vector<int> assign_splits(const DatasetManifest& manifest) {
  const double ratio_sum = manifest.ratios[0] + manifest.ratios[1] + manifest.ratios[2];
  if (std::fabs(ratio_sum - 1.0) > 1e-6) throw ParamError("split ratios must sum to 1");

  // Group entries by source id; mixed explicit splits inside a group leak.
  std::map<std::string, std::vector<size_t>> groups;
  for (size_t i = 0; i < manifest.entries.size(); ++i) {
    groups[manifest.entries[i].source_id].push_back(i);
  }
  std::vector<int> split_of(manifest.entries.size(), -1);
  std::vector<std::string> auto_groups;
  size_t auto_count = 0;
  for (auto& [source, idxs] : groups) {
    std::string pinned;
    for (size_t i : idxs) {
      const std::string& s = manifest.entries[i].split;
      if (s.empty()) continue;
      if (pinned.empty()) {
        pinned = s;
      } else if (pinned != s) {
        throw LeakageError("source_recording_id '" + source + "' appears in splits '" + pinned +
                           "' and '" + s + "'");
      }
    }
    if (!pinned.empty()) {
      const int si = pinned == "train" ? kTrain : pinned == "val" ? kVal : kTest;
      for (size_t i : idxs) split_of[i] = si;
    } else {
      auto_groups.push_back(source);
      auto_count += idxs.size();
    }
  }

  // Deterministic shuffle of the remaining groups, then greedy fill against
  // largest-remainder targets on entry counts.
  Rng rng(Rng::derive(manifest.seed, 3));
  rng.shuffle(auto_groups);
  size_t targets[3];
  size_t assigned_total = 0;
  double remainders[3];
  for (int s = 0; s < 3; ++s) {
    const double exact = manifest.ratios[s] * static_cast<double>(auto_count);
    targets[s] = static_cast<size_t>(exact);
    remainders[s] = exact - static_cast<double>(targets[s]);
    assigned_total += targets[s];
  }
  while (assigned_total < auto_count) {
    int best = 0;
    for (int s = 1; s < 3; ++s) {
      if (remainders[s] > remainders[best]) best = s;
    }
    targets[best] += 1;
    remainders[best] = -1.0;
    ++assigned_total;
  }
  size_t filled[3] = {0, 0, 0};
  for (const auto& source : auto_groups) {
    const auto& idxs = groups[source];
    int dest = kTest;
    for (int s = 0; s < 3; ++s) {
      if (filled[s] + idxs.size() <= targets[s]) {
        dest = s;
        break;
      }
    }
    // Overfull everywhere (oversized groups): put it where the deficit is
    // largest.
    if (filled[dest] + idxs.size() > targets[dest]) {
      long best_deficit = -1;
      for (int s = 0; s < 3; ++s) {
        const long deficit = static_cast<long>(targets[s]) - static_cast<long>(filled[s]);
        if (deficit > best_deficit) {
          best_deficit = deficit;
          dest = s;
        }
      }
    }
    for (size_t i : idxs) split_of[i] = dest;
    filled[dest] += idxs.size();
  }
  return split_of;
}

struct ExtractJob {
  size_t entry_index;
  int copy;  // 0 = original, >0 = augmented variant
  int split;
};

}  // namespace

SplitDatasets build_dataset(const DatasetManifest& manifest, const FeatureConfig& config,
                            const AugmentPlan& plan, const SignalProvider& provider,
                            int threads) {
  if (manifest.entries.empty()) throw DataError("manifest is empty");
  bool has_pos = false, has_neg = false;
  for (const auto& e : manifest.entries) (e.label ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg) throw DataError("manifest must contain both classes");

  const std::vector<int> split_of = assign_splits(manifest);

  // Job list: per entry, the original plus its split-local augmented copies.
  std::vector<ExtractJob> jobs;
  for (size_t i = 0; i < manifest.entries.size(); ++i) {
    const auto& e = manifest.entries[i];
    int copies = 0;
    if (plan.enabled) {
      if (config.mode == FeatureMode::kMfcc) {
        copies = e.label == 1 ? plan.positive_waveform_copies : 0;
      } else {
        // Mel path: [pitched original] + SpecAugment copies per base.
        const int bases = e.label == 1 ? 2 : 1;
        const int sa = e.label == 1 ? plan.positive_specaugment_copies
                                    : plan.negative_specaugment_copies;
        copies = (bases - 1) + bases * sa;
      }
    }
    for (int c = 0; c <= copies; ++c) jobs.push_back({i, c, split_of[i]});
  }

  std::vector<Tensor> features(jobs.size());
  std::vector<char> keep(jobs.size(), 1);

  auto extract = [&](size_t ji) {
    const ExtractJob& job = jobs[ji];
    const auto& entry = manifest.entries[job.entry_index];
    AudioSignal sig = provider(entry.id);
    if (sig.sample_rate != kCanonicalSampleRate) {
      sig = resample_linear(sig, kCanonicalSampleRate);
    }
    if (rms(sig) < kSilenceRms) {
      keep[ji] = 0;  // silent recording
      return;
    }
    Rng rng(Rng::derive(plan.seed, job.entry_index * 64 + static_cast<size_t>(job.copy)));
    if (config.mode == FeatureMode::kMfcc) {
      if (job.copy > 0) {
        sig = augment_waveform(sig, job.copy % 2 == 1 ? plan.waveform_a : plan.waveform_b, rng);
      }
      sig = pad_or_trim(sig, config.mfcc.target_len, PadPolicy::kEnd);
      features[ji] = mfcc(sig, config.mfcc);
    } else {
      const auto& mc = config.melspec;
      // copy layout for positives: 0 original, 1 pitched,
      // 2..1+sa original+SA, 2+sa..1+2*sa pitched+SA.
      // negatives: 0 original, 1..sa original+SA.
      bool pitched = false;
      int sa_copy = 0;
      if (entry.label == 1) {
        const int sa = plan.positive_specaugment_copies;
        if (job.copy == 1) {
          pitched = true;
        } else if (job.copy >= 2) {
          const int k = job.copy - 2;
          pitched = k >= sa;
          sa_copy = 1 + (k % std::max(1, sa));
        }
      } else {
        sa_copy = job.copy;
      }
      if (pitched) sig = pitch_shift(sig, plan.pitch_steps);
      sig = pad_or_trim(sig, mc.target_len, PadPolicy::kSplit);
      Tensor mel = mel_spectrogram_db(sig, mc.n_fft, mc.hop, mc.n_mels, mc.fmax, mc.center,
                                      mc.top_db);
      if (sa_copy > 0) mel = spec_augment(mel, plan.f_param, plan.t_param, rng);
      features[ji] = resize_normalize(mel, mc.out_h, mc.out_w, mc.channels);
    }
  };
  parallel_for(jobs.size(), threads, extract);

  SplitDatasets out;
  Dataset* sets[3] = {&out.train, &out.val, &out.test};
  for (size_t ji = 0; ji < jobs.size(); ++ji) {
    if (!keep[ji]) continue;
    const ExtractJob& job = jobs[ji];
    sets[job.split]->add(std::move(features[ji]),
                         static_cast<float>(manifest.entries[job.entry_index].label));
  }
  return out;
}

SignalProvider SyntheticDataset::provider() const {
  const auto* signals_ptr = &signals;
  return [signals_ptr](const std::string& id) -> AudioSignal {
    auto it = signals_ptr->find(id);
    if (it == signals_ptr->end()) throw DataError("unknown synthetic signal '" + id + "'");
    return it->second;
  };
}

SyntheticDataset generate_synthetic_dataset(int n, uint64_t seed) {
  if (n < 8) throw ParamError("synthetic dataset needs n >= 8");
  SyntheticDataset out;
  out.manifest.seed = seed;
  const double sr = kCanonicalSampleRate;

  for (int i = 0; i < n; ++i) {
    const int label = i % 2;
    Rng rng(Rng::derive(seed, 100 + static_cast<uint64_t>(i)));

    const double dur_s = rng.uniform(1.5, 3.0);
    const auto len = static_cast<size_t>(std::llround(dur_s * sr));
    std::vector<float> x(len, 0.0f);

    // Band-limited noise: a bank of random low-frequency sinusoids.
    constexpr int kComponents = 24;
    for (int k = 0; k < kComponents; ++k) {
      const double f = rng.uniform(60.0, 1000.0);
      const double phase = rng.uniform(0.0, 2.0 * M_PI);
      const double amp = rng.uniform(0.4, 1.0);
      const double w = 2.0 * M_PI * f / sr;
      for (size_t t = 0; t < len; ++t) {
        x[t] += static_cast<float>(amp * std::sin(w * static_cast<double>(t) + phase));
      }
    }
    double acc = 0.0;
    for (float v : x) acc += static_cast<double>(v) * v;
    const double noise_rms = std::sqrt(acc / static_cast<double>(len));
    const auto norm = static_cast<float>(0.08 / std::max(1e-9, noise_rms));
    for (auto& v : x) v *= norm;

    if (label == 1) {
      // Cough-like transients: exponentially decaying high-frequency bursts.
      const int bursts = rng.uniform_int(2, 4);
      for (int b = 0; b < bursts; ++b) {
        const double t0 = rng.uniform(0.05, std::max(0.06, dur_s - 0.2));
        const double f = rng.uniform(1500.0, 3000.0);
        const double tau = rng.uniform(0.02, 0.05);
        const double amp = rng.uniform(0.25, 0.4);
        const auto start = static_cast<size_t>(t0 * sr);
        const auto burst_len = static_cast<size_t>(0.12 * sr);
        const double w = 2.0 * M_PI * f / sr;
        for (size_t t = start; t < std::min(len, start + burst_len); ++t) {
          const double dt = static_cast<double>(t - start);
          x[t] += static_cast<float>(amp * std::exp(-dt / (tau * sr)) * std::sin(w * dt));
        }
      }
    }
    for (auto& v : x) v = std::clamp(v, -1.0f, 1.0f);

    char id[32];
    std::snprintf(id, sizeof(id), "synth%05d", i);
    out.manifest.entries.push_back({id, label, id, ""});
    out.signals.emplace(id, AudioSignal{std::move(x), sr});
  }
  return out;
}

}  // namespace edgepress
