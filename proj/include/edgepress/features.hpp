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

#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "edgepress/model.hpp"
#include "edgepress/rng.hpp"
#include "edgepress/tensor.hpp"

namespace edgepress {

inline constexpr double kCanonicalSampleRate = 22050.0;

struct AudioSignal {
  std::vector<float> samples;  // in [-1, 1]
  double sample_rate = kCanonicalSampleRate;

  size_t size() const { return samples.size(); }
  double duration_s() const { return static_cast<double>(samples.size()) / sample_rate; }
};

// ---- WAV I/O --------------------------------------------------------------

// RIFF/WAVE PCM16, mono or stereo (stereo is averaged to mono). int16
// samples scale by 1/32768. Parse errors carry the byte offset.
AudioSignal parse_wav(const std::vector<uint8_t>& bytes);
AudioSignal load_wav(const std::string& path);
std::vector<uint8_t> encode_wav_pcm16(const AudioSignal& signal);
void write_wav(const std::string& path, const AudioSignal& signal);

// ---- DSP ------------------------------------------------------------------

// Linear interpolation; output length = round(len * target / source).
AudioSignal resample_linear(const AudioSignal& signal, double target_rate);

enum class PadPolicy {
  kEnd,    // zeros appended (MFCC path)
  kSplit,  // zeros split between beginning and end (mel path)
};
AudioSignal pad_or_trim(const AudioSignal& signal, size_t target_len, PadPolicy policy);

// Row-major [bins x frames], bins = n_fft/2 + 1.
struct ComplexMatrix {
  int bins = 0, frames = 0;
  std::vector<std::complex<float>> data;

  std::complex<float>& at(int k, int t) { return data[static_cast<size_t>(k) * frames + t]; }
  std::complex<float> at(int k, int t) const {
    return data[static_cast<size_t>(k) * frames + t];
  }
};

// Periodic Hann window; n_fft must be a power of two. center=true
// reflect-pads n_fft/2 per side, giving frames = 1 + floor(len/hop).
ComplexMatrix stft(const AudioSignal& signal, int n_fft, int hop, bool center);

// Overlap-add inverse with window-square normalization; output trimmed or
// zero-padded to `length`.
AudioSignal istft(const ComplexMatrix& spec, int n_fft, int hop, bool center, size_t length,
                  double sample_rate);

// Slaney-style triangular filters, area-normalized: [n_mels x (n_fft/2+1)].
Tensor mel_filterbank(double sample_rate, int n_fft, int n_mels, double fmax);

// Power spectrogram -> mel -> 10*log10 relative to the global max, floored
// at max - top_db.
Tensor mel_spectrogram_db(const AudioSignal& signal, int n_fft, int hop, int n_mels,
                          double fmax, bool center, double top_db);

struct MfccConfig {
  int n_mfcc = 15;
  int n_fft = 2048;
  int hop = 512;
  size_t target_len = 154350;  // 7 s at 22050 Hz
  int n_mels = 128;
};

// Log-mel per frame -> orthonormal DCT-II -> first n_mfcc rows. The signal
// must already be padded/trimmed to target_len.
Tensor mfcc(const AudioSignal& signal, const MfccConfig& config);

struct MelSpecConfig {
  int n_mels = 128;
  int hop = 128;
  double fmax = 8000.0;
  int n_fft = 512;
  bool center = true;
  double top_db = 80.0;
  size_t target_len = 156027;  // 7.07 s at 22050 Hz
  int out_h = 39;
  int out_w = 88;
  int channels = 3;
};

// ---- Augmentation ---------------------------------------------------------

// One frequency band (width ~ U[0, f_param]) and one time band
// (width ~ U[0, t_param]) replaced by the pre-mask matrix mean.
Tensor spec_augment(const Tensor& mel_db, int f_param, int t_param, Rng& rng);

// Phase-vocoder stretch: same pitch, duration / rate.
AudioSignal time_stretch(const AudioSignal& signal, double rate);

// Length-preserving; dominant frequency scales by 2^(n_steps/12).
AudioSignal pitch_shift(const AudioSignal& signal, int n_steps);

struct WaveformAugmentParams {
  bool time_stretch = false;
  double stretch_min = 0.9, stretch_max = 1.1;
  bool shift = false;
  double shift_min = -0.1, shift_max = 0.1;  // fraction of length, circular
  bool gain = false;
  double gain_db_min = -6.0, gain_db_max = 6.0;
  bool trim = false;
  double trim_top_db = 30.0;
};

// Ops applied in declaration order (stretch, shift, gain, trim); parameters
// drawn from rng only for enabled ops, so results are seed-deterministic.
AudioSignal augment_waveform(const AudioSignal& signal, const WaveformAugmentParams& params,
                             Rng& rng);

// Min-max normalize to [0,1] (constant input -> 0.5), bilinear resize
// (half-pixel convention), replicate across channels.
Tensor resize_normalize(const Tensor& mel_db, int out_h, int out_w, int channels);

// ---- Dataset assembly -----------------------------------------------------

enum class FeatureMode { kMfcc, kMelSpec };

struct FeatureConfig {
  FeatureMode mode = FeatureMode::kMfcc;
  MfccConfig mfcc;
  MelSpecConfig melspec;
};

struct ManifestEntry {
  std::string id;  // file path or synthetic id
  int label = 0;   // {0,1}
  std::string source_id;
  std::string split;  // "", "train", "val" or "test"; "" = assigned by ratio
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  double ratios[3] = {0.70, 0.15, 0.15};  // train/val/test, sum to 1
  uint64_t seed = 0;
};

// CSV with header path,label,source_id[,split].
DatasetManifest read_manifest_csv(const std::string& path);
void write_manifest_csv(const std::string& path, const DatasetManifest& manifest);

struct AugmentPlan {
  bool enabled = true;
  uint64_t seed = 1;
  // MFCC path: every positive gets two augmented copies.
  int positive_waveform_copies = 2;
  WaveformAugmentParams waveform_a{.shift = true, .gain = true};
  WaveformAugmentParams waveform_b{.time_stretch = true, .gain = true};
  // Mel path: positives are pitch-shifted, then SpecAugment copies are drawn
  // from every base (original and shifted).
  int pitch_steps = -4;
  int f_param = 30, t_param = 30;
  int positive_specaugment_copies = 2;
  int negative_specaugment_copies = 1;

  static AugmentPlan none() {
    AugmentPlan p;
    p.enabled = false;
    return p;
  }
};

using SignalProvider = std::function<AudioSignal(const std::string& id)>;

// Splits by source_recording_id BEFORE any augmentation; a source id that
// appears in two explicit splits raises LeakageError. Recordings with
// RMS < 1e-4 are dropped as silent. threads <= 1 runs sequentially; output
// order is fixed by manifest index either way.
SplitDatasets build_dataset(const DatasetManifest& manifest, const FeatureConfig& config,
                            const AugmentPlan& plan, const SignalProvider& provider,
                            int threads = 1);

struct SyntheticDataset {
  DatasetManifest manifest;
  std::map<std::string, AudioSignal> signals;

  SignalProvider provider() const;
};

// Class 0: band-limited noise (<= 1 kHz). Class 1: the same noise plus 2-4
// decaying bursts with 1.5-3 kHz content. Balanced and seed-deterministic.
SyntheticDataset generate_synthetic_dataset(int n, uint64_t seed);

}  // namespace edgepress
