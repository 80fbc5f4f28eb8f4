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
#include <complex>

#include "edgepress/errors.hpp"
#include "edgepress/features.hpp"

namespace edgepress {

namespace {

constexpr int kStretchFft = 2048;
constexpr int kStretchHop = 512;

void clamp_unit(AudioSignal& s) {
  for (auto& v : s.samples) v = std::clamp(v, -1.0f, 1.0f);
}

double wrap_pi(double x) {
  return x - 2.0 * M_PI * std::round(x / (2.0 * M_PI));
}

}  // namespace

Tensor spec_augment(const Tensor& mel_db, int f_param, int t_param, Rng& rng) {
  if (mel_db.rank() != 2) throw ShapeError("spec_augment expects a 2-D matrix");
  const int n_mels = mel_db.dim(0), frames = mel_db.dim(1);
  if (f_param < 0 || f_param >= n_mels) {
    throw ParamError("spec_augment: f_param must be in [0, n_mels)");
  }
  if (t_param < 0 || t_param >= frames) {
    throw ParamError("spec_augment: t_param must be in [0, frames)");
  }
  double mean = 0.0;
  for (float v : mel_db.vec()) mean += v;
  mean /= static_cast<double>(mel_db.size());
  const auto fill = static_cast<float>(mean);

  Tensor out = mel_db;
  const int f = rng.uniform_int(0, f_param);
  const int f0 = rng.uniform_int(0, n_mels - f);
  const int t = rng.uniform_int(0, t_param);
  const int t0 = rng.uniform_int(0, frames - t);
  for (int m = f0; m < f0 + f; ++m) {
    for (int c = 0; c < frames; ++c) out.at(m, c) = fill;
  }
  for (int m = 0; m < n_mels; ++m) {
    for (int c = t0; c < t0 + t; ++c) out.at(m, c) = fill;
  }
  return out;
}

AudioSignal time_stretch(const AudioSignal& signal, double rate) {
  if (rate <= 0.0) throw ParamError("time_stretch: rate must be positive");
  if (signal.samples.empty()) return signal;
  if (rate == 1.0) return signal;

  const ComplexMatrix spec = stft(signal, kStretchFft, kStretchHop, /*center=*/true);
  const int bins = spec.bins;

  // Output frame positions step through the input spectrogram at `rate`.
  std::vector<double> steps;
  for (double t = 0.0; t < static_cast<double>(spec.frames); t += rate) steps.push_back(t);

  ComplexMatrix out;
  out.bins = bins;
  out.frames = static_cast<int>(steps.size());
  out.data.resize(static_cast<size_t>(bins) * out.frames);

  std::vector<double> phase_acc(bins), phi_advance(bins);
  for (int k = 0; k < bins; ++k) {
    phase_acc[k] = std::arg(std::complex<double>(spec.at(k, 0).real(), spec.at(k, 0).imag()));
    phi_advance[k] = 2.0 * M_PI * kStretchHop * static_cast<double>(k) / kStretchFft;
  }

  for (size_t s = 0; s < steps.size(); ++s) {
    const double t = steps[s];
    const int ti = static_cast<int>(t);
    const double frac = t - ti;
    for (int k = 0; k < bins; ++k) {
      const std::complex<double> c0(spec.at(k, ti).real(), spec.at(k, ti).imag());
      const std::complex<double> c1 =
          ti + 1 < spec.frames
              ? std::complex<double>(spec.at(k, ti + 1).real(), spec.at(k, ti + 1).imag())
              : std::complex<double>(0.0, 0.0);
      const double mag = (1.0 - frac) * std::abs(c0) + frac * std::abs(c1);
      out.at(k, static_cast<int>(s)) = {
          static_cast<float>(mag * std::cos(phase_acc[k])),
          static_cast<float>(mag * std::sin(phase_acc[k]))};
      const double dphase = wrap_pi(std::arg(c1) - std::arg(c0) - phi_advance[k]);
      phase_acc[k] += phi_advance[k] + dphase;
    }
  }

  const auto out_len = static_cast<size_t>(
      std::llround(static_cast<double>(signal.samples.size()) / rate));
  AudioSignal stretched =
      istft(out, kStretchFft, kStretchHop, /*center=*/true, out_len, signal.sample_rate);
  clamp_unit(stretched);
  return stretched;
}

AudioSignal pitch_shift(const AudioSignal& signal, int n_steps) {
  if (std::abs(n_steps) > 12) throw ParamError("pitch_shift: |n_steps| must be <= 12");
  if (n_steps == 0 || signal.samples.empty()) return signal;
  const double rate = std::pow(2.0, -static_cast<double>(n_steps) / 12.0);

  // Stretch (pitch preserved), then resample back so the frequency axis
  // scales by 2^(n_steps/12) while the length is preserved.
  AudioSignal stretched = time_stretch(signal, rate);
  stretched.sample_rate = signal.sample_rate / rate;
  AudioSignal shifted = resample_linear(stretched, signal.sample_rate);
  shifted.samples.resize(signal.samples.size(), 0.0f);
  clamp_unit(shifted);
  return shifted;
}

AudioSignal augment_waveform(const AudioSignal& signal, const WaveformAugmentParams& params,
                             Rng& rng) {
  AudioSignal out = signal;
  if (params.time_stretch) {
    if (params.stretch_min <= 0.0 || params.stretch_min > params.stretch_max) {
      throw ParamError("augment: invalid stretch range");
    }
    const double rate = rng.uniform(params.stretch_min, params.stretch_max);
    out = time_stretch(out, rate);
  }
  if (params.shift) {
    if (params.shift_min > params.shift_max || std::fabs(params.shift_min) > 1.0 ||
        std::fabs(params.shift_max) > 1.0) {
      throw ParamError("augment: shift fraction must lie in [-1,1]");
    }
    const double frac = rng.uniform(params.shift_min, params.shift_max);
    const auto n = static_cast<long>(out.samples.size());
    if (n > 0) {
      long k = static_cast<long>(std::llround(frac * static_cast<double>(n))) % n;
      if (k < 0) k += n;
      std::rotate(out.samples.begin(), out.samples.end() - k, out.samples.end());
    }
  }
  if (params.gain) {
    if (params.gain_db_min > params.gain_db_max) {
      throw ParamError("augment: invalid gain range");
    }
    const double db = rng.uniform(params.gain_db_min, params.gain_db_max);
    const auto scale = static_cast<float>(std::pow(10.0, db / 20.0));
    for (auto& v : out.samples) v *= scale;
  }
  if (params.trim) {
    if (params.trim_top_db <= 0.0) throw ParamError("augment: trim_top_db must be positive");
    float peak = 0.0f;
    for (float v : out.samples) peak = std::max(peak, std::fabs(v));
    const auto thresh = static_cast<float>(peak * std::pow(10.0, -params.trim_top_db / 20.0));
    size_t first = 0, last = out.samples.size();
    while (first < last && std::fabs(out.samples[first]) <= thresh) ++first;
    while (last > first && std::fabs(out.samples[last - 1]) <= thresh) --last;
    if (first < last) {
      out.samples = std::vector<float>(out.samples.begin() + first, out.samples.begin() + last);
    }
    // else: nothing above threshold, keep the signal as-is
  }
  clamp_unit(out);
  return out;
}

Tensor resize_normalize(const Tensor& mel_db, int out_h, int out_w, int channels) {
  if (mel_db.rank() != 2 || mel_db.dim(0) < 2 || mel_db.dim(1) < 2) {
    throw ShapeError("resize_normalize needs at least a 2x2 matrix");
  }
  if (out_h < 1 || out_w < 1 || channels < 1) {
    throw ParamError("resize_normalize: output dims must be positive");
  }
  const int in_h = mel_db.dim(0), in_w = mel_db.dim(1);

  float lo = mel_db[0], hi = mel_db[0];
  for (float v : mel_db.vec()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  Tensor norm({in_h, in_w});
  if (hi == lo) {
    norm.fill(0.5f);
  } else {
    const float inv = 1.0f / (hi - lo);
    for (size_t i = 0; i < norm.size(); ++i) norm[i] = (mel_db[i] - lo) * inv;
  }

  // Bilinear with the half-pixel convention.
  Tensor out({out_h, out_w, channels});
  const double sy = static_cast<double>(in_h) / out_h;
  const double sx = static_cast<double>(in_w) / out_w;
  for (int y = 0; y < out_h; ++y) {
    const double src_y = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(in_h - 1));
    const int y0 = static_cast<int>(src_y);
    const int y1 = std::min(y0 + 1, in_h - 1);
    const double fy = src_y - y0;
    for (int x = 0; x < out_w; ++x) {
      const double src_x = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(in_w - 1));
      const int x0 = static_cast<int>(src_x);
      const int x1 = std::min(x0 + 1, in_w - 1);
      const double fx = src_x - x0;
      const double v = (1 - fy) * ((1 - fx) * norm.at(y0, x0) + fx * norm.at(y0, x1)) +
                       fy * ((1 - fx) * norm.at(y1, x0) + fx * norm.at(y1, x1));
      for (int c = 0; c < channels; ++c) out.at(y, x, c) = static_cast<float>(v);
    }
  }
  return out;
}

}  // namespace edgepress
