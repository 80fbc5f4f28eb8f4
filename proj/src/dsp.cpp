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
#include "edgepress/ops.hpp"

namespace edgepress {

namespace {

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

// Iterative radix-2 Cooley-Tukey; size must be a power of two.
void fft_inplace(std::vector<std::complex<double>>& a, bool inverse) {
  const size_t n = a.size();
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? 2.0 : -2.0) * M_PI / static_cast<double>(len);
    const std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
  if (inverse) {
    for (auto& v : a) v /= static_cast<double>(n);
  }
}

// Reflect index (no edge repeat), mirroring until in range.
size_t reflect_index(long i, long n) {
  if (n == 1) return 0;
  const long period = 2 * (n - 1);
  long m = i % period;
  if (m < 0) m += period;
  if (m >= n) m = period - m;
  return static_cast<size_t>(m);
}

std::vector<double> hann_periodic(int n) {
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * static_cast<double>(i) / n);
  }
  return w;
}

double hz_to_mel_slaney(double hz) {
  constexpr double f_sp = 200.0 / 3.0;
  constexpr double min_log_hz = 1000.0;
  constexpr double min_log_mel = min_log_hz / f_sp;
  const double logstep = std::log(6.4) / 27.0;
  if (hz < min_log_hz) return hz / f_sp;
  return min_log_mel + std::log(hz / min_log_hz) / logstep;
}

double mel_to_hz_slaney(double mel) {
  constexpr double f_sp = 200.0 / 3.0;
  constexpr double min_log_hz = 1000.0;
  constexpr double min_log_mel = min_log_hz / f_sp;
  const double logstep = std::log(6.4) / 27.0;
  if (mel < min_log_mel) return mel * f_sp;
  return min_log_hz * std::exp(logstep * (mel - min_log_mel));
}

}  // namespace

AudioSignal resample_linear(const AudioSignal& signal, double target_rate) {
  if (target_rate <= 0.0) throw ParamError("target_rate must be positive");
  if (signal.sample_rate == target_rate || signal.samples.empty()) {
    AudioSignal out = signal;
    out.sample_rate = target_rate > 0 ? target_rate : signal.sample_rate;
    return out;
  }
  const double ratio = target_rate / signal.sample_rate;
  const auto out_len = static_cast<size_t>(
      std::llround(static_cast<double>(signal.samples.size()) * ratio));
  AudioSignal out;
  out.sample_rate = target_rate;
  out.samples.resize(out_len);
  const auto n = static_cast<long>(signal.samples.size());
  for (size_t i = 0; i < out_len; ++i) {
    const double pos = static_cast<double>(i) / ratio;
    const auto i0 = static_cast<long>(std::floor(pos));
    const double frac = pos - static_cast<double>(i0);
    const float a = signal.samples[std::min<long>(i0, n - 1)];
    const float b = signal.samples[std::min<long>(i0 + 1, n - 1)];
    out.samples[i] = static_cast<float>(a + (b - a) * frac);
  }
  return out;
}

AudioSignal pad_or_trim(const AudioSignal& signal, size_t target_len, PadPolicy policy) {
  if (target_len == 0) throw ParamError("target_len must be positive");
  AudioSignal out;
  out.sample_rate = signal.sample_rate;
  const size_t n = signal.samples.size();
  if (n == target_len) {
    out.samples = signal.samples;
    return out;
  }
  out.samples.assign(target_len, 0.0f);
  if (n > target_len) {
    // Both paths trim from the tail.
    std::copy_n(signal.samples.begin(), target_len, out.samples.begin());
  } else {
    if (policy == PadPolicy::kEnd) {
      std::copy(signal.samples.begin(), signal.samples.end(), out.samples.begin());
    } else {
      const size_t lead = (target_len - n) / 2;
      std::copy(signal.samples.begin(), signal.samples.end(), out.samples.begin() + lead);
    }
  }
  return out;
}

ComplexMatrix stft(const AudioSignal& signal, int n_fft, int hop, bool center) {
  if (signal.samples.empty()) throw DataError("stft: empty signal");
  if (!is_pow2(n_fft)) throw ParamError("stft: n_fft must be a power of two");
  if (hop < 1 || n_fft < hop) throw ParamError("stft: need n_fft >= hop >= 1");
  const auto len = static_cast<long>(signal.samples.size());
  if (!center && len < n_fft) throw DataError("stft: signal shorter than one frame");

  const int frames = center ? 1 + static_cast<int>(len / hop)
                            : 1 + static_cast<int>((len - n_fft) / hop);
  const int bins = n_fft / 2 + 1;
  const std::vector<double> window = hann_periodic(n_fft);

  ComplexMatrix out;
  out.bins = bins;
  out.frames = frames;
  out.data.resize(static_cast<size_t>(bins) * frames);

  std::vector<std::complex<double>> buf(n_fft);
  const long pad = center ? n_fft / 2 : 0;
  for (int t = 0; t < frames; ++t) {
    const long start = static_cast<long>(t) * hop - pad;
    for (int i = 0; i < n_fft; ++i) {
      const long src = start + i;
      const float v = (src >= 0 && src < len)
                          ? signal.samples[src]
                          : (center ? signal.samples[reflect_index(src, len)] : 0.0f);
      buf[i] = {static_cast<double>(v) * window[i], 0.0};
    }
    fft_inplace(buf, false);
    for (int k = 0; k < bins; ++k) {
      out.at(k, t) = {static_cast<float>(buf[k].real()), static_cast<float>(buf[k].imag())};
    }
  }
  return out;
}

AudioSignal istft(const ComplexMatrix& spec, int n_fft, int hop, bool center, size_t length,
                  double sample_rate) {
  if (!is_pow2(n_fft)) throw ParamError("istft: n_fft must be a power of two");
  const int bins = n_fft / 2 + 1;
  if (spec.bins != bins) throw ShapeError("istft: bins mismatch");
  const std::vector<double> window = hann_periodic(n_fft);

  const size_t padded_len = static_cast<size_t>(spec.frames - 1) * hop + n_fft;
  std::vector<double> acc(padded_len, 0.0);
  std::vector<double> norm(padded_len, 0.0);
  std::vector<std::complex<double>> buf(n_fft);

  for (int t = 0; t < spec.frames; ++t) {
    for (int k = 0; k < bins; ++k) {
      const auto v = spec.at(k, t);
      buf[k] = {static_cast<double>(v.real()), static_cast<double>(v.imag())};
    }
    for (int k = bins; k < n_fft; ++k) buf[k] = std::conj(buf[n_fft - k]);
    fft_inplace(buf, true);
    const size_t base = static_cast<size_t>(t) * hop;
    for (int i = 0; i < n_fft; ++i) {
      acc[base + i] += buf[i].real() * window[i];
      norm[base + i] += window[i] * window[i];
    }
  }

  const size_t lead = center ? static_cast<size_t>(n_fft / 2) : 0;
  AudioSignal out;
  out.sample_rate = sample_rate;
  out.samples.assign(length, 0.0f);
  for (size_t i = 0; i < length; ++i) {
    const size_t j = lead + i;
    if (j < padded_len && norm[j] > 1e-8) {
      out.samples[i] = static_cast<float>(acc[j] / norm[j]);
    }
  }
  return out;
}

Tensor mel_filterbank(double sample_rate, int n_fft, int n_mels, double fmax) {
  if (n_mels < 1) throw ParamError("mel_filterbank: n_mels must be >= 1");
  if (fmax > sample_rate / 2.0 + 1e-9) {
    throw ParamError("mel_filterbank: fmax exceeds Nyquist");
  }
  const int bins = n_fft / 2 + 1;
  Tensor fb({n_mels, bins});

  const double mel_max = hz_to_mel_slaney(fmax);
  std::vector<double> hz_pts(n_mels + 2);
  for (int i = 0; i < n_mels + 2; ++i) {
    hz_pts[i] = mel_to_hz_slaney(mel_max * static_cast<double>(i) / (n_mels + 1));
  }
  for (int m = 0; m < n_mels; ++m) {
    const double f_lo = hz_pts[m], f_mid = hz_pts[m + 1], f_hi = hz_pts[m + 2];
    const double enorm = 2.0 / (f_hi - f_lo);  // Slaney area normalization
    for (int k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / n_fft;
      const double up = (f - f_lo) / std::max(1e-12, f_mid - f_lo);
      const double down = (f_hi - f) / std::max(1e-12, f_hi - f_mid);
      const double w = std::max(0.0, std::min(up, down));
      fb.at(m, k) = static_cast<float>(w * enorm);
    }
  }
  return fb;
}

Tensor mel_spectrogram_db(const AudioSignal& signal, int n_fft, int hop, int n_mels,
                          double fmax, bool center, double top_db) {
  const ComplexMatrix spec = stft(signal, n_fft, hop, center);
  Tensor power({spec.bins, spec.frames});
  for (int k = 0; k < spec.bins; ++k) {
    for (int t = 0; t < spec.frames; ++t) {
      const auto v = spec.at(k, t);
      power.at(k, t) = v.real() * v.real() + v.imag() * v.imag();
    }
  }
  const Tensor fb = mel_filterbank(signal.sample_rate, n_fft, n_mels, fmax);
  Tensor mel = matmul(fb, power);

  // Power to dB, ref = global max, floored at max - top_db. A small power
  // floor keeps all-zero signals finite.
  constexpr double amin = 1e-10;
  double ref = amin;
  for (float v : mel.vec()) ref = std::max(ref, static_cast<double>(v));
  const double ref_db = 10.0 * std::log10(ref);
  for (auto& v : mel.vec()) {
    const double db = 10.0 * std::log10(std::max(amin, static_cast<double>(v))) - ref_db;
    v = static_cast<float>(std::max(db, -top_db));
  }
  return mel;
}

Tensor mfcc(const AudioSignal& signal, const MfccConfig& config) {
  if (signal.samples.size() != config.target_len) {
    throw ShapeError("mfcc: expected " + std::to_string(config.target_len) + " samples, got " +
                     std::to_string(signal.samples.size()));
  }
  const double fmax = signal.sample_rate / 2.0;
  Tensor mel_db = mel_spectrogram_db(signal, config.n_fft, config.hop, config.n_mels, fmax,
                                     /*center=*/true, /*top_db=*/80.0);
  const int frames = mel_db.dim(1);
  const int n = config.n_mels;

  // Orthonormal DCT-II along the mel axis.
  std::vector<double> dct(static_cast<size_t>(config.n_mfcc) * n);
  const double a0 = std::sqrt(1.0 / n);
  const double ak = std::sqrt(2.0 / n);
  for (int k = 0; k < config.n_mfcc; ++k) {
    const double scale = k == 0 ? a0 : ak;
    for (int m = 0; m < n; ++m) {
      dct[static_cast<size_t>(k) * n + m] =
          scale * std::cos(M_PI * k * (2.0 * m + 1.0) / (2.0 * n));
    }
  }
  Tensor out({config.n_mfcc, frames});
  for (int k = 0; k < config.n_mfcc; ++k) {
    const double* row = dct.data() + static_cast<size_t>(k) * n;
    for (int t = 0; t < frames; ++t) {
      double acc = 0.0;
      for (int m = 0; m < n; ++m) acc += row[m] * mel_db.at(m, t);
      out.at(k, t) = static_cast<float>(acc);
    }
  }
  return out;
}

}  // namespace edgepress
