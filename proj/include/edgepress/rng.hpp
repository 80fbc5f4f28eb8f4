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

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace edgepress {

// mt19937 with hand-rolled draw helpers. std::*_distribution output is
// implementation-defined, which would break byte-identical reruns across
// standard libraries, so we only use the raw generator.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(static_cast<uint32_t>(seed ^ (seed >> 32))) {}

  uint32_t next_u32() { return gen_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() {
    const uint64_t hi = gen_();
    const uint64_t lo = gen_();
    return static_cast<double>(((hi << 32) | lo) >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  float uniform_f(float lo, float hi) {
    return static_cast<float>(uniform(lo, hi));
  }

  // Inclusive range [lo, hi].
  int uniform_int(int lo, int hi) {
    const auto span = static_cast<uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(static_cast<uint64_t>(uniform() * static_cast<double>(span)) % span);
  }

  // Box-Muller; consumes two uniforms per pair.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  // Fisher-Yates over index vectors.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      const size_t j = static_cast<size_t>(uniform_int(0, static_cast<int>(i) - 1));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Derive an independent stream, e.g. per worker or per pipeline stage.
  static uint64_t derive(uint64_t seed, uint64_t stream) {
    uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace edgepress
