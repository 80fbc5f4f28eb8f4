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
#include <cstring>
#include <fstream>

#include "edgepress/errors.hpp"
#include "edgepress/features.hpp"

namespace edgepress {

namespace {

uint32_t rd_u32(const std::vector<uint8_t>& b, size_t off) {
  if (off + 4 > b.size()) throw ParseError("truncated WAV", off);
  return static_cast<uint32_t>(b[off]) | (static_cast<uint32_t>(b[off + 1]) << 8) |
         (static_cast<uint32_t>(b[off + 2]) << 16) | (static_cast<uint32_t>(b[off + 3]) << 24);
}

uint16_t rd_u16(const std::vector<uint8_t>& b, size_t off) {
  if (off + 2 > b.size()) throw ParseError("truncated WAV", off);
  return static_cast<uint16_t>(b[off] | (b[off + 1] << 8));
}

bool tag_is(const std::vector<uint8_t>& b, size_t off, const char* tag) {
  return off + 4 <= b.size() && std::memcmp(b.data() + off, tag, 4) == 0;
}

}  // namespace

AudioSignal parse_wav(const std::vector<uint8_t>& bytes) {
  if (bytes.size() < 12 || !tag_is(bytes, 0, "RIFF")) throw ParseError("not a RIFF file", 0);
  if (!tag_is(bytes, 8, "WAVE")) throw ParseError("not a WAVE file", 8);

  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t sample_rate = 0;
  bool have_fmt = false;
  size_t data_off = 0, data_len = 0;

  size_t off = 12;
  while (off + 8 <= bytes.size()) {
    const size_t chunk_head = off;
    const uint32_t chunk_len = rd_u32(bytes, off + 4);
    const size_t body = off + 8;
    if (body + chunk_len > bytes.size()) {
      throw ParseError("chunk extends past end of file", chunk_head);
    }
    if (tag_is(bytes, off, "fmt ")) {
      if (chunk_len < 16) throw ParseError("fmt chunk too short", chunk_head);
      format = rd_u16(bytes, body);
      channels = rd_u16(bytes, body + 2);
      sample_rate = rd_u32(bytes, body + 4);
      bits = rd_u16(bytes, body + 14);
      have_fmt = true;
    } else if (tag_is(bytes, off, "data")) {
      data_off = body;
      data_len = chunk_len;
    }
    off = body + chunk_len + (chunk_len & 1);  // chunks are word-aligned
  }
  if (!have_fmt) throw ParseError("missing fmt chunk", bytes.size());
  if (data_off == 0) throw ParseError("missing data chunk", bytes.size());
  if (format != 1) {
    throw ParseError("unsupported codec (only PCM is supported), format tag " +
                         std::to_string(format),
                     data_off);
  }
  if (bits != 16) {
    throw ParseError("unsupported sample width " + std::to_string(bits) + " (need 16-bit PCM)",
                     data_off);
  }
  if (channels != 1 && channels != 2) {
    throw ParseError("unsupported channel count " + std::to_string(channels), data_off);
  }
  if (sample_rate == 0) throw ParseError("zero sample rate", data_off);

  const size_t frame_bytes = 2 * channels;
  const size_t frames = data_len / frame_bytes;
  AudioSignal out;
  out.sample_rate = sample_rate;
  out.samples.resize(frames);
  for (size_t i = 0; i < frames; ++i) {
    float acc = 0.0f;
    for (int c = 0; c < channels; ++c) {
      const size_t p = data_off + i * frame_bytes + 2 * c;
      const auto raw = static_cast<int16_t>(bytes[p] | (bytes[p + 1] << 8));
      acc += static_cast<float>(raw) / 32768.0f;
    }
    out.samples[i] = acc / static_cast<float>(channels);
  }
  return out;
}

AudioSignal load_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open WAV '" + path + "'");
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  try {
    return parse_wav(bytes);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

std::vector<uint8_t> encode_wav_pcm16(const AudioSignal& signal) {
  const auto n = static_cast<uint32_t>(signal.samples.size());
  const auto sr = static_cast<uint32_t>(std::lround(signal.sample_rate));
  const uint32_t data_len = n * 2;
  std::vector<uint8_t> out;
  out.reserve(44 + data_len);
  auto u16 = [&](uint16_t v) {
    out.push_back(static_cast<uint8_t>(v & 0xFF));
    out.push_back(static_cast<uint8_t>(v >> 8));
  };
  auto u32 = [&](uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xFF));
  };
  auto tag = [&](const char* t) { out.insert(out.end(), t, t + 4); };

  tag("RIFF");
  u32(36 + data_len);
  tag("WAVE");
  tag("fmt ");
  u32(16);
  u16(1);  // PCM
  u16(1);  // mono
  u32(sr);
  u32(sr * 2);  // byte rate
  u16(2);       // block align
  u16(16);      // bits
  tag("data");
  u32(data_len);
  for (float v : signal.samples) {
    const float clamped = std::clamp(v, -1.0f, 1.0f);
    const auto q = static_cast<int16_t>(std::lround(clamped * 32767.0f));
    u16(static_cast<uint16_t>(q));
  }
  return out;
}

void write_wav(const std::string& path, const AudioSignal& signal) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write WAV '" + path + "'");
  const auto bytes = encode_wav_pcm16(signal);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to '" + path + "'");
}

}  // namespace edgepress
