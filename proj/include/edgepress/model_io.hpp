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
#include <utility>
#include <vector>

#include "edgepress/model.hpp"
#include "edgepress/quantization.hpp"
#include "edgepress/sparse.hpp"

namespace edgepress {

// .eprs container: "EPRS" magic, u16 version, u16 flags, length-prefixed
// config JSON, parameter records (dtype f32 / u8q / u16q / csr), trailing
// CRC32. Little-endian throughout; layout documented in docs/format.md.

inline constexpr uint16_t kContainerVersion = 1;

enum ContainerFlags : uint16_t {
  kFlagModel = 1,
  kFlagQuantized = 2,
  kFlagTensorMap = 4,
  kFlagSparse = 8,
};

enum class RecordDtype : uint8_t { kF32 = 0, kU8Q = 1, kU16Q = 2, kCsr = 3 };

// Deterministic: the same model always produces identical bytes. Pruned
// zeros are stored as literal zero floats so the size win comes from the
// compressor, not the encoding.
std::vector<uint8_t> serialize(const Model& model);
std::vector<uint8_t> serialize(const QuantizedModel& model);
// Converted dense kernels are stored as CSR records; everything else f32.
std::vector<uint8_t> serialize(const SparseModel& model);

struct LoadedContainer {
  enum class Kind { kModel, kQuantizedModel, kTensorMap };
  Kind kind = Kind::kModel;
  Model model;            // kModel (csr kernels are densified on load)
  QuantizedModel qmodel;  // kQuantizedModel
  std::vector<std::pair<std::string, Tensor>> tensors;  // kTensorMap
};

// Throws ParseError (with byte offset / record name) on bad magic, version,
// CRC mismatch, or truncation.
LoadedContainer deserialize(const std::vector<uint8_t>& bytes);

// Size after DEFLATE at fixed level 6 — the storage metric.
size_t compressed_size(const std::vector<uint8_t>& bytes);

std::vector<uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, const std::vector<uint8_t>& bytes);

// Generic tensor-map container (feature caches and the like).
std::vector<uint8_t> serialize_tensor_map(
    const std::vector<std::pair<std::string, Tensor>>& tensors);

// Feature-cache convenience on top of the tensor map.
void save_dataset(const std::string& path, const Dataset& dataset);
Dataset load_dataset(const std::string& path);

}  // namespace edgepress
