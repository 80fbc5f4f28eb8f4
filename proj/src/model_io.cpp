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

#include "edgepress/model_io.hpp"

#include <zlib.h>

#include <cstdio>
#include <cstring>
#include <fstream>

#include "edgepress/errors.hpp"

namespace edgepress {

namespace {

constexpr char kMagic[4] = {'E', 'P', 'R', 'S'};
constexpr uint8_t kKindRawTensor = 0xFE;

class ByteWriter {
 public:
  void u8(uint8_t v) { buf_.push_back(v); }
  void u16(uint16_t v) {
    buf_.push_back(static_cast<uint8_t>(v & 0xFF));
    buf_.push_back(static_cast<uint8_t>(v >> 8));
  }
  void u32(uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xFF));
  }
  void f32(float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    u32(bits);
  }
  void bytes(const void* data, size_t n) {
    const auto* p = static_cast<const uint8_t*>(data);
    buf_.insert(buf_.end(), p, p + n);
  }
  void str(const std::string& s) {
    if (s.size() > 0xFFFF) throw ParamError("container string too long");
    u16(static_cast<uint16_t>(s.size()));
    bytes(s.data(), s.size());
  }
  std::vector<uint8_t> finish() {
    const auto crc = static_cast<uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(buf_.data()), static_cast<uInt>(buf_.size())));
    u32(crc);
    return std::move(buf_);
  }

 private:
  std::vector<uint8_t> buf_;
};

class ByteReader {
 public:
  explicit ByteReader(const std::vector<uint8_t>& buf) : buf_(buf) {}

  size_t offset() const { return pos_; }

  void need(size_t n, const std::string& what) {
    if (pos_ + n > buf_.size()) {
      throw ParseError("truncated container while reading " + what, pos_);
    }
  }
  uint8_t u8(const std::string& what) {
    need(1, what);
    return buf_[pos_++];
  }
  uint16_t u16(const std::string& what) {
    need(2, what);
    uint16_t v = static_cast<uint16_t>(buf_[pos_]) | (static_cast<uint16_t>(buf_[pos_ + 1]) << 8);
    pos_ += 2;
    return v;
  }
  uint32_t u32(const std::string& what) {
    need(4, what);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(buf_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  float f32(const std::string& what) {
    const uint32_t bits = u32(what);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }
  std::string str(const std::string& what) {
    const uint16_t n = u16(what);
    need(n, what);
    std::string s(reinterpret_cast<const char*>(buf_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  const uint8_t* raw(size_t n, const std::string& what) {
    need(n, what);
    const uint8_t* p = buf_.data() + pos_;
    pos_ += n;
    return p;
  }

 private:
  const std::vector<uint8_t>& buf_;
  size_t pos_ = 0;
};

void write_header(ByteWriter& w, uint16_t flags, const std::string& config_json) {
  w.bytes(kMagic, 4);
  w.u16(kContainerVersion);
  w.u16(flags);
  w.u32(static_cast<uint32_t>(config_json.size()));
  w.bytes(config_json.data(), config_json.size());
}

void write_shape(ByteWriter& w, const std::vector<int>& shape) {
  w.u8(static_cast<uint8_t>(shape.size()));
  for (int d : shape) w.u32(static_cast<uint32_t>(d));
}

void write_f32_record(ByteWriter& w, const std::string& name, uint8_t kind, const Tensor& t) {
  w.str(name);
  w.u8(kind);
  w.u8(static_cast<uint8_t>(RecordDtype::kF32));
  write_shape(w, t.shape());
  w.bytes(t.data(), t.size() * 4);
}

void write_quant_record(ByteWriter& w, const std::string& name, uint8_t kind,
                        const QuantizedTensor& q) {
  w.str(name);
  w.u8(kind);
  w.u8(static_cast<uint8_t>(q.bits == 8 ? RecordDtype::kU8Q : RecordDtype::kU16Q));
  write_shape(w, q.shape);
  w.f32(q.scale);
  w.u16(static_cast<uint16_t>(q.zero_point));
  if (q.bits == 8) {
    w.bytes(q.q8.data(), q.q8.size());
  } else {
    for (uint16_t v : q.q16) w.u16(v);
  }
}

void write_csr_record(ByteWriter& w, const std::string& name, uint8_t kind, const CsrMatrix& m) {
  w.str(name);
  w.u8(kind);
  w.u8(static_cast<uint8_t>(RecordDtype::kCsr));
  write_shape(w, {m.rows, m.cols});
  w.u32(static_cast<uint32_t>(m.nnz()));
  for (int v : m.row_ptr) w.u32(static_cast<uint32_t>(v));
  for (int v : m.col_idx) w.u32(static_cast<uint32_t>(v));
  w.bytes(m.values.data(), m.values.size() * 4);
}

struct RawRecord {
  std::string name;
  uint8_t kind = 0;
  RecordDtype dtype = RecordDtype::kF32;
  std::vector<int> shape;
  Tensor f32;          // kF32 or densified kCsr
  QuantizedTensor quant;
};

std::vector<RawRecord> read_records(ByteReader& r, uint32_t count) {
  std::vector<RawRecord> records;
  records.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    RawRecord rec;
    rec.name = r.str("record name");
    const std::string ctx = "record '" + rec.name + "'";
    rec.kind = r.u8(ctx);
    const uint8_t dtype = r.u8(ctx);
    if (dtype > 3) throw ParseError("unknown dtype tag in " + ctx, r.offset());
    rec.dtype = static_cast<RecordDtype>(dtype);
    const uint8_t ndim = r.u8(ctx);
    for (int d = 0; d < ndim; ++d) rec.shape.push_back(static_cast<int>(r.u32(ctx)));
    const size_t numel = shape_numel(rec.shape);
    switch (rec.dtype) {
      case RecordDtype::kF32: {
        const uint8_t* p = r.raw(numel * 4, "payload of " + ctx);
        std::vector<float> data(numel);
        std::memcpy(data.data(), p, numel * 4);
        rec.f32 = Tensor(rec.shape, std::move(data));
        break;
      }
      case RecordDtype::kU8Q:
      case RecordDtype::kU16Q: {
        rec.quant.bits = rec.dtype == RecordDtype::kU8Q ? 8 : 16;
        rec.quant.scale = r.f32(ctx);
        rec.quant.zero_point = r.u16(ctx);
        rec.quant.shape = rec.shape;
        if (rec.quant.bits == 8) {
          const uint8_t* p = r.raw(numel, "payload of " + ctx);
          rec.quant.q8.assign(p, p + numel);
        } else {
          rec.quant.q16.resize(numel);
          for (size_t k = 0; k < numel; ++k) rec.quant.q16[k] = r.u16("payload of " + ctx);
        }
        break;
      }
      case RecordDtype::kCsr: {
        if (rec.shape.size() != 2) throw ParseError("csr record must be 2-D: " + ctx, r.offset());
        CsrMatrix m;
        m.rows = rec.shape[0];
        m.cols = rec.shape[1];
        const uint32_t nnz = r.u32(ctx);
        m.row_ptr.resize(m.rows + 1);
        for (auto& v : m.row_ptr) v = static_cast<int>(r.u32(ctx));
        m.col_idx.resize(nnz);
        for (auto& v : m.col_idx) v = static_cast<int>(r.u32(ctx));
        m.values.resize(nnz);
        const uint8_t* p = r.raw(nnz * 4, "payload of " + ctx);
        std::memcpy(m.values.data(), p, nnz * 4);
        rec.f32 = from_csr(m);
        break;
      }
    }
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace

std::vector<uint8_t> serialize(const Model& model) {
  ByteWriter w;
  write_header(w, kFlagModel, model.config.to_json());
  uint32_t count = 0;
  for (const auto& lp : model.layer_params) count += static_cast<uint32_t>(lp.size());
  w.u32(count);
  for (size_t li = 0; li < model.config.layers.size(); ++li) {
    const auto kind = static_cast<uint8_t>(model.config.layers[li].kind);
    for (const auto& p : model.layer_params[li]) write_f32_record(w, p.name, kind, p.value);
  }
  return w.finish();
}

std::vector<uint8_t> serialize(const QuantizedModel& model) {
  ByteWriter w;
  write_header(w, kFlagModel | kFlagQuantized, model.config.to_json());
  uint32_t count = 0;
  for (const auto& ql : model.layers) {
    count += static_cast<uint32_t>(ql.weights.size() + ql.float_params.size());
  }
  w.u32(count);
  for (size_t li = 0; li < model.config.layers.size(); ++li) {
    const auto kind = static_cast<uint8_t>(model.config.layers[li].kind);
    for (const auto& [name, q] : model.layers[li].weights) write_quant_record(w, name, kind, q);
    for (const auto& p : model.layers[li].float_params) {
      write_f32_record(w, p.name, kind, p.value);
    }
  }
  return w.finish();
}

std::vector<uint8_t> serialize(const SparseModel& sparse) {
  ByteWriter w;
  write_header(w, kFlagModel | kFlagSparse, sparse.model.config.to_json());
  uint32_t count = 0;
  for (const auto& lp : sparse.model.layer_params) count += static_cast<uint32_t>(lp.size());
  w.u32(count);
  size_t next_csr = 0;
  for (size_t li = 0; li < sparse.model.config.layers.size(); ++li) {
    const auto kind = static_cast<uint8_t>(sparse.model.config.layers[li].kind);
    const bool as_csr = next_csr < sparse.csr_layer.size() &&
                        sparse.csr_layer[next_csr] == static_cast<int>(li);
    for (const auto& p : sparse.model.layer_params[li]) {
      if (as_csr && p.is_weight) {
        // Stored in natural [in, units] orientation.
        write_csr_record(w, p.name, kind, to_csr(p.value));
      } else {
        write_f32_record(w, p.name, kind, p.value);
      }
    }
    if (as_csr) ++next_csr;
  }
  return w.finish();
}

std::vector<uint8_t> serialize_tensor_map(
    const std::vector<std::pair<std::string, Tensor>>& tensors) {
  ByteWriter w;
  write_header(w, kFlagTensorMap, "");
  w.u32(static_cast<uint32_t>(tensors.size()));
  for (const auto& [name, t] : tensors) write_f32_record(w, name, kKindRawTensor, t);
  return w.finish();
}

LoadedContainer deserialize(const std::vector<uint8_t>& bytes) {
  if (bytes.size() < 16) throw ParseError("container too short", bytes.size());
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw ParseError("bad magic", 0);
  // CRC over everything but the trailing checksum.
  const size_t body = bytes.size() - 4;
  const auto want = static_cast<uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(body)));
  uint32_t got = 0;
  for (int i = 0; i < 4; ++i) got |= static_cast<uint32_t>(bytes[body + i]) << (8 * i);
  if (want != got) throw ParseError("CRC mismatch", body);

  ByteReader r(bytes);
  r.raw(4, "magic");
  const uint16_t version = r.u16("version");
  if (version != kContainerVersion) {
    throw ParseError("unsupported container version " + std::to_string(version), r.offset());
  }
  const uint16_t flags = r.u16("flags");
  const uint32_t config_len = r.u32("config length");
  std::string config_json(reinterpret_cast<const char*>(r.raw(config_len, "config")), config_len);
  const uint32_t count = r.u32("record count");
  std::vector<RawRecord> records = read_records(r, count);

  LoadedContainer out;
  if (flags & kFlagTensorMap) {
    out.kind = LoadedContainer::Kind::kTensorMap;
    for (auto& rec : records) out.tensors.emplace_back(rec.name, std::move(rec.f32));
    return out;
  }

  const ModelConfig config = ModelConfig::from_json(config_json);
  if (flags & kFlagQuantized) {
    out.kind = LoadedContainer::Kind::kQuantizedModel;
    // A freshly built skeleton pins the expected parameter layout per layer.
    const Model skeleton = Model::build(config);
    auto find_record = [&](const std::string& name) -> const RawRecord* {
      for (const auto& rec : records) {
        if (rec.name == name) return &rec;
      }
      return nullptr;
    };
    QuantizedModel qm;
    qm.config = config;
    qm.bits = 8;
    for (const auto& rec : records) {
      if (rec.dtype == RecordDtype::kU16Q) qm.bits = 16;
    }
    for (size_t li = 0; li < config.layers.size(); ++li) {
      QuantizedLayer ql;
      for (const auto& p : skeleton.layer_params[li]) {
        const RawRecord* rec = find_record(p.name);
        if (!rec) throw ParseError("record '" + p.name + "' missing from container", 0);
        if (rec->dtype == RecordDtype::kU8Q || rec->dtype == RecordDtype::kU16Q) {
          const QuantizedTensor& q = rec->quant;
          if (q.bits == 8) {
            std::vector<int16_t> c(q.size());
            for (size_t i = 0; i < q.size(); ++i) {
              c[i] = static_cast<int16_t>(q.at(i) - q.zero_point);
            }
            ql.centered8.push_back(std::move(c));
          } else {
            std::vector<int32_t> c(q.size());
            for (size_t i = 0; i < q.size(); ++i) {
              c[i] = static_cast<int32_t>(q.at(i) - q.zero_point);
            }
            ql.centered16.push_back(std::move(c));
          }
          ql.weights.emplace_back(p.name, q);
        } else {
          Parameter fp = p;
          fp.value = rec->f32;
          fp.mask = Tensor();
          ql.float_params.push_back(std::move(fp));
        }
      }
      qm.layers.push_back(std::move(ql));
    }
    out.qmodel = std::move(qm);
    return out;
  }

  out.kind = LoadedContainer::Kind::kModel;
  out.model = Model::build(config);
  for (auto& rec : records) {
    Parameter* p = out.model.find_parameter(rec.name);
    if (!p) throw ParseError("record '" + rec.name + "' not in model config", 0);
    if (!rec.f32.same_shape(p->value)) {
      throw ParseError("record '" + rec.name + "' shape mismatch", 0);
    }
    p->value = std::move(rec.f32);
  }
  return out;
}

size_t compressed_size(const std::vector<uint8_t>& bytes) {
  uLongf bound = compressBound(static_cast<uLong>(bytes.size()));
  std::vector<uint8_t> out(bound);
  const int rc = compress2(out.data(), &bound, bytes.data(), static_cast<uLong>(bytes.size()),
                           /*level=*/6);
  if (rc != Z_OK) throw IoError("deflate failed with code " + std::to_string(rc));
  return static_cast<size_t>(bound);
}

std::vector<uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return std::vector<uint8_t>(std::istreambuf_iterator<char>(in),
                              std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, const std::vector<uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to '" + path + "'");
}

void save_dataset(const std::string& path, const Dataset& dataset) {
  std::vector<std::pair<std::string, Tensor>> tensors;
  tensors.reserve(dataset.size() + 1);
  Tensor labels({std::max<int>(1, static_cast<int>(dataset.size()))});
  for (size_t i = 0; i < dataset.size(); ++i) labels[i] = dataset.labels[i];
  tensors.emplace_back("labels", labels);
  char name[32];
  for (size_t i = 0; i < dataset.size(); ++i) {
    std::snprintf(name, sizeof(name), "x/%06zu", i);
    tensors.emplace_back(name, dataset.features[i]);
  }
  write_file(path, serialize_tensor_map(tensors));
}

Dataset load_dataset(const std::string& path) {
  LoadedContainer c = deserialize(read_file(path));
  if (c.kind != LoadedContainer::Kind::kTensorMap) {
    throw DataError("'" + path + "' is not a feature cache");
  }
  Dataset out;
  const Tensor* labels = nullptr;
  for (const auto& [name, t] : c.tensors) {
    if (name == "labels") labels = &t;
  }
  if (!labels) throw DataError("feature cache missing labels tensor");
  for (const auto& [name, t] : c.tensors) {
    if (name.rfind("x/", 0) == 0) out.features.push_back(t);
  }
  if (labels->size() < out.features.size()) throw DataError("feature cache labels too short");
  out.labels.assign(labels->vec().begin(), labels->vec().begin() + out.features.size());
  return out;
}

}  // namespace edgepress
