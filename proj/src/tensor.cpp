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

#include "edgepress/tensor.hpp"

#include <cmath>
#include <sstream>

#include "edgepress/errors.hpp"

namespace edgepress {

size_t shape_numel(const std::vector<int>& shape) {
  size_t n = 1;
  for (int d : shape) {
    if (d <= 0) throw ShapeError("non-positive dimension in shape " + shape_to_string(shape));
    n *= static_cast<size_t>(d);
  }
  return n;
}

std::string shape_to_string(const std::vector<int>& shape) {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ")";
  return os.str();
}

Tensor::Tensor(std::vector<int> shape)
    : shape_(std::move(shape)), data_(shape_numel(shape_), 0.0f) {}

Tensor::Tensor(std::vector<int> shape, std::vector<float> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_numel(shape_) != data_.size()) {
    throw ShapeError("shape " + shape_to_string(shape_) + " does not match data length " +
                     std::to_string(data_.size()));
  }
}

Tensor Tensor::full(std::vector<int> shape, float value) {
  Tensor t(std::move(shape));
  t.fill(value);
  return t;
}

Tensor Tensor::from_rows(const std::vector<std::vector<float>>& rows) {
  const int r = static_cast<int>(rows.size());
  const int c = r > 0 ? static_cast<int>(rows[0].size()) : 0;
  std::vector<float> data;
  data.reserve(static_cast<size_t>(r) * c);
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != c) throw ShapeError("ragged rows in from_rows");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor({r, c}, std::move(data));
}

Tensor Tensor::reshaped(std::vector<int> shape) const {
  if (shape_numel(shape) != data_.size()) {
    throw ShapeError("reshape " + shape_to_string(shape_) + " -> " + shape_to_string(shape) +
                     " changes element count");
  }
  return Tensor(std::move(shape), data_);
}

void Tensor::fill(float value) {
  for (auto& v : data_) v = value;
}

bool Tensor::all_finite() const {
  for (float v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::string Tensor::shape_str() const { return shape_to_string(shape_); }

void check_finite(const Tensor& t, const std::string& what) {
  if (!t.all_finite()) throw NumericError("non-finite values in " + what);
}

}  // namespace edgepress
