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

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace edgepress {

// Dense row-major float32 array. The universal carrier for signals,
// spectrograms, weights and activations.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape);
  Tensor(std::vector<int> shape, std::vector<float> data);
  Tensor(std::initializer_list<int> shape) : Tensor(std::vector<int>(shape)) {}

  static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }
  static Tensor full(std::vector<int> shape, float value);
  // 2-D helper for literal test fixtures: rows of equal length.
  static Tensor from_rows(const std::vector<std::vector<float>>& rows);

  const std::vector<int>& shape() const { return shape_; }
  int dim(size_t i) const { return shape_[i]; }
  size_t rank() const { return shape_.size(); }
  size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  float* data() { return data_.data(); }
  const float* data() const { return data_.data(); }
  std::vector<float>& vec() { return data_; }
  const std::vector<float>& vec() const { return data_; }

  float& operator[](size_t i) { return data_[i]; }
  float operator[](size_t i) const { return data_[i]; }

  float& at(int i, int j) { return data_[static_cast<size_t>(i) * shape_[1] + j]; }
  float at(int i, int j) const { return data_[static_cast<size_t>(i) * shape_[1] + j]; }
  float& at(int i, int j, int k) {
    return data_[(static_cast<size_t>(i) * shape_[1] + j) * shape_[2] + k];
  }
  float at(int i, int j, int k) const {
    return data_[(static_cast<size_t>(i) * shape_[1] + j) * shape_[2] + k];
  }

  // Same data, new shape; element count must match.
  Tensor reshaped(std::vector<int> shape) const;

  void fill(float value);
  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  bool all_finite() const;

  std::string shape_str() const;

 private:
  std::vector<int> shape_;
  std::vector<float> data_;
};

size_t shape_numel(const std::vector<int>& shape);
std::string shape_to_string(const std::vector<int>& shape);

// Throws NumericError naming `what` if any element is NaN/Inf.
void check_finite(const Tensor& t, const std::string& what);

}  // namespace edgepress
