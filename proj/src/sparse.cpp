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

#include "edgepress/sparse.hpp"

#include <cmath>

#include "edgepress/errors.hpp"

namespace edgepress {

void CsrMatrix::check() const {
  if (rows < 0 || cols < 0) throw ShapeError("csr: negative dimensions");
  if (row_ptr.size() != static_cast<size_t>(rows) + 1 || row_ptr[0] != 0 ||
      row_ptr[rows] != static_cast<int>(values.size())) {
    throw ShapeError("csr: row_ptr inconsistent");
  }
  if (col_idx.size() != values.size()) throw ShapeError("csr: col_idx/values length mismatch");
  for (int r = 0; r < rows; ++r) {
    if (row_ptr[r] > row_ptr[r + 1]) throw ShapeError("csr: row_ptr not non-decreasing");
    for (int i = row_ptr[r]; i < row_ptr[r + 1]; ++i) {
      if (col_idx[i] < 0 || col_idx[i] >= cols) throw ShapeError("csr: column out of range");
      if (i > row_ptr[r] && col_idx[i] <= col_idx[i - 1]) {
        throw ShapeError("csr: columns not strictly increasing within row");
      }
      if (values[i] == 0.0f) throw ShapeError("csr: stored explicit zero");
    }
  }
}

CsrMatrix to_csr(const Tensor& dense) {
  if (dense.rank() != 2) throw ShapeError("to_csr expects a 2-D tensor, got " + dense.shape_str());
  CsrMatrix m;
  m.rows = dense.dim(0);
  m.cols = dense.dim(1);
  m.row_ptr.reserve(m.rows + 1);
  m.row_ptr.push_back(0);
  for (int r = 0; r < m.rows; ++r) {
    for (int c = 0; c < m.cols; ++c) {
      const float v = dense.at(r, c);
      if (v != 0.0f) {
        m.col_idx.push_back(c);
        m.values.push_back(v);
      }
    }
    m.row_ptr.push_back(static_cast<int>(m.values.size()));
  }
  return m;
}

Tensor from_csr(const CsrMatrix& m) {
  m.check();
  Tensor out({m.rows, m.cols});
  for (int r = 0; r < m.rows; ++r) {
    for (int i = m.row_ptr[r]; i < m.row_ptr[r + 1]; ++i) {
      out.at(r, m.col_idx[i]) = m.values[i];
    }
  }
  return out;
}

std::vector<float> csr_matvec(const CsrMatrix& a, const std::vector<float>& x) {
  if (static_cast<int>(x.size()) != a.cols) {
    throw ShapeError("csr_matvec: vector length " + std::to_string(x.size()) +
                     " != cols " + std::to_string(a.cols));
  }
  std::vector<float> y(a.rows, 0.0f);
  const int* rp = a.row_ptr.data();
  const int* ci = a.col_idx.data();
  const float* va = a.values.data();
  const float* px = x.data();
  for (int r = 0; r < a.rows; ++r) {
    float acc = 0.0f;
    for (int i = rp[r]; i < rp[r + 1]; ++i) acc += va[i] * px[ci[i]];
    y[r] = acc;
  }
  return y;
}

std::vector<float> dense_matvec(const Tensor& a, const std::vector<float>& x) {
  if (a.rank() != 2 || static_cast<int>(x.size()) != a.dim(1)) {
    throw ShapeError("dense_matvec: shape mismatch");
  }
  const int rows = a.dim(0), cols = a.dim(1);
  std::vector<float> y(rows, 0.0f);
  const float* pa = a.data();
  for (int r = 0; r < rows; ++r) {
    float acc = 0.0f;
    const float* row = pa + static_cast<size_t>(r) * cols;
    for (int c = 0; c < cols; ++c) acc += row[c] * x[c];
    y[r] = acc;
  }
  return y;
}

SparseModel sparsify_model(const Model& model, double density_threshold) {
  SparseModel sm;
  sm.model = model;
  for (size_t li = 0; li < model.config.layers.size(); ++li) {
    const LayerSpec& s = model.config.layers[li];
    if (s.kind != LayerKind::kDense) continue;
    const Parameter& kernel = model.layer_params[li][0];
    size_t nonzero = 0;
    for (float v : kernel.value.vec()) nonzero += v != 0.0f;
    const double density = static_cast<double>(nonzero) / static_cast<double>(kernel.value.size());
    SparseLayerReport r{s.name, density, density <= density_threshold};
    if (r.converted) {
      // Store W^T so the layer is a single row-major matvec.
      const int in = kernel.value.dim(0), units = kernel.value.dim(1);
      Tensor wt({units, in});
      for (int i = 0; i < in; ++i) {
        for (int j = 0; j < units; ++j) wt.at(j, i) = kernel.value.at(i, j);
      }
      sm.csr_layer.push_back(static_cast<int>(li));
      sm.kernels.push_back(to_csr(wt));
    }
    sm.report.push_back(std::move(r));
  }
  return sm;
}

float SparseModel::forward(const Tensor& input) const {
  Tensor cur = input;
  if (cur.shape() != model.config.input_shape) {
    if (cur.size() != shape_numel(model.config.input_shape)) {
      throw ShapeError("input shape " + cur.shape_str() + " != model input " +
                       shape_to_string(model.config.input_shape));
    }
    cur = cur.reshaped(model.config.input_shape);
  }
  size_t next_csr = 0;
  for (size_t li = 0; li < model.config.layers.size(); ++li) {
    const LayerSpec& s = model.config.layers[li];
    if (s.kind == LayerKind::kDense && next_csr < csr_layer.size() &&
        csr_layer[next_csr] == static_cast<int>(li)) {
      const CsrMatrix& wt = kernels[next_csr];
      ++next_csr;
      std::vector<float> y = csr_matvec(wt, cur.vec());
      const Tensor& bias = model.layer_params[li][1].value;
      Tensor out({s.units});
      for (int j = 0; j < s.units; ++j) out[j] = y[j] + bias[j];
      cur = std::move(out);
      continue;
    }
    cur = model.infer_layer(li, cur);
  }
  return cur[0];
}

}  // namespace edgepress
