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

#include <string>
#include <vector>

#include "edgepress/model.hpp"
#include "edgepress/tensor.hpp"

namespace edgepress {

struct CsrMatrix {
  int rows = 0, cols = 0;
  std::vector<int> row_ptr;   // rows + 1, non-decreasing, row_ptr[0] == 0
  std::vector<int> col_idx;   // strictly increasing within each row
  std::vector<float> values;  // no stored explicit zeros

  size_t nnz() const { return values.size(); }
  void check() const;  // validates the structural invariants
};

// Lossless: from_csr(to_csr(d)) == d exactly.
CsrMatrix to_csr(const Tensor& dense);
Tensor from_csr(const CsrMatrix& m);

// y = A x.
std::vector<float> csr_matvec(const CsrMatrix& a, const std::vector<float>& x);

// Dense reference with the same accumulation order (row-major over columns).
std::vector<float> dense_matvec(const Tensor& a, const std::vector<float>& x);

struct SparseLayerReport {
  std::string layer;
  double density = 1.0;
  bool converted = false;
};

// Model whose dense layers at or below the density threshold execute their
// kernel as CSR (transposed, so forward is one matvec per layer).
class SparseModel {
 public:
  Model model;
  std::vector<int> csr_layer;        // layer index per CSR kernel
  std::vector<CsrMatrix> kernels;    // W^T as [units, in]
  std::vector<SparseLayerReport> report;

  float forward(const Tensor& input) const;
};

// Masks must already be applied; conv layers stay dense.
SparseModel sparsify_model(const Model& model, double density_threshold = 0.4);

}  // namespace edgepress
