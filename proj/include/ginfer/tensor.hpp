/**
 * Copyright (c) 2026 The ginfer authors.
 *     All rights reserved.
 *
 *  Licensed under the Apache License, Version 2.0 (the "License");
 *  you may not use this file except in compliance with the License.
 *  You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 *  Unless required by applicable law or agreed to in writing,
 *  software distributed under the License is distributed on an "AS
 *  IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either
 *  express or implied.  See the License for the specific language
 *  governing permissions and limitations under the License.
 */

#ifndef GINFER_TENSOR_HPP
#define GINFER_TENSOR_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ginfer {

// Single precision throughout. Accumulation order is fixed (left to right)
// so a fixed configuration reproduces bit-identically; backends that merge
// partial results in different groupings agree within float tolerance only.
using DenseVector = std::vector<float>;

struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> data;  // row-major, rows*cols entries

  float& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  float at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  static DenseMatrix zeros(std::size_t rows, std::size_t cols) {
    return DenseMatrix{rows, cols, std::vector<float>(rows * cols, 0.0f)};
  }
  static DenseMatrix identity(std::size_t n) {
    DenseMatrix m = zeros(n, n);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0f;
    return m;
  }

  bool operator==(const DenseMatrix&) const = default;
};

inline DenseVector matvec(const DenseMatrix& m, const DenseVector& v) {
  if (m.cols != v.size()) {
    throw std::invalid_argument("matvec: matrix has " + std::to_string(m.cols) +
                                " cols but vector has " + std::to_string(v.size()) +
                                " entries");
  }
  DenseVector out(m.rows, 0.0f);
  for (std::size_t r = 0; r < m.rows; ++r) {
    float acc = 0.0f;
    const float* row = m.data.data() + r * m.cols;
    for (std::size_t c = 0; c < m.cols; ++c) acc += row[c] * v[c];
    out[r] = acc;
  }
  return out;
}

inline float dot(const DenseVector& a, const DenseVector& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("dot: dimension mismatch");
  }
  float acc = 0.0f;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

// y += x, elementwise.
inline void add_in_place(DenseVector& y, const DenseVector& x) {
  if (y.size() != x.size()) {
    throw std::invalid_argument("add_in_place: dimension mismatch");
  }
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += x[i];
}

// y += a * x, elementwise.
inline void add_scaled_in_place(DenseVector& y, float a, const DenseVector& x) {
  if (y.size() != x.size()) {
    throw std::invalid_argument("add_scaled_in_place: dimension mismatch");
  }
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

inline DenseVector scaled(const DenseVector& v, float a) {
  DenseVector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = a * v[i];
  return out;
}

enum class Activation : std::uint8_t { kIdentity, kRelu, kLeakyRelu, kElu };

inline DenseVector activation(Activation kind, const DenseVector& v,
                              float leaky_slope = 0.2f) {
  DenseVector out(v.size());
  switch (kind) {
    case Activation::kIdentity:
      out = v;
      break;
    case Activation::kRelu:
      for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] >= 0.0f ? v[i] : 0.0f;
      break;
    case Activation::kLeakyRelu:
      for (std::size_t i = 0; i < v.size(); ++i)
        out[i] = v[i] >= 0.0f ? v[i] : leaky_slope * v[i];
      break;
    case Activation::kElu:
      for (std::size_t i = 0; i < v.size(); ++i)
        out[i] = v[i] >= 0.0f ? v[i] : std::exp(v[i]) - 1.0f;
      break;
  }
  return out;
}

inline float leaky_relu_scalar(float x, float slope = 0.2f) {
  return x >= 0.0f ? x : slope * x;
}

// Max-subtracted softmax; evaluation order follows input order.
inline DenseVector softmax(const DenseVector& scores) {
  if (scores.empty()) {
    throw std::invalid_argument("softmax: empty input");
  }
  float m = scores[0];
  for (float s : scores) m = s > m ? s : m;
  DenseVector out(scores.size());
  float total = 0.0f;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out[i] = std::exp(scores[i] - m);
    total += out[i];
  }
  for (float& x : out) x /= total;
  return out;
}

}  // namespace ginfer

#endif  // GINFER_TENSOR_HPP
