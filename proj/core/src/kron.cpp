// Copyright 2026 The kronfc Authors
// SPDX-License-Identifier: Apache-2.0

#include "kfc/kron.hpp"

#include <string>

#include "kfc/errors.hpp"

namespace kfc {

Matrix kron(const Matrix& a, const Matrix& b) {
  const std::size_t ra = a.rows(), ca = a.cols();
  const std::size_t rb = b.rows(), cb = b.cols();
  if (ra != 0 && rb > kMaxMatrixElements / ra) {
    throw CapacityError("kron: result row count overflows");
  }
  const std::size_t rows = ra * rb;
  if (ca != 0 && cb > kMaxMatrixElements / ca) {
    throw CapacityError("kron: result column count overflows");
  }
  const std::size_t cols = ca * cb;
  if (rows != 0 && cols > kMaxMatrixElements / rows) {
    throw CapacityError("kron: result would hold " + std::to_string(rows) + "x" +
                        std::to_string(cols) + " elements, over the cap");
  }
  Matrix out(rows, cols);
  for (std::size_t i = 0; i < ra; ++i) {
    for (std::size_t j = 0; j < ca; ++j) {
      const double av = a(i, j);
      for (std::size_t p = 0; p < rb; ++p) {
        for (std::size_t q = 0; q < cb; ++q) {
          out(i * rb + p, j * cb + q) = av * b(p, q);
        }
      }
    }
  }
  return out;
}

Matrix vec(const Matrix& m) {
  Matrix out(m.rows() * m.cols(), 1);
  for (std::size_t i = 0; i < m.size(); ++i) out.data()[i] = m.data()[i];
  return out;
}

Matrix unvec(const Matrix& column, std::size_t rows, std::size_t cols) {
  if (column.cols() != 1 || column.rows() != rows * cols) {
    throw ShapeError("unvec: expected a " + std::to_string(rows * cols) +
                     "x1 column, got " + std::to_string(column.rows()) + "x" +
                     std::to_string(column.cols()));
  }
  Matrix out(rows, cols);
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = column.data()[i];
  return out;
}

Matrix rearrange(const Matrix& m, std::size_t m1, std::size_t n1,
                 std::size_t m2, std::size_t n2) {
  if (m1 * m2 != m.rows() || n1 * n2 != m.cols()) {
    throw ShapeError("rearrange: " + std::to_string(m.rows()) + "x" +
                     std::to_string(m.cols()) + " does not factor as (" +
                     std::to_string(m1) + "*" + std::to_string(m2) + ")x(" +
                     std::to_string(n1) + "*" + std::to_string(n2) + ")");
  }
  Matrix out(m1 * n1, m2 * n2);
  for (std::size_t i = 0; i < m1; ++i) {
    for (std::size_t j = 0; j < n1; ++j) {
      for (std::size_t p = 0; p < m2; ++p) {
        for (std::size_t q = 0; q < n2; ++q) {
          out(i * n1 + j, p * n2 + q) = m(i * m2 + p, j * n2 + q);
        }
      }
    }
  }
  return out;
}

}  // namespace kfc
