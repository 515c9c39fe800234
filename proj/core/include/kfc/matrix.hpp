// Copyright 2026 The kronfc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <vector>

namespace kfc {

// Dense row-major matrix of doubles. Element (i, j) lives at data[i*cols + j].
// Immutable in spirit: library operations return fresh values and never alias
// their inputs, so a Matrix may be read from any number of threads at once.
class Matrix {
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols);  // zero-filled
  // Takes ownership of data (length must be rows*cols, all entries finite).
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix identity(std::size_t n);
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double s);

  // Exact elementwise value equality (0.0 == -0.0 compares equal).
  friend bool operator==(const Matrix& a, const Matrix& b);

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Standard product with fixed i-k-j loop order: each output element
// accumulates over k in increasing order, so results are bit-reproducible.
Matrix matmul(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& m);
Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& m);

double frobenius_norm(const Matrix& m);
double max_abs(const Matrix& m);
// max |a - b| over entries; shapes must match.
double max_abs_diff(const Matrix& a, const Matrix& b);

// Throws ArgumentError if any entry is NaN or infinite.
void check_finite(const Matrix& m, const char* what);

// Allocation guard shared by kron/materialize: number of doubles a single
// result matrix may hold.
inline constexpr std::size_t kMaxMatrixElements = std::size_t{1} << 31;

}  // namespace kfc
