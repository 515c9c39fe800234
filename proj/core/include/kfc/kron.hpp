// Copyright 2026 The kronfc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "kfc/matrix.hpp"

namespace kfc {

// Kronecker product: result((i*b.rows + p), (j*b.cols + q)) = a(i,j) * b(p,q).
Matrix kron(const Matrix& a, const Matrix& b);

// Row-major flattening into a (rows*cols) x 1 column: entry i*cols + j = m(i,j).
// Row-major is the one flattening convention used throughout this library;
// rearrange() below is chosen so that rearrange(kron(A,B)) == vec(A)*vec(B)^T
// holds bit-exactly under it.
Matrix vec(const Matrix& m);

// Inverse of vec for a given target shape.
Matrix unvec(const Matrix& column, std::size_t rows, std::size_t cols);

// The rearrangement that turns nearest-Kronecker-product fitting into rank-1
// approximation. For m of shape (m1*m2) x (n1*n2), the result is
// (m1*n1) x (m2*n2) with
//   result(i*n1 + j, p*n2 + q) = m(i*m2 + p, j*n2 + q),
// i.e. row (i,j) is the row-major vec of the (i,j)-th m2 x n2 block. It is a
// pure reindexing, so ||m||_F == ||rearrange(m)||_F and
//   ||M - A kron B||_F == ||rearrange(M) - vec(A) vec(B)^T||_F
// for all conformable A, B.
Matrix rearrange(const Matrix& m, std::size_t m1, std::size_t n1,
                 std::size_t m2, std::size_t n2);

}  // namespace kfc
