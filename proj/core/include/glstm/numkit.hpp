// Copyright 2026 The gLSTM Captioner Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Dense row-major linear algebra on 64-bit floats. Every reduction runs in a
// fixed index order so identical inputs give bitwise identical outputs.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace glstm {

class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t dim, double fill = 0.0) : data_(dim, fill) {}
  Vector(std::initializer_list<double> values) : data_(values) {}
  explicit Vector(std::vector<double> values) : data_(std::move(values)) {}

  std::size_t dim() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  const std::vector<double>& raw() const noexcept { return data_; }

  void fill(double value);
  bool all_finite() const noexcept;

  friend bool operator==(const Vector&, const Vector&) = default;

 private:
  std::vector<double> data_;
};

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  // Nested braces, one inner list per row.
  Matrix(std::initializer_list<std::initializer_list<double>> rows);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> row_major);

  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  Vector column(std::size_t c) const;

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  void fill(double value);
  bool all_finite() const noexcept;
  std::string shape_string() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Nonlinearities.
Vector sigmoid(const Vector& v);
Vector tanh_act(const Vector& v);
// Max-subtracted for overflow safety.
Vector softmax(const Vector& v);
Vector log_softmax(const Vector& v);

// Products. All throw ShapeError naming both shapes on mismatch.
Matrix matmul(const Matrix& a, const Matrix& b);
Vector matvec(const Matrix& a, const Vector& v);
// a^T v without materializing the transpose.
Vector matvec_transposed(const Matrix& a, const Vector& v);
Matrix outer(const Vector& a, const Vector& b);
Matrix transpose(const Matrix& a);

Vector add(const Vector& a, const Vector& b);
Vector sub(const Vector& a, const Vector& b);
Vector hadamard(const Vector& a, const Vector& b);
Vector scale(const Vector& a, double s);
Matrix add(const Matrix& a, const Matrix& b);
Matrix hadamard(const Matrix& a, const Matrix& b);

double dot(const Vector& a, const Vector& b);
double norm2(const Vector& v);
// v / ||v||, or v unchanged when it is exactly zero.
Vector l2_normalized(const Vector& v);

// In-place accumulation used by gradient code.
void add_inplace(Vector& acc, const Vector& v);
void add_inplace(Matrix& acc, const Matrix& m);
void add_outer_inplace(Matrix& acc, const Vector& a, const Vector& b);
void add_matvec_inplace(Vector& acc, const Matrix& a, const Vector& v);

// Lower-triangular L with a = L L^T. Throws DecompositionError when a is not
// numerically positive definite.
Matrix cholesky(const Matrix& a);
// Solves a x = b for every column of b given a's Cholesky factor.
Matrix cholesky_solve(const Matrix& lower, const Matrix& b);

struct EigenDecomposition {
  Vector values;   // non-increasing
  Matrix vectors;  // one eigenvector per column
};

// Symmetric eigendecomposition via Householder tridiagonalization followed by
// implicit QL. Eigenvectors are orthonormal; each column's largest-magnitude
// component is made positive.
EigenDecomposition symmetric_eig(const Matrix& a);

// Solves a u = lambda b u for symmetric a and symmetric positive-definite b.
// b is Cholesky-whitened, the whitened problem is solved with symmetric_eig and
// eigenvectors are mapped back so that U^T b U = I.
EigenDecomposition sym_generalized_eig(const Matrix& a, const Matrix& b);

}  // namespace glstm
