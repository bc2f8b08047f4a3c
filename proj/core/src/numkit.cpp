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

#include "glstm/numkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "glstm/error.hpp"

namespace glstm {
namespace {

std::string vec_shape(const Vector& v) { return "(" + std::to_string(v.dim()) + ")"; }

void require(bool ok, const std::string& op, const std::string& lhs,
             const std::string& rhs) {
  if (!ok) throw ShapeError(op + ": shape mismatch " + lhs + " vs " + rhs);
}

}  // namespace

void Vector::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

bool Vector::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(),
                     [](double x) { return std::isfinite(x); });
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw ShapeError("Matrix: ragged initializer rows");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> row_major)
    : rows_(rows), cols_(cols), data_(std::move(row_major)) {
  if (data_.size() != rows * cols) {
    throw ShapeError("Matrix: " + std::to_string(data_.size()) +
                     " values cannot fill " + shape_string());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Vector Matrix::column(std::size_t c) const {
  Vector out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

void Matrix::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

bool Matrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(),
                     [](double x) { return std::isfinite(x); });
}

std::string Matrix::shape_string() const {
  return "(" + std::to_string(rows_) + "x" + std::to_string(cols_) + ")";
}

Vector sigmoid(const Vector& v) {
  Vector out(v.dim());
  for (std::size_t i = 0; i < v.dim(); ++i) out[i] = 1.0 / (1.0 + std::exp(-v[i]));
  return out;
}

Vector tanh_act(const Vector& v) {
  Vector out(v.dim());
  for (std::size_t i = 0; i < v.dim(); ++i) out[i] = std::tanh(v[i]);
  return out;
}

Vector softmax(const Vector& v) {
  if (v.empty()) throw ShapeError("softmax: empty input");
  const double peak = *std::max_element(v.values().begin(), v.values().end());
  Vector out(v.dim());
  double total = 0.0;
  for (std::size_t i = 0; i < v.dim(); ++i) {
    out[i] = std::exp(v[i] - peak);
    total += out[i];
  }
  for (std::size_t i = 0; i < v.dim(); ++i) out[i] /= total;
  return out;
}

Vector log_softmax(const Vector& v) {
  if (v.empty()) throw ShapeError("log_softmax: empty input");
  const double peak = *std::max_element(v.values().begin(), v.values().end());
  double total = 0.0;
  for (std::size_t i = 0; i < v.dim(); ++i) total += std::exp(v[i] - peak);
  const double log_z = peak + std::log(total);
  Vector out(v.dim());
  for (std::size_t i = 0; i < v.dim(); ++i) out[i] = v[i] - log_z;
  return out;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.rows(), "matmul", a.shape_string(), b.shape_string());
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto dst = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      const auto src = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) dst[j] += aik * src[j];
    }
  }
  return out;
}

Vector matvec(const Matrix& a, const Vector& v) {
  require(a.cols() == v.dim(), "matvec", a.shape_string(), vec_shape(v));
  Vector out(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto r = a.row(i);
    double acc = 0.0;
    for (std::size_t j = 0; j < r.size(); ++j) acc += r[j] * v[j];
    out[i] = acc;
  }
  return out;
}

Vector matvec_transposed(const Matrix& a, const Vector& v) {
  require(a.rows() == v.dim(), "matvec_transposed", a.shape_string(), vec_shape(v));
  Vector out(a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto r = a.row(i);
    const double vi = v[i];
    for (std::size_t j = 0; j < r.size(); ++j) out[j] += r[j] * vi;
  }
  return out;
}

Matrix outer(const Vector& a, const Vector& b) {
  Matrix out(a.dim(), b.dim());
  add_outer_inplace(out, a, b);
  return out;
}

Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

Vector add(const Vector& a, const Vector& b) {
  require(a.dim() == b.dim(), "add", vec_shape(a), vec_shape(b));
  Vector out(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) out[i] = a[i] + b[i];
  return out;
}

Vector sub(const Vector& a, const Vector& b) {
  require(a.dim() == b.dim(), "sub", vec_shape(a), vec_shape(b));
  Vector out(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) out[i] = a[i] - b[i];
  return out;
}

Vector hadamard(const Vector& a, const Vector& b) {
  require(a.dim() == b.dim(), "hadamard", vec_shape(a), vec_shape(b));
  Vector out(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) out[i] = a[i] * b[i];
  return out;
}

Vector scale(const Vector& a, double s) {
  Vector out(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) out[i] = a[i] * s;
  return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
  Matrix out = a;
  add_inplace(out, b);
  return out;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "hadamard",
          a.shape_string(), b.shape_string());
  Matrix out(a.rows(), a.cols());
  auto dst = out.values();
  auto x = a.values();
  auto y = b.values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = x[i] * y[i];
  return out;
}

double dot(const Vector& a, const Vector& b) {
  require(a.dim() == b.dim(), "dot", vec_shape(a), vec_shape(b));
  double acc = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm2(const Vector& v) { return std::sqrt(dot(v, v)); }

Vector l2_normalized(const Vector& v) {
  const double n = norm2(v);
  if (n == 0.0) return v;
  return scale(v, 1.0 / n);
}

void add_inplace(Vector& acc, const Vector& v) {
  require(acc.dim() == v.dim(), "add_inplace", vec_shape(acc), vec_shape(v));
  for (std::size_t i = 0; i < v.dim(); ++i) acc[i] += v[i];
}

void add_inplace(Matrix& acc, const Matrix& m) {
  require(acc.rows() == m.rows() && acc.cols() == m.cols(), "add_inplace",
          acc.shape_string(), m.shape_string());
  auto dst = acc.values();
  auto src = m.values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

void add_outer_inplace(Matrix& acc, const Vector& a, const Vector& b) {
  require(acc.rows() == a.dim() && acc.cols() == b.dim(), "add_outer_inplace",
          acc.shape_string(), vec_shape(a) + "x" + vec_shape(b));
  for (std::size_t i = 0; i < a.dim(); ++i) {
    const double ai = a[i];
    auto r = acc.row(i);
    for (std::size_t j = 0; j < b.dim(); ++j) r[j] += ai * b[j];
  }
}

void add_matvec_inplace(Vector& acc, const Matrix& a, const Vector& v) {
  require(a.cols() == v.dim() && a.rows() == acc.dim(), "add_matvec_inplace",
          a.shape_string(), vec_shape(v));
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto r = a.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < r.size(); ++j) s += r[j] * v[j];
    acc[i] += s;
  }
}

Matrix cholesky(const Matrix& a) {
  require(a.rows() == a.cols(), "cholesky", a.shape_string(), "square");
  const std::size_t n = a.rows();
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double diag = a(j, j);
    for (std::size_t k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
    if (!(diag > 0.0) || !std::isfinite(diag)) {
      throw DecompositionError(
          "cholesky: matrix is not positive definite at pivot " + std::to_string(j) +
          "; increase the ridge regularization");
    }
    const double ljj = std::sqrt(diag);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return l;
}

namespace {

// Solves L y = b in place for every column of b.
void forward_substitute(const Matrix& lower, Matrix& b) {
  const std::size_t n = lower.rows();
  for (std::size_t c = 0; c < b.cols(); ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = b(i, c);
      for (std::size_t k = 0; k < i; ++k) s -= lower(i, k) * b(k, c);
      b(i, c) = s / lower(i, i);
    }
  }
}

// Solves L^T x = b in place for every column of b.
void backward_substitute(const Matrix& lower, Matrix& b) {
  const std::size_t n = lower.rows();
  for (std::size_t c = 0; c < b.cols(); ++c) {
    for (std::size_t ii = n; ii-- > 0;) {
      double s = b(ii, c);
      for (std::size_t k = ii + 1; k < n; ++k) s -= lower(k, ii) * b(k, c);
      b(ii, c) = s / lower(ii, ii);
    }
  }
}

// Householder reduction of the symmetric matrix held in v to tridiagonal form.
// On exit d holds the diagonal, e the subdiagonal (e[0] = 0) and v the
// accumulated orthogonal transform.
void tridiagonalize(Matrix& v, std::vector<double>& d, std::vector<double>& e) {
  const int n = static_cast<int>(v.rows());
  for (int j = 0; j < n; ++j) d[j] = v(n - 1, j);

  for (int i = n - 1; i > 0; --i) {
    double scale_sum = 0.0;
    double h = 0.0;
    for (int k = 0; k < i; ++k) scale_sum += std::abs(d[k]);
    if (scale_sum == 0.0) {
      e[i] = d[i - 1];
      for (int j = 0; j < i; ++j) {
        d[j] = v(i - 1, j);
        v(i, j) = 0.0;
        v(j, i) = 0.0;
      }
    } else {
      for (int k = 0; k < i; ++k) {
        d[k] /= scale_sum;
        h += d[k] * d[k];
      }
      double f = d[i - 1];
      double g = std::sqrt(h);
      if (f > 0) g = -g;
      e[i] = scale_sum * g;
      h -= f * g;
      d[i - 1] = f - g;
      for (int j = 0; j < i; ++j) e[j] = 0.0;

      for (int j = 0; j < i; ++j) {
        f = d[j];
        v(j, i) = f;
        g = e[j] + v(j, j) * f;
        for (int k = j + 1; k <= i - 1; ++k) {
          g += v(k, j) * d[k];
          e[k] += v(k, j) * f;
        }
        e[j] = g;
      }
      f = 0.0;
      for (int j = 0; j < i; ++j) {
        e[j] /= h;
        f += e[j] * d[j];
      }
      const double hh = f / (h + h);
      for (int j = 0; j < i; ++j) e[j] -= hh * d[j];
      for (int j = 0; j < i; ++j) {
        f = d[j];
        g = e[j];
        for (int k = j; k <= i - 1; ++k) v(k, j) -= (f * e[k] + g * d[k]);
        d[j] = v(i - 1, j);
        v(i, j) = 0.0;
      }
    }
    d[i] = h;
  }

  for (int i = 0; i < n - 1; ++i) {
    v(n - 1, i) = v(i, i);
    v(i, i) = 1.0;
    const double h = d[i + 1];
    if (h != 0.0) {
      for (int k = 0; k <= i; ++k) d[k] = v(k, i + 1) / h;
      for (int j = 0; j <= i; ++j) {
        double g = 0.0;
        for (int k = 0; k <= i; ++k) g += v(k, i + 1) * v(k, j);
        for (int k = 0; k <= i; ++k) v(k, j) -= g * d[k];
      }
    }
    for (int k = 0; k <= i; ++k) v(k, i + 1) = 0.0;
  }
  for (int j = 0; j < n; ++j) {
    d[j] = v(n - 1, j);
    v(n - 1, j) = 0.0;
  }
  v(n - 1, n - 1) = 1.0;
  e[0] = 0.0;
}

// Implicit QL iterations on the tridiagonal (d, e), rotating v alongside.
void tridiagonal_ql(Matrix& v, std::vector<double>& d, std::vector<double>& e) {
  const int n = static_cast<int>(v.rows());
  for (int i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;

  double f = 0.0;
  double tst1 = 0.0;
  const double eps = std::numeric_limits<double>::epsilon();
  const int max_iter = 60;
  for (int l = 0; l < n; ++l) {
    tst1 = std::max(tst1, std::abs(d[l]) + std::abs(e[l]));
    int m = l;
    while (m < n - 1 && std::abs(e[m]) > eps * tst1) ++m;

    if (m > l) {
      int iter = 0;
      do {
        if (++iter > max_iter) {
          throw NumericError("symmetric_eig: QL iteration did not converge");
        }
        double g = d[l];
        double p = (d[l + 1] - g) / (2.0 * e[l]);
        double r = std::hypot(p, 1.0);
        if (p < 0) r = -r;
        d[l] = e[l] / (p + r);
        d[l + 1] = e[l] * (p + r);
        const double dl1 = d[l + 1];
        double h = g - d[l];
        for (int i = l + 2; i < n; ++i) d[i] -= h;
        f += h;

        p = d[m];
        double c = 1.0;
        double c2 = c;
        double c3 = c;
        const double el1 = e[l + 1];
        double s = 0.0;
        double s2 = 0.0;
        for (int i = m - 1; i >= l; --i) {
          c3 = c2;
          c2 = c;
          s2 = s;
          g = c * e[i];
          h = c * p;
          r = std::hypot(p, e[i]);
          e[i + 1] = s * r;
          s = e[i] / r;
          c = p / r;
          p = c * d[i] - s * g;
          d[i + 1] = h + s * (c * g + s * d[i]);
          for (int k = 0; k < n; ++k) {
            h = v(k, i + 1);
            v(k, i + 1) = s * v(k, i) + c * h;
            v(k, i) = c * v(k, i) - s * h;
          }
        }
        p = -s * s2 * c3 * el1 * e[l] / dl1;
        e[l] = s * p;
        d[l] = c * p;
      } while (std::abs(e[l]) > eps * tst1);
    }
    d[l] += f;
    e[l] = 0.0;
  }
}

}  // namespace

Matrix cholesky_solve(const Matrix& lower, const Matrix& b) {
  require(lower.rows() == b.rows(), "cholesky_solve", lower.shape_string(),
          b.shape_string());
  Matrix x = b;
  forward_substitute(lower, x);
  backward_substitute(lower, x);
  return x;
}

EigenDecomposition symmetric_eig(const Matrix& a) {
  require(a.rows() == a.cols(), "symmetric_eig", a.shape_string(), "square");
  const std::size_t n = a.rows();
  if (n == 0) return {};
  Matrix v = a;
  std::vector<double> d(n), e(n);
  tridiagonalize(v, d, e);
  tridiagonal_ql(v, d, e);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return d[x] > d[y]; });

  EigenDecomposition out{Vector(n), Matrix(n, n)};
  for (std::size_t c = 0; c < n; ++c) {
    const std::size_t src = order[c];
    out.values[c] = d[src];
    std::size_t pivot = 0;
    for (std::size_t r = 1; r < n; ++r) {
      if (std::abs(v(r, src)) > std::abs(v(pivot, src))) pivot = r;
    }
    const double sign = v(pivot, src) < 0 ? -1.0 : 1.0;
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, c) = sign * v(r, src);
  }
  return out;
}

EigenDecomposition sym_generalized_eig(const Matrix& a, const Matrix& b) {
  require(a.rows() == a.cols() && b.rows() == b.cols() && a.rows() == b.rows(),
          "sym_generalized_eig", a.shape_string(), b.shape_string());
  const std::size_t n = a.rows();
  const Matrix lower = cholesky(b);

  // whitened = L^-1 a L^-T, formed as L^-1 (L^-1 a)^T since a is symmetric.
  Matrix half = a;
  forward_substitute(lower, half);
  Matrix whitened = transpose(half);
  forward_substitute(lower, whitened);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double avg = 0.5 * (whitened(i, j) + whitened(j, i));
      whitened(i, j) = avg;
      whitened(j, i) = avg;
    }
  }

  EigenDecomposition eig = symmetric_eig(whitened);
  backward_substitute(lower, eig.vectors);
  return eig;
}

}  // namespace glstm
