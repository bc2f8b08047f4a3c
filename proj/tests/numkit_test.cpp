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

#include <gtest/gtest.h>

#include <cmath>

#include "glstm/error.hpp"
#include "glstm/random.hpp"
#include "support/test_support.hpp"

namespace glstm {
namespace {

TEST(Activations, MatchHighPrecisionReference) {
  EXPECT_NEAR(sigmoid(Vector{2.0})[0], 0.88079707797788244, 1e-15);
  EXPECT_NEAR(tanh_act(Vector{1.0})[0], 0.76159415595576489, 1e-15);
  const Vector p = softmax(Vector{1.0, 2.0, 3.0});
  EXPECT_NEAR(p[0], 0.090030573170380458, 1e-15);
  EXPECT_NEAR(p[1], 0.24472847105479765, 1e-15);
  EXPECT_NEAR(p[2], 0.66524095577482189, 1e-15);
  const Vector lp = log_softmax(Vector{1.0, 2.0, 3.0});
  EXPECT_NEAR(lp[0], -2.40760596444438, 1e-13);
  EXPECT_NEAR(lp[2], -0.40760596444438, 1e-13);
}

TEST(Activations, StableForLargeInputs) {
  const Vector p = softmax(Vector{1000.0, 1000.0});
  EXPECT_DOUBLE_EQ(p[0], 0.5);
  const Vector lp = log_softmax(Vector{-1000.0, 0.0});
  EXPECT_NEAR(lp[0], -1000.0, 1e-9);
  EXPECT_TRUE(sigmoid(Vector{-800.0, 800.0}).all_finite());
  EXPECT_THROW(softmax(Vector{}), ShapeError);
}

TEST(Products, SmallHandCases) {
  const Matrix a{{1, 2, 3}, {4, 5, 6}};
  const Matrix b{{1, 0}, {0, 1}, {1, 1}};
  EXPECT_EQ(matmul(a, b), (Matrix{{4, 5}, {10, 11}}));
  EXPECT_EQ(matvec(a, Vector{1, 1, 1}), (Vector{6, 15}));
  EXPECT_EQ(matvec_transposed(a, Vector{1, -1}), (Vector{-3, -3, -3}));
  EXPECT_EQ(outer(Vector{1, 2}, Vector{3, 4, 5}), (Matrix{{3, 4, 5}, {6, 8, 10}}));
  EXPECT_EQ(transpose(a), (Matrix{{1, 4}, {2, 5}, {3, 6}}));
  EXPECT_DOUBLE_EQ(dot(Vector{1, 2, 3}, Vector{4, 5, 6}), 32.0);
  EXPECT_DOUBLE_EQ(norm2(Vector{3, 4}), 5.0);
  EXPECT_EQ(l2_normalized(Vector{0, 0}), (Vector{0, 0}));
}

TEST(Products, ShapeMismatchThrows) {
  const Matrix a(2, 3);
  EXPECT_THROW(matmul(a, a), ShapeError);
  EXPECT_THROW(matvec(a, Vector(2)), ShapeError);
  EXPECT_THROW(add(Vector(2), Vector(3)), ShapeError);
  EXPECT_THROW((Matrix{{1, 2}, {3}}), ShapeError);
}

TEST(Products, InplaceHelpersAgreeWithPureForms) {
  Rng rng(3);
  const Matrix m = testing::random_matrix(3, 4, rng);
  const Vector v = testing::random_vector(4, rng);
  const Vector u = testing::random_vector(3, rng);
  Vector acc = u;
  add_matvec_inplace(acc, m, v);
  const Vector expect = add(u, matvec(m, v));
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(acc[i], expect[i], 1e-15);
  Matrix o(3, 4);
  add_outer_inplace(o, u, v);
  EXPECT_EQ(o, outer(u, v));
}

const Matrix kSpd{{4.0, 1.0, 0.5}, {1.0, 3.0, 0.2}, {0.5, 0.2, 2.0}};
const Matrix kSpdB{{2.0, 0.3, 0.0}, {0.3, 1.5, 0.1}, {0.0, 0.1, 1.0}};

TEST(Cholesky, MatchesReferenceFactor) {
  const Matrix l = cholesky(kSpd);
  const double expect[] = {2.0, 0.0, 0.0, 0.5, 1.6583123951777, 0.0,
                           0.25, 0.04522670168666455, 1.391206147720224};
  for (std::size_t i = 0; i < 9; ++i) EXPECT_NEAR(l.values()[i], expect[i], 1e-13);
  const Matrix x = cholesky_solve(l, Matrix::identity(3));
  const Matrix eye = matmul(kSpd, x);
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(eye(r, c), r == c ? 1.0 : 0.0, 1e-14);
}

TEST(Cholesky, IndefiniteMatrixIsADecompositionError) {
  EXPECT_THROW(cholesky(Matrix{{1.0, 2.0}, {2.0, 1.0}}), DecompositionError);
}

TEST(SymmetricEig, MatchesReferenceSpectrum) {
  const EigenDecomposition e = symmetric_eig(kSpd);
  EXPECT_NEAR(e.values[0], 4.72157007774795, 1e-12);
  EXPECT_NEAR(e.values[1], 2.398343019336997, 1e-12);
  EXPECT_NEAR(e.values[2], 1.8800869029150526, 1e-12);
  for (std::size_t j = 0; j < 3; ++j) {
    const Vector v = e.vectors.column(j);
    const Vector av = matvec(kSpd, v);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(av[i], e.values[j] * v[i], 1e-12);
    EXPECT_NEAR(norm2(v), 1.0, 1e-12);
  }
}

TEST(SymmetricEig, RandomMatricesAreDiagonalized) {
  Rng rng(11);
  for (std::size_t n : {1u, 2u, 5u, 17u}) {
    Matrix a = testing::random_matrix(n, n, rng);
    a = add(a, transpose(a));
    const EigenDecomposition e = symmetric_eig(a);
    const Matrix vt_a_v = matmul(transpose(e.vectors), matmul(a, e.vectors));
    for (std::size_t r = 0; r < n; ++r) {
      if (r + 1 < n) EXPECT_GE(e.values[r], e.values[r + 1]);
      for (std::size_t c = 0; c < n; ++c) {
        EXPECT_NEAR(vt_a_v(r, c), r == c ? e.values[r] : 0.0, 1e-11);
      }
    }
  }
}

TEST(GeneralizedEig, MatchesReferenceAndIsBOrthonormal) {
  const EigenDecomposition e = sym_generalized_eig(kSpd, kSpdB);
  EXPECT_NEAR(e.values[0], 2.379119747631386, 1e-12);
  EXPECT_NEAR(e.values[1], 2.0, 1e-12);
  EXPECT_NEAR(e.values[2], 1.5482158925070215, 1e-12);
  const Matrix vtbv = matmul(transpose(e.vectors), matmul(kSpdB, e.vectors));
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(vtbv(r, c), r == c ? 1.0 : 0.0, 1e-12);
    const Vector v = e.vectors.column(r);
    const Vector av = matvec(kSpd, v);
    const Vector bv = matvec(kSpdB, v);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(av[i], e.values[r] * bv[i], 1e-12);
  }
}

TEST(GeneralizedEig, SingularMetricIsRejected) {
  EXPECT_THROW(sym_generalized_eig(kSpd, Matrix(3, 3)), DecompositionError);
}

}  // namespace
}  // namespace glstm
