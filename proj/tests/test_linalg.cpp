// Copyright 2026 The retmsep Authors
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

#include <doctest.h>

#include "oracle.hpp"
#include "retmsep/errors.hpp"
#include "retmsep/linalg.hpp"

using namespace retmsep;
using test::random_complex_matrix;

namespace {

double rel_err(const ComplexMatrix& got, const ComplexMatrix& want) {
  const double den = want.norm();
  return den > 0 ? (got - want).norm() / den : (got - want).norm();
}

}  // namespace

TEST_SUITE("linalg") {

TEST_CASE("pseudoinverse of identity is identity") {
  const ComplexMatrix eye = ComplexMatrix::Identity(3, 3);
  CHECK(rel_err(pseudoinverse(eye), eye) < 1e-14);
}

TEST_CASE("pseudoinverse of a rank-deficient diagonal") {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 0) = 2.0;
  const ComplexMatrix p = pseudoinverse(m);
  CHECK(std::abs(p(0, 0) - Complex(0.5, 0.0)) < 1e-15);
  CHECK(std::abs(p(0, 1)) == 0.0);
  CHECK(std::abs(p(1, 0)) == 0.0);
  CHECK(std::abs(p(1, 1)) == 0.0);
}

TEST_CASE("Penrose conditions on random rectangular matrices") {
  Rng rng(101);
  for (int trial = 0; trial < 20; ++trial) {
    const int rows = 2 + static_cast<int>(rng.bits() % 6);
    const int cols = 2 + static_cast<int>(rng.bits() % 6);
    const ComplexMatrix m = random_complex_matrix(rows, cols, rng);
    const ComplexMatrix p = pseudoinverse(m);

    REQUIRE(p.rows() == cols);
    REQUIRE(p.cols() == rows);
    CHECK((m * p * m - m).norm() / m.norm() < 1e-10);
    CHECK((p * m * p - p).norm() / p.norm() < 1e-10);
    const ComplexMatrix mp = m * p;
    const ComplexMatrix pm = p * m;
    CHECK((mp - mp.adjoint()).norm() / std::max(1.0, mp.norm()) < 1e-10);
    CHECK((pm - pm.adjoint()).norm() / std::max(1.0, pm.norm()) < 1e-10);
  }
}

TEST_CASE("direct residual check on a 4x6 complex matrix") {
  Rng rng(77);
  const ComplexMatrix m = random_complex_matrix(4, 6, rng);
  const ComplexMatrix p = pseudoinverse(m);
  CHECK((m * p * m - m).norm() / m.norm() < 1e-12);
}

TEST_CASE("pseudoinverse of a nonsingular square matrix is its inverse") {
  Rng rng(5);
  const ComplexMatrix m =
      random_complex_matrix(5, 5, rng) + 3.0 * ComplexMatrix::Identity(5, 5);
  const ComplexMatrix p = pseudoinverse(m);
  CHECK((p * m - ComplexMatrix::Identity(5, 5)).norm() < 1e-10);
}

TEST_CASE("explicit truncation tolerance zeroes small singular values") {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 0) = 1.0;
  m(1, 1) = 1e-6;
  const ComplexMatrix strict = pseudoinverse(m, 1e-3);
  CHECK(std::abs(strict(1, 1)) == 0.0);
  const ComplexMatrix loose = pseudoinverse(m, 1e-9);
  CHECK(std::abs(loose(1, 1) - Complex(1e6, 0.0)) < 1.0);
}

TEST_CASE("pseudoinverse rejects empty and non-finite inputs") {
  CHECK_THROWS_AS(pseudoinverse(ComplexMatrix()), ContractViolation);
  ComplexMatrix bad = ComplexMatrix::Zero(2, 2);
  bad(0, 0) = Complex(std::nan(""), 0.0);
  CHECK_THROWS_AS(pseudoinverse(bad), NumericalFailure);
}

TEST_CASE("matmul matches the naive triple loop") {
  Rng rng(11);
  const ComplexMatrix a = random_complex_matrix(3, 3, rng);
  const ComplexMatrix b = random_complex_matrix(3, 3, rng);
  CHECK(rel_err(matmul(a, b), test::naive_matmul(a, b)) < 1e-14);
}

TEST_CASE("matmul identity and permutation") {
  Rng rng(12);
  const ComplexMatrix a = random_complex_matrix(4, 4, rng);
  CHECK(rel_err(matmul(a, ComplexMatrix::Identity(4, 4)), a) == 0.0);

  ComplexMatrix swap = ComplexMatrix::Zero(2, 2);
  swap(0, 1) = 1.0;
  swap(1, 0) = 1.0;
  ComplexMatrix v(2, 1);
  v(0, 0) = Complex(1.0, 2.0);
  v(1, 0) = Complex(-3.0, 0.5);
  const ComplexMatrix swapped = matmul(swap, v);
  CHECK(swapped(0, 0) == v(1, 0));
  CHECK(swapped(1, 0) == v(0, 0));
}

TEST_CASE("matmul dimension mismatch names both shapes") {
  const ComplexMatrix a = ComplexMatrix::Zero(2, 3);
  const ComplexMatrix b = ComplexMatrix::Zero(4, 2);
  try {
    matmul(a, b);
    FAIL("expected ContractViolation");
  } catch (const ContractViolation& e) {
    const std::string msg = e.what();
    CHECK(msg.find("2x3") != std::string::npos);
    CHECK(msg.find("4x2") != std::string::npos);
  }
}

TEST_CASE("matmul associativity on random triples") {
  Rng rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const ComplexMatrix a = random_complex_matrix(4, 5, rng);
    const ComplexMatrix b = random_complex_matrix(5, 3, rng);
    const ComplexMatrix c = random_complex_matrix(3, 6, rng);
    const ComplexMatrix left = matmul(matmul(a, b), c);
    const ComplexMatrix right = matmul(a, matmul(b, c));
    CHECK(rel_err(left, right) < 1e-12);
  }
}

TEST_CASE("conj_transpose basics") {
  ComplexMatrix sym(2, 2);
  sym << 1.0, 2.0, 2.0, -3.0;
  CHECK((conj_transpose(sym) - sym).norm() == 0.0);

  ComplexMatrix imag(1, 1);
  imag(0, 0) = Complex(0.0, 1.0);
  CHECK(conj_transpose(imag)(0, 0) == Complex(0.0, -1.0));

  Rng rng(14);
  const ComplexMatrix m = random_complex_matrix(3, 5, rng);
  CHECK((conj_transpose(conj_transpose(m)) - m).norm() == 0.0);
}

}  // TEST_SUITE
