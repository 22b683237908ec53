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

#include "retmsep/linalg.hpp"

#include <cmath>
#include <limits>

#include "retmsep/errors.hpp"

namespace retmsep {

bool all_finite(const ComplexMatrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const Complex& v = m(i, j);
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    }
  }
  return true;
}

std::string shape_string(const ComplexMatrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.rows()) {
    throw ContractViolation("matmul: inner dimensions differ, " +
                            shape_string(a) + " times " + shape_string(b));
  }
  return a * b;
}

ComplexMatrix conj_transpose(const ComplexMatrix& m) { return m.adjoint(); }

ComplexMatrix pseudoinverse(const ComplexMatrix& m, double rel_tolerance) {
  if (m.rows() == 0 || m.cols() == 0) {
    throw ContractViolation("pseudoinverse: empty matrix");
  }
  if (!all_finite(m)) {
    throw NumericalFailure("pseudoinverse: non-finite entries in " +
                           shape_string(m) + " input");
  }

  Eigen::JacobiSVD<ComplexMatrix> svd(m,
                                      Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sigma = svd.singularValues();
  const double sigma_max = sigma.size() > 0 ? sigma(0) : 0.0;

  const double rel =
      rel_tolerance >= 0.0
          ? rel_tolerance
          : static_cast<double>(std::max(m.rows(), m.cols())) *
                std::numeric_limits<double>::epsilon();
  const double cutoff = rel * sigma_max;

  Eigen::VectorXd inv_sigma(sigma.size());
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    inv_sigma(i) = sigma(i) > cutoff && sigma(i) > 0.0 ? 1.0 / sigma(i) : 0.0;
  }

  ComplexMatrix result =
      svd.matrixV() * inv_sigma.asDiagonal() * svd.matrixU().adjoint();
  if (!all_finite(result)) {
    throw NumericalFailure("pseudoinverse: SVD produced non-finite result for " +
                           shape_string(m) + " input");
  }
  return result;
}

}  // namespace retmsep
