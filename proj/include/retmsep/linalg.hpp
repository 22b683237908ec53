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

#ifndef RETMSEP_LINALG_HPP_
#define RETMSEP_LINALG_HPP_

#include <Eigen/Dense>
#include <complex>
#include <string>

namespace retmsep {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

bool all_finite(const ComplexMatrix& m);

std::string shape_string(const ComplexMatrix& m);

// Exact complex product. Throws ContractViolation naming both shapes when the
// inner dimensions differ.
ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b);

ComplexMatrix conj_transpose(const ComplexMatrix& m);

// Moore-Penrose inverse via SVD. Singular values at or below
// rel_tolerance * sigma_max are truncated to zero. A negative rel_tolerance
// selects the rank-revealing default max(rows, cols) * machine epsilon.
// Throws NumericalFailure when the input or result is not finite.
ComplexMatrix pseudoinverse(const ComplexMatrix& m, double rel_tolerance = -1.0);

}  // namespace retmsep

#endif  // RETMSEP_LINALG_HPP_
