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

#ifndef RETMSEP_COVARIANCE_HPP_
#define RETMSEP_COVARIANCE_HPP_

#include <filesystem>
#include <vector>

#include "retmsep/linalg.hpp"
#include "retmsep/stft.hpp"

namespace retmsep {

// Per-frequency second-order statistics between the two microphone groups:
// the group-A auto-covariance and the B-to-A cross-covariance. These two
// matrices are all any estimator in this project consumes.
struct CovariancePair {
  int bins = 0;
  int q_a = 0;
  int q_b = 0;
  long frame_count = 0;
  std::vector<ComplexMatrix> p_aa;  // q_a x q_a, kept exactly Hermitian
  std::vector<ComplexMatrix> p_ba;  // q_b x q_a
  // Bins whose auto-covariance picked up clearly negative eigenvalues after
  // a subtraction; a conditioning warning, not an error.
  std::vector<int> warned_bins;
};

// Frame-averaged covariances over [frame_begin, frame_end) of two aligned
// spectral tensors (group A and group B of the same recording). frame_end
// of -1 means all frames. The auto part is symmetrized to exact Hermitian.
CovariancePair estimate(const SpectralFrames& frames_a,
                        const SpectralFrames& frames_b, long frame_begin = 0,
                        long frame_end = -1);

// Bin-wise difference full - part. Negative eigenvalues below
// -1e-6 * trace are recorded in warned_bins.
CovariancePair subtract(const CovariancePair& full, const CovariancePair& part);

// Bin-wise sum, used to assemble subset statistics of independent sources.
CovariancePair add(const CovariancePair& a, const CovariancePair& b);

// Versioned little-endian binary format so pre-session statistics can be
// recorded once and reused.
void save_covariance(const std::filesystem::path& path,
                     const CovariancePair& cov);
CovariancePair load_covariance(const std::filesystem::path& path);

}  // namespace retmsep

#endif  // RETMSEP_COVARIANCE_HPP_
