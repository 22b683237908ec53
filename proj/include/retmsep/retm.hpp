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

#ifndef RETMSEP_RETM_HPP_
#define RETMSEP_RETM_HPP_

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "retmsep/covariance.hpp"
#include "retmsep/linalg.hpp"

namespace retmsep {

// Relative transfer matrix between microphone groups: per frequency bin the
// Q_A x Q_B matrix R with M_A ~= R * M_B for the source subset it was
// estimated from. R depends on the room and the source/receiver geometry
// only, not on the emitted signals.
struct Retm {
  int bins = 0;
  int q_a = 0;
  int q_b = 0;
  std::vector<ComplexMatrix> matrices;  // q_a x q_b per bin
  // Bins where estimation failed numerically. Their matrices are zeroed so
  // downstream subtraction passes group A through unmodified there.
  std::vector<std::uint8_t> failed;
  std::map<std::string, std::string> provenance;

  int failed_count() const;
};

// Baseline estimator: R = P_AA * pinv(P_BA) per bin, directly from the
// covariances of one recording segment.
Retm estimate_direct(const CovariancePair& cov, double tol = -1.0);

// Covariance subtraction: the ReTM of the sources present in `full` but not
// in `noise`, R = (P_AA - P_AA_n) * pinv(P_BA - P_BA_n). Works while the
// retained sources stay active; no source-free gap in `full` is needed.
Retm estimate_by_subtraction(const CovariancePair& full,
                             const CovariancePair& noise, double tol = -1.0);

// ReTM of the background noise sources from a noise-only recording. Alias
// of estimate_direct kept as a named pipeline step.
Retm estimate_noise_retm(const CovariancePair& noise, double tol = -1.0);

// Subset generalization: covariances of independent sources add, so the
// ReTM of any source subset follows from the summed per-part statistics:
// R = (sum P_AA) * pinv(sum P_BA).
Retm estimate_subset(const std::vector<CovariancePair>& parts,
                     double tol = -1.0);

// Calibration estimator for speaker separation. Inputs are the noise-only
// covariances and, per speaker, covariances of noise plus that speaker.
// Each non-target speaker's own statistics are recovered by subtracting the
// noise-only part, the noise statistics are added back once, and the result
// is the ReTM of everything except the target speaker.
Retm estimate_undesired_for_speaker(const CovariancePair& noise_only,
                                    const std::vector<CovariancePair>& noise_plus,
                                    int target, double tol = -1.0);

// Per-bin relative discrepancy ||(R_s + R_n) - R_total||_F / ||R_total||_F.
// Unlike covariances, ReTMs of disjoint source sets do not add; this
// quantifies how far from additive a given triple is.
std::vector<double> check_nonadditivity(const Retm& r_s, const Retm& r_n,
                                        const Retm& r_total);

// Binary serialization mirroring the covariance format (versioned header,
// little-endian complex doubles) so calibrated estimates can be reused
// across sessions.
void save_retm(const std::filesystem::path& path, const Retm& retm);
Retm load_retm(const std::filesystem::path& path);

}  // namespace retmsep

#endif  // RETMSEP_RETM_HPP_
