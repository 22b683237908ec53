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

#ifndef RETMSEP_SEPARATION_HPP_
#define RETMSEP_SEPARATION_HPP_

#include <vector>

#include "retmsep/audio_io.hpp"
#include "retmsep/retm.hpp"
#include "retmsep/stft.hpp"

namespace retmsep {

// One extracted speaker: Q_A parallel copies of the target estimate (the
// prediction residual M_A - R * M_B), plus per-bin diagnostics.
struct SeparationOutput {
  SpectralFrames frames;  // shape equals M_A: (Q_A, bins, frames)
  // ||output|| / ||M_A|| per bin; near zero where cancellation succeeded
  // and the target is silent.
  std::vector<double> bin_residual;
  // Bins passed through unmodified because the estimator failed there.
  std::vector<std::uint8_t> bin_passthrough;
};

// Subtracts the undesired-source prediction from group A:
// output(f, t) = M_A(f, t) - R(f) * M_B(f, t).
SeparationOutput extract(const SpectralFrames& frames_a,
                         const SpectralFrames& frames_b,
                         const Retm& undesired);

enum class ReconstructMode { ReferenceChannel, Average };

// Inverse STFT of the first group-A channel (default) or of the mean across
// the Q_A copies.
AudioBuffer reconstruct(const SeparationOutput& output,
                        ReconstructMode mode = ReconstructMode::ReferenceChannel);

}  // namespace retmsep

#endif  // RETMSEP_SEPARATION_HPP_
