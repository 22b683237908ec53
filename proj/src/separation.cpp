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

#include "retmsep/separation.hpp"

#include "retmsep/errors.hpp"
#include "retmsep/parallel.hpp"

namespace retmsep {

SeparationOutput extract(const SpectralFrames& frames_a,
                         const SpectralFrames& frames_b,
                         const Retm& undesired) {
  if (frames_a.bins != frames_b.bins || frames_a.frames != frames_b.frames ||
      frames_a.window_len != frames_b.window_len ||
      frames_a.hop != frames_b.hop) {
    throw ContractViolation("extract: group A and B frames are not aligned");
  }
  if (undesired.bins != frames_a.bins ||
      undesired.q_a != frames_a.channels ||
      undesired.q_b != frames_b.channels) {
    throw ContractViolation(
        "extract: ReTM shape (" + std::to_string(undesired.q_a) + "x" +
        std::to_string(undesired.q_b) + ", " + std::to_string(undesired.bins) +
        " bins) does not match frames (" + std::to_string(frames_a.channels) +
        "/" + std::to_string(frames_b.channels) + " channels, " +
        std::to_string(frames_a.bins) + " bins)");
  }

  SeparationOutput out;
  out.frames = frames_a;  // copies shape and metadata; data overwritten below
  out.bin_residual.assign(static_cast<std::size_t>(frames_a.bins), 0.0);
  out.bin_passthrough = undesired.failed;

  parallel_for(static_cast<std::size_t>(frames_a.bins), [&](std::size_t f) {
    const ComplexMatrix& a = frames_a.data[f];
    const ComplexMatrix& b = frames_b.data[f];
    ComplexMatrix s = a - undesired.matrices[f] * b;
    const double a_norm = a.norm();
    out.bin_residual[f] = a_norm > 0 ? s.norm() / a_norm : 0.0;
    out.frames.data[f] = std::move(s);
  });
  return out;
}

AudioBuffer reconstruct(const SeparationOutput& output, ReconstructMode mode) {
  const SpectralFrames& src = output.frames;
  SpectralFrames mono = src;
  mono.channels = 1;
  for (int f = 0; f < src.bins; ++f) {
    const auto sf = static_cast<std::size_t>(f);
    if (mode == ReconstructMode::ReferenceChannel) {
      mono.data[sf] = src.data[sf].row(0).eval();
    } else {
      mono.data[sf] =
          (src.data[sf].colwise().mean()).eval();
    }
  }
  return synthesize(mono);
}

}  // namespace retmsep
