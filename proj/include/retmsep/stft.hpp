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

#ifndef RETMSEP_STFT_HPP_
#define RETMSEP_STFT_HPP_

#include <vector>

#include "retmsep/audio_io.hpp"
#include "retmsep/linalg.hpp"

namespace retmsep {

// STFT tensor of a multichannel recording. Stored per bin as a
// channels x frames complex matrix, which is the shape every per-bin
// covariance and separation step consumes.
struct SpectralFrames {
  int channels = 0;
  int bins = 0;  // window_len / 2 + 1
  int frames = 0;
  double sample_rate = 0.0;
  int window_len = 0;
  int hop = 0;
  std::vector<ComplexMatrix> data;  // bins entries, each channels x frames

  SpectralFrames select_channels(const std::vector<int>& indices) const;
  SpectralFrames slice_frames(long begin, long end) const;
};

// Periodic square-root Hann analysis/synthesis window.
std::vector<double> sqrt_hann_window(int window_len);

// Windowed DFT frames; frame k covers samples [k*hop, k*hop + window_len).
// window_len must be a power of two, hop must divide window_len, and the
// audio must span at least one window.
SpectralFrames analyze(const AudioBuffer& audio, int window_len, int hop);

// Weighted overlap-add reconstruction. Requires a constant-overlap-add
// window/hop pair; unmodified frames reconstruct the interior of the input
// to near machine precision.
AudioBuffer synthesize(const SpectralFrames& frames);

}  // namespace retmsep

#endif  // RETMSEP_STFT_HPP_
