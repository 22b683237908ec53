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

#ifndef RETMSEP_AUDIO_IO_HPP_
#define RETMSEP_AUDIO_IO_HPP_

#include <Eigen/Dense>
#include <filesystem>

namespace retmsep {

// Multichannel audio held as double precision, nominal range [-1, 1].
// Rows are channels.
struct AudioBuffer {
  double sample_rate = 0.0;
  Eigen::MatrixXd samples;  // channels x length

  int channels() const { return static_cast<int>(samples.rows()); }
  long length() const { return static_cast<long>(samples.cols()); }
  double duration_s() const {
    return sample_rate > 0 ? length() / sample_rate : 0.0;
  }
};

enum class SampleFormat { Pcm16, Float32 };

// Reads PCM16, PCM24 or IEEE float32 RIFF/WAVE (plain or extensible header).
// Unsupported codecs and truncated files raise InputError naming the file.
AudioBuffer read_wav(const std::filesystem::path& path);

// Float32 is the default so processed results are stored unquantized.
void write_wav(const std::filesystem::path& path, const AudioBuffer& audio,
               SampleFormat format = SampleFormat::Float32);

// Windowed-sinc resampler (Kaiser window, stopband below -80 dB). Intended
// for matching corpus material to the scenario rate; returns the input
// unchanged when rates already agree.
AudioBuffer resample(const AudioBuffer& audio, double target_rate);

}  // namespace retmsep

#endif  // RETMSEP_AUDIO_IO_HPP_
