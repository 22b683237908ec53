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

#include "retmsep/stft.hpp"

#include <cmath>
#include <string>

#include "real_fft.hpp"
#include "retmsep/errors.hpp"
#include "retmsep/parallel.hpp"

namespace retmsep {
namespace {

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

// Sum of squared window values folded over the hop grid. Constant for a
// valid weighted overlap-add pair.
double cola_constant(const std::vector<double>& window, int hop) {
  const int w = static_cast<int>(window.size());
  std::vector<double> fold(static_cast<std::size_t>(hop), 0.0);
  for (int n = 0; n < w; ++n) fold[static_cast<std::size_t>(n % hop)] += window[n] * window[n];
  double lo = fold[0], hi = fold[0];
  for (double v : fold) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (hi <= 0.0 || (hi - lo) > 1e-9 * hi) {
    throw ContractViolation(
        "synthesize: window/hop pair does not satisfy constant overlap-add "
        "(hop " + std::to_string(hop) + ", window " + std::to_string(w) + ")");
  }
  return hi;
}

}  // namespace

std::vector<double> sqrt_hann_window(int window_len) {
  std::vector<double> w(static_cast<std::size_t>(window_len));
  for (int n = 0; n < window_len; ++n) {
    w[static_cast<std::size_t>(n)] =
        std::sqrt(0.5 - 0.5 * std::cos(2.0 * M_PI * n / window_len));
  }
  return w;
}

SpectralFrames SpectralFrames::select_channels(
    const std::vector<int>& indices) const {
  SpectralFrames out = *this;
  out.channels = static_cast<int>(indices.size());
  out.data.assign(static_cast<std::size_t>(bins), ComplexMatrix());
  for (int b = 0; b < bins; ++b) {
    ComplexMatrix m(out.channels, frames);
    for (std::size_t k = 0; k < indices.size(); ++k) {
      const int ch = indices[k];
      if (ch < 0 || ch >= channels) {
        throw ContractViolation("select_channels: index " + std::to_string(ch) +
                                " out of range for " + std::to_string(channels) +
                                " channels");
      }
      m.row(static_cast<Eigen::Index>(k)) = data[static_cast<std::size_t>(b)].row(ch);
    }
    out.data[static_cast<std::size_t>(b)] = std::move(m);
  }
  return out;
}

SpectralFrames SpectralFrames::slice_frames(long begin, long end) const {
  if (end < 0) end = frames;
  if (begin < 0 || begin >= end || end > frames) {
    throw ContractViolation("slice_frames: bad range [" + std::to_string(begin) +
                            ", " + std::to_string(end) + ") of " +
                            std::to_string(frames) + " frames");
  }
  SpectralFrames out = *this;
  out.frames = static_cast<int>(end - begin);
  for (int b = 0; b < bins; ++b) {
    out.data[static_cast<std::size_t>(b)] =
        data[static_cast<std::size_t>(b)].middleCols(begin, end - begin).eval();
  }
  return out;
}

SpectralFrames analyze(const AudioBuffer& audio, int window_len, int hop) {
  if (!is_pow2(window_len)) {
    throw ContractViolation("analyze: window_len must be a power of two, got " +
                            std::to_string(window_len));
  }
  if (hop <= 0 || hop > window_len || window_len % hop != 0) {
    throw ContractViolation("analyze: hop must divide window_len, got hop " +
                            std::to_string(hop) + " window " +
                            std::to_string(window_len));
  }
  if (audio.channels() < 1) {
    throw ContractViolation("analyze: audio must have at least one channel");
  }
  if (audio.length() < window_len) {
    throw ContractViolation("analyze: audio shorter than one window (" +
                            std::to_string(audio.length()) + " < " +
                            std::to_string(window_len) + " samples)");
  }

  const int channels = audio.channels();
  const int frames =
      static_cast<int>((audio.length() - window_len) / hop) + 1;
  const int bins = window_len / 2 + 1;
  const std::vector<double> window = sqrt_hann_window(window_len);

  SpectralFrames out;
  out.channels = channels;
  out.bins = bins;
  out.frames = frames;
  out.sample_rate = audio.sample_rate;
  out.window_len = window_len;
  out.hop = hop;
  out.data.assign(static_cast<std::size_t>(bins), ComplexMatrix());
  for (int b = 0; b < bins; ++b) {
    out.data[static_cast<std::size_t>(b)].resize(channels, frames);
  }

  parallel_for(static_cast<std::size_t>(channels), [&](std::size_t c) {
    RealFft fft(window_len);
    std::vector<double> frame(static_cast<std::size_t>(window_len));
    std::vector<Complex> spectrum(static_cast<std::size_t>(bins));
    for (int t = 0; t < frames; ++t) {
      const long start = static_cast<long>(t) * hop;
      for (int n = 0; n < window_len; ++n) {
        frame[static_cast<std::size_t>(n)] =
            audio.samples(static_cast<Eigen::Index>(c), start + n) *
            window[static_cast<std::size_t>(n)];
      }
      fft.forward(frame.data(), spectrum.data());
      for (int b = 0; b < bins; ++b) {
        out.data[static_cast<std::size_t>(b)](static_cast<Eigen::Index>(c), t) =
            spectrum[static_cast<std::size_t>(b)];
      }
    }
  });
  return out;
}

AudioBuffer synthesize(const SpectralFrames& frames) {
  if (frames.bins != frames.window_len / 2 + 1 || frames.window_len <= 0) {
    throw ContractViolation("synthesize: inconsistent bin count");
  }
  if (frames.hop <= 0 || frames.window_len % frames.hop != 0) {
    throw ContractViolation("synthesize: hop must divide window_len");
  }
  const std::vector<double> window = sqrt_hann_window(frames.window_len);
  const double cola = cola_constant(window, frames.hop);

  const long out_len =
      static_cast<long>(frames.frames - 1) * frames.hop + frames.window_len;
  AudioBuffer audio;
  audio.sample_rate = frames.sample_rate;
  audio.samples.setZero(frames.channels, out_len);

  parallel_for(static_cast<std::size_t>(frames.channels), [&](std::size_t c) {
    RealFft fft(frames.window_len);
    std::vector<Complex> spectrum(static_cast<std::size_t>(frames.bins));
    std::vector<double> frame(static_cast<std::size_t>(frames.window_len));
    for (int t = 0; t < frames.frames; ++t) {
      for (int b = 0; b < frames.bins; ++b) {
        spectrum[static_cast<std::size_t>(b)] =
            frames.data[static_cast<std::size_t>(b)](static_cast<Eigen::Index>(c), t);
      }
      fft.inverse(spectrum.data(), frame.data());
      const long start = static_cast<long>(t) * frames.hop;
      for (int n = 0; n < frames.window_len; ++n) {
        audio.samples(static_cast<Eigen::Index>(c), start + n) +=
            frame[static_cast<std::size_t>(n)] *
            window[static_cast<std::size_t>(n)] / cola;
      }
    }
  });
  return audio;
}

}  // namespace retmsep
