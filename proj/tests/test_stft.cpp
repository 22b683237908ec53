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

#include <cmath>

#include "oracle.hpp"
#include "retmsep/errors.hpp"
#include "retmsep/rng.hpp"
#include "retmsep/stft.hpp"

using namespace retmsep;

namespace {

AudioBuffer mono(const Eigen::VectorXd& x, double fs = 16000.0) {
  AudioBuffer b;
  b.sample_rate = fs;
  b.samples = x.transpose();
  return b;
}

Eigen::VectorXd white_noise(long n, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::VectorXd x(n);
  for (long i = 0; i < n; ++i) x(i) = rng.gaussian();
  return x;
}

// Interior relative L2 error of an analyze/synthesize round trip, skipping
// one window at each edge.
double round_trip_error(const Eigen::VectorXd& x, int window, int hop) {
  const AudioBuffer in = mono(x);
  const SpectralFrames frames = analyze(in, window, hop);
  const AudioBuffer out = synthesize(frames);
  const long n = std::min<long>(x.size(), out.length());
  const long lo = window;
  const long hi = n - window;
  REQUIRE(hi > lo);
  const Eigen::VectorXd diff = out.samples.row(0).segment(lo, hi - lo) -
                               x.segment(lo, hi - lo).transpose();
  return diff.norm() / x.segment(lo, hi - lo).norm();
}

// Naive windowed DFT of one frame, the closed-form reference.
ComplexVector naive_frame_spectrum(const Eigen::VectorXd& frame,
                                   const std::vector<double>& window) {
  const int n = static_cast<int>(frame.size());
  ComplexVector out(n / 2 + 1);
  for (int k = 0; k <= n / 2; ++k) {
    Complex acc(0, 0);
    for (int t = 0; t < n; ++t) {
      const double phase = -2.0 * M_PI * k * t / n;
      acc += frame(t) * window[static_cast<std::size_t>(t)] *
             Complex(std::cos(phase), std::sin(phase));
    }
    out(k) = acc;
  }
  return out;
}

}  // namespace

TEST_SUITE("stft") {

TEST_CASE("frame count and shapes") {
  const SpectralFrames f = analyze(mono(white_noise(5000, 1)), 1024, 512);
  CHECK(f.frames == (5000 - 1024) / 512 + 1);
  CHECK(f.bins == 513);
  CHECK(f.channels == 1);
  CHECK(f.data.size() == 513);
  CHECK(f.data[0].rows() == 1);
  CHECK(f.data[0].cols() == f.frames);
}

TEST_CASE("analyze matches the direct windowed DFT") {
  Rng rng(7);
  const int w = 256;
  Eigen::VectorXd x(w);
  for (int i = 0; i < w; ++i) x(i) = rng.gaussian();
  const SpectralFrames f = analyze(mono(x), w, w / 2);
  const ComplexVector want = naive_frame_spectrum(x, sqrt_hann_window(w));
  double err = 0.0;
  for (int b = 0; b <= w / 2; ++b) {
    err = std::max(err, std::abs(f.data[static_cast<std::size_t>(b)](0, 0) -
                                 want(b)));
  }
  CHECK(err < 1e-9);
}

TEST_CASE("unit impulse mid-frame matches the direct DFT") {
  const int w = 256;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(w);
  x(w / 2) = 1.0;
  const SpectralFrames f = analyze(mono(x), w, w / 2);
  const ComplexVector want = naive_frame_spectrum(x, sqrt_hann_window(w));
  for (int b = 0; b <= w / 2; ++b) {
    CHECK(std::abs(f.data[static_cast<std::size_t>(b)](0, 0) - want(b)) <
          1e-12);
  }
}

TEST_CASE("bin-centered tone concentrates; far sidelobe energy below -60 dB") {
  const int w = 1024;
  const int k0 = 128;
  const double fs = 16000.0;
  Eigen::VectorXd x(4 * w);
  for (long n = 0; n < x.size(); ++n) {
    x(n) = std::sin(2.0 * M_PI * k0 * n / w);
  }
  const SpectralFrames f = analyze(mono(x, fs), w, w / 2);

  for (int t = 0; t < f.frames; ++t) {
    double peak = 0.0;
    int peak_bin = -1;
    double worst_far = 0.0;
    for (int b = 0; b < f.bins; ++b) {
      const double e = std::norm(f.data[static_cast<std::size_t>(b)](0, t));
      if (e > peak) {
        peak = e;
        peak_bin = b;
      }
      if (std::abs(b - k0) > 16) worst_far = std::max(worst_far, e);
    }
    CHECK(peak_bin == k0);
    CHECK(worst_far / peak < 1e-6);  // every far sidelobe below -60 dB
  }
}

TEST_CASE("all-zero input gives all-zero frames and back") {
  const SpectralFrames f = analyze(mono(Eigen::VectorXd::Zero(4096)), 1024, 512);
  double energy = 0.0;
  for (const auto& m : f.data) energy += m.norm();
  CHECK(energy == 0.0);
  const AudioBuffer out = synthesize(f);
  CHECK(out.samples.norm() == 0.0);
}

TEST_CASE("round trip on white noise") {
  CHECK(round_trip_error(white_noise(20000, 3), 1024, 512) < 1e-6);
}

TEST_CASE("round trip on a speech-band chirp") {
  const double fs = 16000.0;
  Eigen::VectorXd x(32000);
  for (long n = 0; n < x.size(); ++n) {
    const double t = n / fs;
    x(n) = std::sin(2.0 * M_PI * (100.0 * t + 0.5 * (3400.0 - 100.0) * t * t));
  }
  CHECK(round_trip_error(x, 1024, 512) < 1e-6);
}

TEST_CASE("round trip at quarter-window hop") {
  CHECK(round_trip_error(white_noise(20000, 4), 1024, 256) < 1e-6);
}

TEST_CASE("Parseval consistency per frame") {
  Rng rng(9);
  const int w = 512;
  Eigen::VectorXd x(w * 3);
  for (long i = 0; i < x.size(); ++i) x(i) = rng.gaussian();
  const std::vector<double> window = sqrt_hann_window(w);
  const SpectralFrames f = analyze(mono(x), w, w / 2);

  for (int t = 0; t < f.frames; ++t) {
    double time_energy = 0.0;
    for (int n = 0; n < w; ++n) {
      const double v = x(t * (w / 2) + n) * window[static_cast<std::size_t>(n)];
      time_energy += v * v;
    }
    double spec_energy =
        std::norm(f.data[0](0, t)) +
        std::norm(f.data[static_cast<std::size_t>(w / 2)](0, t));
    for (int b = 1; b < w / 2; ++b) {
      spec_energy += 2.0 * std::norm(f.data[static_cast<std::size_t>(b)](0, t));
    }
    spec_energy /= w;
    CHECK(std::abs(spec_energy - time_energy) <= 1e-9 * time_energy);
  }
}

TEST_CASE("linearity of analyze") {
  const Eigen::VectorXd a = white_noise(4096, 5);
  const Eigen::VectorXd b = white_noise(4096, 6);
  const SpectralFrames fa = analyze(mono(a), 1024, 512);
  const SpectralFrames fb = analyze(mono(b), 1024, 512);
  const SpectralFrames fab = analyze(mono(a + b), 1024, 512);
  for (int bin = 0; bin < fa.bins; ++bin) {
    const auto sb = static_cast<std::size_t>(bin);
    const double err = (fab.data[sb] - fa.data[sb] - fb.data[sb]).norm();
    const double mag = fab.data[sb].norm();
    CHECK(err <= 1e-12 * std::max(1.0, mag));
  }
}

TEST_CASE("contract violations") {
  CHECK_THROWS_AS(analyze(mono(white_noise(100, 1)), 1024, 512),
                  ContractViolation);  // shorter than one window
  CHECK_THROWS_AS(analyze(mono(white_noise(5000, 1)), 1000, 500),
                  ContractViolation);  // not a power of two
  CHECK_THROWS_AS(analyze(mono(white_noise(5000, 1)), 1024, 768),
                  ContractViolation);  // hop does not divide window
}

TEST_CASE("non-COLA window/hop pair is rejected at synthesis") {
  SpectralFrames f = analyze(mono(white_noise(8000, 2)), 1024, 512);
  f.hop = 1024;  // full-window hop: sqrt-Hann overlap sum is not constant
  CHECK_THROWS_AS(synthesize(f), ContractViolation);
}

TEST_CASE("channel selection and frame slicing") {
  AudioBuffer two;
  two.sample_rate = 16000.0;
  two.samples.resize(2, 4096);
  two.samples.row(0) = white_noise(4096, 8).transpose();
  two.samples.row(1) = white_noise(4096, 9).transpose();
  const SpectralFrames f = analyze(two, 1024, 512);

  const SpectralFrames swapped = f.select_channels({1, 0});
  CHECK(swapped.channels == 2);
  CHECK((swapped.data[10].row(0) - f.data[10].row(1)).norm() == 0.0);

  const SpectralFrames sliced = f.slice_frames(1, 3);
  CHECK(sliced.frames == 2);
  CHECK((sliced.data[10](0, 0) - f.data[10](0, 1)) == Complex(0, 0));

  CHECK_THROWS_AS(f.slice_frames(3, 3), ContractViolation);
  CHECK_THROWS_AS(f.select_channels({5}), ContractViolation);
}

}  // TEST_SUITE
