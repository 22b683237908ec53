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

#include "retmsep/signals.hpp"

#include <cmath>

#include "retmsep/errors.hpp"
#include "retmsep/rng.hpp"

namespace retmsep {
namespace {

// One-pole lowpass, fc in Hz.
void lowpass(Eigen::VectorXd& x, double fc, double fs) {
  const double a = std::exp(-2.0 * M_PI * fc / fs);
  double state = 0.0;
  for (long n = 0; n < x.size(); ++n) {
    state = (1.0 - a) * x(n) + a * state;
    x(n) = state;
  }
}

// Two-pole resonator at f0 with radius r.
void resonate(Eigen::VectorXd& x, double f0, double r, double fs) {
  const double w = 2.0 * M_PI * f0 / fs;
  const double a1 = -2.0 * r * std::cos(w);
  const double a2 = r * r;
  double y1 = 0.0, y2 = 0.0;
  for (long n = 0; n < x.size(); ++n) {
    const double y = x(n) - a1 * y1 - a2 * y2;
    x(n) = y;
    y2 = y1;
    y1 = y;
  }
}

void normalize_rms(Eigen::VectorXd& x) {
  const double rms = std::sqrt(x.squaredNorm() / std::max<long>(1, x.size()));
  if (rms > 0) x /= rms;
}

Eigen::VectorXd white(long length, Rng& rng) {
  Eigen::VectorXd x(length);
  for (long n = 0; n < length; ++n) x(n) = rng.gaussian();
  return x;
}

Eigen::VectorXd speech_like(long length, double fs, Rng& rng) {
  Eigen::VectorXd x = white(length, rng);
  Eigen::VectorXd floor_hf = 0.12 * x;
  lowpass(x, 900.0, fs);
  resonate(x, 450.0, 0.9, fs);
  normalize_rms(x);
  x += floor_hf;  // keep energy in the upper bins
  // Syllabic-rate modulation; floored well above zero so long-term
  // statistics stay close to stationary.
  const double ph1 = rng.uniform(0.0, 2.0 * M_PI);
  const double ph2 = rng.uniform(0.0, 2.0 * M_PI);
  for (long n = 0; n < length; ++n) {
    const double t = n / fs;
    const double m = 0.65 + 0.25 * std::sin(2.0 * M_PI * 2.3 * t + ph1) +
                     0.18 * std::sin(2.0 * M_PI * 0.7 * t + ph2);
    x(n) *= std::max(0.2, m);
  }
  return x;
}

Eigen::VectorXd hvac_like(long length, double fs, Rng& rng) {
  Eigen::VectorXd x = white(length, rng);
  Eigen::VectorXd floor_bb = 0.04 * x;
  lowpass(x, 220.0, fs);
  lowpass(x, 220.0, fs);
  normalize_rms(x);
  const double ph = rng.uniform(0.0, 2.0 * M_PI);
  for (long n = 0; n < length; ++n) {
    x(n) += floor_bb(n) + 0.12 * std::sin(2.0 * M_PI * 48.0 * n / fs + ph);
  }
  return x;
}

Eigen::VectorXd vacuum_like(long length, double fs, Rng& rng) {
  Eigen::VectorXd x = white(length, rng);
  Eigen::VectorXd bb = 0.3 * x;
  resonate(x, 1300.0, 0.92, fs);
  normalize_rms(x);
  const double ph = rng.uniform(0.0, 2.0 * M_PI);
  for (long n = 0; n < length; ++n) {
    const double t = n / fs;
    x(n) += bb(n) + 0.2 * std::sin(2.0 * M_PI * 120.0 * t + ph) +
            0.1 * std::sin(2.0 * M_PI * 240.0 * t + 1.7 * ph);
  }
  return x;
}

}  // namespace

Eigen::VectorXd synth_signal(const std::string& type, long length,
                             double sample_rate, std::uint64_t seed) {
  if (length < 0) throw ContractViolation("synth_signal: negative length");
  if (sample_rate <= 0) {
    throw ContractViolation("synth_signal: sample rate must be positive");
  }
  Rng rng = Rng::derive(seed, "synth:" + type);
  Eigen::VectorXd x;
  if (type == "white") {
    x = white(length, rng);
  } else if (type == "speech") {
    x = speech_like(length, sample_rate, rng);
  } else if (type == "hvac") {
    x = hvac_like(length, sample_rate, rng);
  } else if (type == "vacuum") {
    x = vacuum_like(length, sample_rate, rng);
  } else {
    throw InputError("synth_signal: unknown signal type '" + type + "'");
  }
  normalize_rms(x);
  return x;
}

}  // namespace retmsep
