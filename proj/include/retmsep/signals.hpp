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

#ifndef RETMSEP_SIGNALS_HPP_
#define RETMSEP_SIGNALS_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <string>

namespace retmsep {

// Deterministic synthetic source material for bundled scenarios and tests,
// unit RMS. Types:
//   "speech" - speech-shaped noise with slow syllabic amplitude modulation
//   "hvac"   - low-frequency-heavy steady noise (air conditioner like)
//   "vacuum" - broadband noise with a mid resonance and motor hum
//   "white"  - white Gaussian noise
Eigen::VectorXd synth_signal(const std::string& type, long length,
                             double sample_rate, std::uint64_t seed);

}  // namespace retmsep

#endif  // RETMSEP_SIGNALS_HPP_
