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
#include "retmsep/metrics.hpp"
#include "retmsep/rng.hpp"

using namespace retmsep;

namespace {

Eigen::VectorXd noise_signal(long n, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::VectorXd x(n);
  for (long i = 0; i < n; ++i) x(i) = rng.gaussian();
  return x;
}

double energy(const Eigen::VectorXd& v) { return v.squaredNorm(); }

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("estimate equal to the target reference hits the +100 dB cap") {
  const std::vector<Eigen::VectorXd> refs = {noise_signal(8000, 1),
                                             noise_signal(8000, 2)};
  const Decomposition d = decompose(refs[0], refs, 0, 64);
  CHECK(energy(d.interference) < 1e-16 * energy(d.target));
  CHECK(energy(d.artifact) < 1e-16 * energy(d.target));
  const auto [sir, sdr] = sir_sdr(d);
  CHECK(sir == kMetricCapDb);
  CHECK(sdr == kMetricCapDb);
}

TEST_CASE("estimate equal to an interferer leaves almost no target part") {
  const std::vector<Eigen::VectorXd> refs = {noise_signal(16000, 3),
                                             noise_signal(16000, 4)};
  const Decomposition d = decompose(refs[1], refs, 0, 64);
  // The target projection captures only a sliver of the energy.
  CHECK(energy(d.target) < 0.05 * energy(refs[1]));
  const auto [sir, sdr] = sir_sdr(d);
  CHECK(sir < -10.0);
  CHECK(sdr <= sir);
}

TEST_CASE("caps engage on exactly zero components") {
  Decomposition d;
  d.target = Eigen::VectorXd::Ones(10);
  d.interference = Eigen::VectorXd::Zero(10);
  d.artifact = Eigen::VectorXd::Zero(10);
  auto [sir, sdr] = sir_sdr(d);
  CHECK(sir == kMetricCapDb);
  CHECK(sdr == kMetricCapDb);

  d.target.setZero();
  d.interference.setOnes();
  std::tie(sir, sdr) = sir_sdr(d);
  CHECK(sir == -kMetricCapDb);
  CHECK(sdr == -kMetricCapDb);
}

TEST_CASE("constructed 20 dB interference ratio is recovered") {
  const std::vector<Eigen::VectorXd> refs = {noise_signal(32000, 5),
                                             noise_signal(32000, 6)};
  const Eigen::VectorXd estimate = refs[0] + 0.1 * refs[1];
  const Decomposition d = decompose(estimate, refs, 0, 32);
  const auto [sir, sdr] = sir_sdr(d);
  CHECK(sir == doctest::Approx(20.0).epsilon(0.005));
  CHECK(sdr <= sir);
  CHECK(sdr == doctest::Approx(20.0).epsilon(0.01));
}

TEST_CASE("filtered target still counts as target, not distortion") {
  const Eigen::VectorXd ref = noise_signal(32000, 7);
  const std::vector<Eigen::VectorXd> refs = {ref, noise_signal(32000, 8)};
  // A short FIR of the target must be absorbed by the projection.
  Eigen::VectorXd est = Eigen::VectorXd::Zero(32000);
  est.segment(0, 31998) += 0.8 * ref.segment(0, 31998);
  est.segment(2, 31998) += 0.3 * ref.segment(0, 31998);
  const Decomposition d = decompose(est, refs, 0, 16);
  const auto [sir, sdr] = sir_sdr(d);
  CHECK(sir > 40.0);
  CHECK(sdr > 40.0);
}

TEST_CASE("energy conservation of the orthogonal split") {
  Rng rng(9);
  const std::vector<Eigen::VectorXd> refs = {noise_signal(16000, 10),
                                             noise_signal(16000, 11),
                                             noise_signal(16000, 12)};
  Eigen::VectorXd est = 0.9 * refs[0] + 0.4 * refs[1] - 0.2 * refs[2];
  for (long i = 0; i < est.size(); ++i) est(i) += 0.05 * rng.gaussian();

  const Decomposition d = decompose(est, refs, 0, 128);
  const double total = energy(d.target) + energy(d.interference) +
                       energy(d.artifact);
  CHECK(std::abs(total - energy(est)) <= 1e-9 * energy(est));

  // Pairwise orthogonality backs the sum rule.
  CHECK(std::abs(d.target.dot(d.interference)) <= 1e-7 * energy(est));
  CHECK(std::abs((d.target + d.interference).dot(d.artifact)) <=
        1e-7 * energy(est));
}

TEST_CASE("SDR never exceeds SIR") {
  for (std::uint64_t seed = 20; seed < 26; ++seed) {
    const std::vector<Eigen::VectorXd> refs = {noise_signal(8000, seed),
                                               noise_signal(8000, seed + 100)};
    Rng rng(seed + 200);
    Eigen::VectorXd est = refs[0] + 0.3 * refs[1];
    for (long i = 0; i < est.size(); ++i) est(i) += 0.1 * rng.gaussian();
    const auto [sir, sdr] = sir_sdr(decompose(est, refs, 0, 64));
    CHECK(sdr <= sir);
  }
}

TEST_CASE("scale invariance of SIR and near-invariance of SDR") {
  const std::vector<Eigen::VectorXd> refs = {noise_signal(8000, 30),
                                             noise_signal(8000, 31)};
  Rng rng(32);
  Eigen::VectorXd est = refs[0] + 0.2 * refs[1];
  for (long i = 0; i < est.size(); ++i) est(i) += 0.02 * rng.gaussian();

  const BssDecomposer decomposer(refs, 64);
  const auto [sir1, sdr1] = sir_sdr(decomposer.decompose(est, 0));
  const auto [sir2, sdr2] = sir_sdr(decomposer.decompose(7.3 * est, 0));
  CHECK(std::abs(sir1 - sir2) < 1e-9);
  CHECK(std::abs(sdr1 - sdr2) < 1e-9);
}

TEST_CASE("silent estimate is an undefined-metric error") {
  const std::vector<Eigen::VectorXd> refs = {noise_signal(4000, 40)};
  const Decomposition d = decompose(Eigen::VectorXd::Zero(4000), refs, 0, 32);
  CHECK_THROWS_AS(sir_sdr(d), InputError);
}

TEST_CASE("contract violations") {
  const std::vector<Eigen::VectorXd> refs = {noise_signal(4000, 41)};
  CHECK_THROWS_AS(decompose(noise_signal(4000, 42), refs, 1, 32),
                  ContractViolation);  // target out of range
  CHECK_THROWS_AS(decompose(noise_signal(3999, 43), refs, 0, 32),
                  ContractViolation);  // length mismatch
  CHECK_THROWS_AS(BssDecomposer({}, 32), ContractViolation);
  CHECK_THROWS_AS(BssDecomposer(refs, 0), ContractViolation);
  CHECK_THROWS_AS(BssDecomposer({Eigen::VectorXd::Zero(100)}, 8),
                  ContractViolation);  // silent reference
}

TEST_CASE("linearly dependent references trigger diagonal loading, flagged") {
  const Eigen::VectorXd base = noise_signal(4000, 50);
  const std::vector<Eigen::VectorXd> refs = {base, 2.0 * base};
  const Decomposition d = decompose(base, refs, 0, 16);
  CHECK(d.regularized);
  // The split still reconstructs the estimate.
  Eigen::VectorXd sum = d.target + d.interference + d.artifact;
  CHECK((sum.head(4000) - base).norm() <= 1e-6 * base.norm());
}

}  // TEST_SUITE
