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

#ifndef RETMSEP_METRICS_HPP_
#define RETMSEP_METRICS_HPP_

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace retmsep {

// Orthogonal split of an estimate against clean reference signals:
//   estimate = target + interference + artifact
// where target is the least-squares projection onto delayed copies
// (0..filter_len-1 samples) of the target reference, interference is the
// extra part captured by all references' delayed copies, and artifact is
// the remainder. Components carry filter_len - 1 samples of tail beyond the
// input length so the split is exactly orthogonal.
struct Decomposition {
  Eigen::VectorXd target;
  Eigen::VectorXd interference;
  Eigen::VectorXd artifact;
  bool regularized = false;  // projection system needed diagonal loading
};

struct EvalResult {
  std::string speaker;
  double sir_db = 0.0;
  double sdr_db = 0.0;
  double sir_improvement_db = 0.0;
  double sdr_improvement_db = 0.0;
};

// Caps applied to the log-energy ratios so perfect or hopeless estimates
// stay finite in reports.
constexpr double kMetricCapDb = 100.0;

// Precomputes the delayed-reference Gram system for one reference set so
// several estimates can be scored cheaply.
class BssDecomposer {
 public:
  BssDecomposer(std::vector<Eigen::VectorXd> references, int filter_len = 512);

  int filter_len() const { return filter_len_; }
  int reference_count() const { return static_cast<int>(refs_.size()); }
  long signal_length() const { return length_; }

  Decomposition decompose(const Eigen::VectorXd& estimate, int target) const;

 private:
  std::vector<Eigen::VectorXd> refs_;
  int filter_len_;
  long length_ = 0;
  bool regularized_ = false;
  Eigen::LLT<Eigen::MatrixXd> all_llt_;                // (K*F) x (K*F)
  std::vector<Eigen::LLT<Eigen::MatrixXd>> target_llt_;  // F x F per target
};

// One-shot convenience wrapper over BssDecomposer.
Decomposition decompose(const Eigen::VectorXd& estimate,
                        const std::vector<Eigen::VectorXd>& references,
                        int target, int filter_len = 512);

// SIR = 10 log10(||target||^2 / ||interference||^2),
// SDR = 10 log10(||target||^2 / ||interference + artifact||^2), both capped
// to +-kMetricCapDb. Throws InputError for an all-zero decomposition
// (silent estimate).
std::pair<double, double> sir_sdr(const Decomposition& d);

}  // namespace retmsep

#endif  // RETMSEP_METRICS_HPP_
