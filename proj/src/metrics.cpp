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

#include "retmsep/metrics.hpp"

#include <cmath>

#include "real_fft.hpp"
#include "retmsep/errors.hpp"

namespace retmsep {
namespace {

// Filters ref with taps (delays 0..F-1); output length len + F - 1.
Eigen::VectorXd apply_fir(const Eigen::VectorXd& taps,
                          const Eigen::VectorXd& ref) {
  return fft_convolve(taps, ref);
}

Eigen::LLT<Eigen::MatrixXd> factor_with_loading(Eigen::MatrixXd gram,
                                                bool* regularized) {
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() == Eigen::Success) return llt;
  const double mean_diag =
      gram.diagonal().cwiseAbs().mean() + 1e-300;
  double load = 1e-12 * mean_diag;
  for (int attempt = 0; attempt < 8; ++attempt) {
    Eigen::MatrixXd loaded = gram;
    loaded.diagonal().array() += load;
    llt.compute(loaded);
    if (llt.info() == Eigen::Success) {
      *regularized = true;
      return llt;
    }
    load *= 100.0;
  }
  throw NumericalFailure(
      "metrics: projection system is singular even with diagonal loading");
}

double capped_ratio_db(double num, double den) {
  if (num <= 0.0) return -kMetricCapDb;
  if (den <= 0.0) return kMetricCapDb;
  const double v = 10.0 * std::log10(num / den);
  return std::clamp(v, -kMetricCapDb, kMetricCapDb);
}

}  // namespace

BssDecomposer::BssDecomposer(std::vector<Eigen::VectorXd> references,
                             int filter_len)
    : refs_(std::move(references)), filter_len_(filter_len) {
  if (refs_.empty()) {
    throw ContractViolation("BssDecomposer: at least one reference required");
  }
  if (filter_len_ < 1) {
    throw ContractViolation("BssDecomposer: filter_len must be >= 1");
  }
  length_ = refs_.front().size();
  for (const auto& r : refs_) {
    if (r.size() != length_) {
      throw ContractViolation("BssDecomposer: references differ in length");
    }
    if (r.size() == 0 || r.squaredNorm() == 0.0) {
      throw ContractViolation("BssDecomposer: silent or empty reference");
    }
  }

  const int k = reference_count();
  const int f = filter_len_;
  Eigen::MatrixXd gram(k * f, k * f);
  for (int i = 0; i < k; ++i) {
    for (int j = i; j < k; ++j) {
      // c(tau) = sum_n r_i[n] r_j[n + tau]; block (i, j) holds
      // <r_i delayed by d, r_j delayed by d'> = c(d - d').
      const Eigen::VectorXd c = cross_correlation(refs_[static_cast<std::size_t>(i)],
                                                  refs_[static_cast<std::size_t>(j)], f);
      for (int d = 0; d < f; ++d) {
        for (int dp = 0; dp < f; ++dp) {
          const double v = c(f - 1 + d - dp);
          gram(i * f + d, j * f + dp) = v;
          gram(j * f + dp, i * f + d) = v;
        }
      }
    }
  }

  all_llt_ = factor_with_loading(gram, &regularized_);
  target_llt_.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    target_llt_.push_back(
        factor_with_loading(gram.block(i * f, i * f, f, f), &regularized_));
  }
}

Decomposition BssDecomposer::decompose(const Eigen::VectorXd& estimate,
                                       int target) const {
  if (estimate.size() != length_) {
    throw ContractViolation("decompose: estimate length " +
                            std::to_string(estimate.size()) +
                            " does not match references (" +
                            std::to_string(length_) + ")");
  }
  if (target < 0 || target >= reference_count()) {
    throw ContractViolation("decompose: target index out of range");
  }

  const int k = reference_count();
  const int f = filter_len_;

  // rhs[j*F + d] = <estimate, r_j delayed by d>.
  Eigen::VectorXd rhs(k * f);
  for (int j = 0; j < k; ++j) {
    const Eigen::VectorXd c =
        cross_correlation(refs_[static_cast<std::size_t>(j)], estimate, f);
    rhs.segment(j * f, f) = c.tail(f);
  }

  const Eigen::VectorXd coef_all = all_llt_.solve(rhs);
  const Eigen::VectorXd coef_target =
      target_llt_[static_cast<std::size_t>(target)].solve(
          rhs.segment(target * f, f));

  const long out_len = length_ + f - 1;
  Eigen::VectorXd projection = Eigen::VectorXd::Zero(out_len);
  for (int j = 0; j < k; ++j) {
    projection += apply_fir(coef_all.segment(j * f, f),
                            refs_[static_cast<std::size_t>(j)]);
  }

  Decomposition d;
  d.regularized = regularized_;
  d.target = apply_fir(coef_target, refs_[static_cast<std::size_t>(target)]);
  d.interference = projection - d.target;
  d.artifact = Eigen::VectorXd::Zero(out_len);
  d.artifact.head(length_) = estimate;
  d.artifact -= projection;
  return d;
}

Decomposition decompose(const Eigen::VectorXd& estimate,
                        const std::vector<Eigen::VectorXd>& references,
                        int target, int filter_len) {
  return BssDecomposer(references, filter_len).decompose(estimate, target);
}

std::pair<double, double> sir_sdr(const Decomposition& d) {
  const double st = d.target.squaredNorm();
  const double ei = d.interference.squaredNorm();
  const double ea = d.artifact.squaredNorm();
  if (st + ei + ea == 0.0) {
    throw InputError("sir_sdr: silent estimate, metrics undefined");
  }
  return {capped_ratio_db(st, ei), capped_ratio_db(st, ei + ea)};
}

}  // namespace retmsep
