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

#ifndef RETMSEP_REAL_FFT_HPP_
#define RETMSEP_REAL_FFT_HPP_

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace retmsep {

// Real-to-complex FFT of a fixed size, backed by FFTW. Plan creation is
// serialized internally (FFTW planning is not thread safe); forward/inverse
// on distinct instances may run concurrently.
class RealFft {
 public:
  explicit RealFft(int n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  int size() const { return n_; }
  int bins() const { return n_ / 2 + 1; }

  // out has n/2+1 entries; unnormalized.
  void forward(const double* in, std::complex<double>* out);
  // in has n/2+1 entries; output scaled by 1/n so inverse(forward(x)) == x.
  void inverse(const std::complex<double>* in, double* out);

 private:
  int n_;
  double* real_;
  void* cplx_;  // fftw_complex*
  void* plan_fwd_;
  void* plan_inv_;
};

// Full linear convolution (length na + nb - 1) via zero-padded FFT.
Eigen::VectorXd fft_convolve(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// c(tau) = sum_n x[n] * y[n + tau] for tau in [-(max_lag-1), max_lag-1],
// zero-padded at the edges. Entry [max_lag - 1 + tau] holds lag tau.
Eigen::VectorXd cross_correlation(const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& y, int max_lag);

long next_pow2(long n);

}  // namespace retmsep

#endif  // RETMSEP_REAL_FFT_HPP_
