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

#include "real_fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <mutex>

#include "retmsep/errors.hpp"

namespace retmsep {
namespace {
std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

RealFft::RealFft(int n) : n_(n) {
  if (n < 2) throw ContractViolation("RealFft: size must be at least 2");
  real_ = fftw_alloc_real(static_cast<std::size_t>(n));
  fftw_complex* c = fftw_alloc_complex(static_cast<std::size_t>(n / 2 + 1));
  cplx_ = c;
  std::lock_guard<std::mutex> lock(plan_mutex());
  plan_fwd_ = fftw_plan_dft_r2c_1d(n, real_, c, FFTW_ESTIMATE);
  plan_inv_ = fftw_plan_dft_c2r_1d(n, c, real_, FFTW_ESTIMATE);
  if (!plan_fwd_ || !plan_inv_) {
    throw NumericalFailure("RealFft: FFTW plan creation failed for size " +
                           std::to_string(n));
  }
}

RealFft::~RealFft() {
  std::lock_guard<std::mutex> lock(plan_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(plan_inv_));
  fftw_free(real_);
  fftw_free(cplx_);
}

void RealFft::forward(const double* in, std::complex<double>* out) {
  std::memcpy(real_, in, sizeof(double) * static_cast<std::size_t>(n_));
  fftw_execute(static_cast<fftw_plan>(plan_fwd_));
  std::memcpy(out, cplx_,
              sizeof(std::complex<double>) * static_cast<std::size_t>(bins()));
}

void RealFft::inverse(const std::complex<double>* in, double* out) {
  std::memcpy(cplx_, in,
              sizeof(std::complex<double>) * static_cast<std::size_t>(bins()));
  fftw_execute(static_cast<fftw_plan>(plan_inv_));
  const double scale = 1.0 / n_;
  for (int i = 0; i < n_; ++i) out[i] = real_[i] * scale;
}

long next_pow2(long n) {
  long p = 1;
  while (p < n) p <<= 1;
  return p;
}

Eigen::VectorXd fft_convolve(const Eigen::VectorXd& a,
                             const Eigen::VectorXd& b) {
  const long na = a.size(), nb = b.size();
  if (na == 0 || nb == 0) return Eigen::VectorXd();
  const long full = na + nb - 1;
  const long n = std::max<long>(2, next_pow2(full));

  RealFft fft(static_cast<int>(n));
  std::vector<double> pad(static_cast<std::size_t>(n), 0.0);
  std::vector<std::complex<double>> fa(fft.bins()), fb(fft.bins());

  std::memcpy(pad.data(), a.data(), sizeof(double) * na);
  fft.forward(pad.data(), fa.data());
  std::fill(pad.begin(), pad.end(), 0.0);
  std::memcpy(pad.data(), b.data(), sizeof(double) * nb);
  fft.forward(pad.data(), fb.data());

  for (int i = 0; i < fft.bins(); ++i) fa[i] *= fb[i];
  fft.inverse(fa.data(), pad.data());

  Eigen::VectorXd out(full);
  std::memcpy(out.data(), pad.data(), sizeof(double) * full);
  return out;
}

Eigen::VectorXd cross_correlation(const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& y, int max_lag) {
  if (max_lag < 1) throw ContractViolation("cross_correlation: max_lag >= 1");
  const long nx = x.size(), ny = y.size();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(2 * max_lag - 1);
  if (nx == 0 || ny == 0) return out;

  const long n = std::max<long>(2, next_pow2(nx + ny));
  RealFft fft(static_cast<int>(n));
  std::vector<double> pad(static_cast<std::size_t>(n), 0.0);
  std::vector<std::complex<double>> fx(fft.bins()), fy(fft.bins());

  std::memcpy(pad.data(), x.data(), sizeof(double) * nx);
  fft.forward(pad.data(), fx.data());
  std::fill(pad.begin(), pad.end(), 0.0);
  std::memcpy(pad.data(), y.data(), sizeof(double) * ny);
  fft.forward(pad.data(), fy.data());

  for (int i = 0; i < fft.bins(); ++i) fx[i] = std::conj(fx[i]) * fy[i];
  fft.inverse(fx.data(), pad.data());

  // pad[k] = sum_n x[n] y[n + k] circularly; negative lags wrap to the top.
  for (int tau = -(max_lag - 1); tau <= max_lag - 1; ++tau) {
    const long idx = tau >= 0 ? tau : n + tau;
    out(max_lag - 1 + tau) = pad[static_cast<std::size_t>(idx)];
  }
  return out;
}

}  // namespace retmsep
