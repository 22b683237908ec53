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

#include "retmsep/covariance.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <mutex>

#include "retmsep/errors.hpp"
#include "retmsep/parallel.hpp"

namespace retmsep {
namespace {

constexpr std::uint32_t kMagic = 0x52534356;  // "RSCV"
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "serialization assumes a little-endian host");

void check_same_shape(const CovariancePair& a, const CovariancePair& b,
                      const char* op) {
  if (a.bins != b.bins || a.q_a != b.q_a || a.q_b != b.q_b) {
    throw ContractViolation(std::string(op) + ": shape mismatch, (" +
                            std::to_string(a.bins) + " bins, " +
                            std::to_string(a.q_a) + "x" +
                            std::to_string(a.q_b) + ") vs (" +
                            std::to_string(b.bins) + " bins, " +
                            std::to_string(b.q_a) + "x" +
                            std::to_string(b.q_b) + ")");
  }
}

void hermitize(ComplexMatrix& m) {
  m = ((m + m.adjoint()) * 0.5).eval();
}

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in, const std::string& file) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw InputError("truncated covariance file: " + file);
  return v;
}

void write_matrix(std::ofstream& out, const ComplexMatrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const Complex v = m(i, j);
      write_pod(out, v);
    }
  }
}

ComplexMatrix read_matrix(std::ifstream& in, int rows, int cols,
                          const std::string& file) {
  ComplexMatrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      m(i, j) = read_pod<Complex>(in, file);
    }
  }
  return m;
}

}  // namespace

CovariancePair estimate(const SpectralFrames& frames_a,
                        const SpectralFrames& frames_b, long frame_begin,
                        long frame_end) {
  if (frames_a.bins != frames_b.bins || frames_a.frames != frames_b.frames ||
      frames_a.window_len != frames_b.window_len ||
      frames_a.hop != frames_b.hop) {
    throw ContractViolation(
        "estimate: group A and B frames are not aligned (" +
        std::to_string(frames_a.bins) + "/" + std::to_string(frames_a.frames) +
        " vs " + std::to_string(frames_b.bins) + "/" +
        std::to_string(frames_b.frames) + ")");
  }
  if (frame_end < 0) frame_end = frames_a.frames;
  if (frame_begin < 0 || frame_begin >= frame_end ||
      frame_end > frames_a.frames) {
    throw ContractViolation("estimate: empty or invalid frame range [" +
                            std::to_string(frame_begin) + ", " +
                            std::to_string(frame_end) + ")");
  }

  const long frame_count = frame_end - frame_begin;
  CovariancePair cov;
  cov.bins = frames_a.bins;
  cov.q_a = frames_a.channels;
  cov.q_b = frames_b.channels;
  cov.frame_count = frame_count;
  cov.p_aa.assign(static_cast<std::size_t>(cov.bins), ComplexMatrix());
  cov.p_ba.assign(static_cast<std::size_t>(cov.bins), ComplexMatrix());

  const double inv_t = 1.0 / static_cast<double>(frame_count);
  parallel_for(static_cast<std::size_t>(cov.bins), [&](std::size_t f) {
    const auto a = frames_a.data[f].middleCols(frame_begin, frame_count);
    const auto b = frames_b.data[f].middleCols(frame_begin, frame_count);
    ComplexMatrix paa = (a * a.adjoint()) * inv_t;
    hermitize(paa);
    cov.p_aa[f] = std::move(paa);
    cov.p_ba[f] = (b * a.adjoint()) * inv_t;
  });
  return cov;
}

CovariancePair subtract(const CovariancePair& full, const CovariancePair& part) {
  check_same_shape(full, part, "subtract");
  CovariancePair out;
  out.bins = full.bins;
  out.q_a = full.q_a;
  out.q_b = full.q_b;
  out.frame_count = full.frame_count;
  out.p_aa.assign(static_cast<std::size_t>(out.bins), ComplexMatrix());
  out.p_ba.assign(static_cast<std::size_t>(out.bins), ComplexMatrix());

  std::vector<std::uint8_t> warn(static_cast<std::size_t>(out.bins), 0);
  parallel_for(static_cast<std::size_t>(out.bins), [&](std::size_t f) {
    ComplexMatrix paa = full.p_aa[f] - part.p_aa[f];
    hermitize(paa);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(paa,
                                                     Eigen::EigenvaluesOnly);
    const double trace = paa.real().trace();
    if (eig.info() == Eigen::Success &&
        eig.eigenvalues().minCoeff() < -1e-6 * std::abs(trace)) {
      warn[f] = 1;
    }
    out.p_aa[f] = std::move(paa);
    out.p_ba[f] = full.p_ba[f] - part.p_ba[f];
  });
  for (int f = 0; f < out.bins; ++f) {
    if (warn[static_cast<std::size_t>(f)]) out.warned_bins.push_back(f);
  }
  return out;
}

CovariancePair add(const CovariancePair& a, const CovariancePair& b) {
  check_same_shape(a, b, "add");
  CovariancePair out;
  out.bins = a.bins;
  out.q_a = a.q_a;
  out.q_b = a.q_b;
  out.frame_count = std::min(a.frame_count, b.frame_count);
  out.p_aa.resize(static_cast<std::size_t>(out.bins));
  out.p_ba.resize(static_cast<std::size_t>(out.bins));
  for (int f = 0; f < out.bins; ++f) {
    const auto sf = static_cast<std::size_t>(f);
    out.p_aa[sf] = a.p_aa[sf] + b.p_aa[sf];
    out.p_ba[sf] = a.p_ba[sf] + b.p_ba[sf];
  }
  return out;
}

void save_covariance(const std::filesystem::path& path,
                     const CovariancePair& cov) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open for writing: " + path.string());
  write_pod(out, kMagic);
  write_pod(out, kVersion);
  write_pod(out, static_cast<std::uint32_t>(cov.bins));
  write_pod(out, static_cast<std::uint32_t>(cov.q_a));
  write_pod(out, static_cast<std::uint32_t>(cov.q_b));
  write_pod(out, static_cast<std::uint64_t>(cov.frame_count));
  write_pod(out, static_cast<std::uint32_t>(cov.warned_bins.size()));
  for (int w : cov.warned_bins) write_pod(out, static_cast<std::uint32_t>(w));
  for (int f = 0; f < cov.bins; ++f) {
    write_matrix(out, cov.p_aa[static_cast<std::size_t>(f)]);
    write_matrix(out, cov.p_ba[static_cast<std::size_t>(f)]);
  }
  if (!out) throw InputError("write failed: " + path.string());
}

CovariancePair load_covariance(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open covariance file: " + path.string());
  const std::string file = path.string();
  if (read_pod<std::uint32_t>(in, file) != kMagic) {
    throw InputError("not a covariance file: " + file);
  }
  const std::uint32_t version = read_pod<std::uint32_t>(in, file);
  if (version != kVersion) {
    throw InputError("unsupported covariance file version " +
                     std::to_string(version) + " in " + file);
  }
  CovariancePair cov;
  cov.bins = static_cast<int>(read_pod<std::uint32_t>(in, file));
  cov.q_a = static_cast<int>(read_pod<std::uint32_t>(in, file));
  cov.q_b = static_cast<int>(read_pod<std::uint32_t>(in, file));
  cov.frame_count = static_cast<long>(read_pod<std::uint64_t>(in, file));
  const std::uint32_t warn_count = read_pod<std::uint32_t>(in, file);
  for (std::uint32_t i = 0; i < warn_count; ++i) {
    cov.warned_bins.push_back(
        static_cast<int>(read_pod<std::uint32_t>(in, file)));
  }
  cov.p_aa.resize(static_cast<std::size_t>(cov.bins));
  cov.p_ba.resize(static_cast<std::size_t>(cov.bins));
  for (int f = 0; f < cov.bins; ++f) {
    cov.p_aa[static_cast<std::size_t>(f)] =
        read_matrix(in, cov.q_a, cov.q_a, file);
    cov.p_ba[static_cast<std::size_t>(f)] =
        read_matrix(in, cov.q_b, cov.q_a, file);
  }
  return cov;
}

}  // namespace retmsep
