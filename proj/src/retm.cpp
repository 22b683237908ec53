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

#include "retmsep/retm.hpp"

#include <bit>
#include <fstream>
#include <functional>
#include <limits>

#include <json.hpp>

#include "retmsep/errors.hpp"
#include "retmsep/parallel.hpp"

namespace retmsep {
namespace {

constexpr std::uint32_t kMagic = 0x52535254;  // "RSRT"
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "serialization assumes a little-endian host");

// Shared core: per bin R = S_AA * pinv(S_BA), where the per-bin statistics
// come from `assemble`. Failed bins are flagged and zeroed; more than half
// failing is a hard error.
Retm estimate_from(
    int bins, int q_a, int q_b, double tol, const std::string& method,
    const std::function<void(int, ComplexMatrix&, ComplexMatrix&)>& assemble) {
  Retm retm;
  retm.bins = bins;
  retm.q_a = q_a;
  retm.q_b = q_b;
  retm.matrices.assign(static_cast<std::size_t>(bins), ComplexMatrix());
  retm.failed.assign(static_cast<std::size_t>(bins), 0);
  retm.provenance["method"] = method;
  retm.provenance["tol"] = std::to_string(tol);

  parallel_for(static_cast<std::size_t>(bins), [&](std::size_t f) {
    ComplexMatrix s_aa, s_ba;
    assemble(static_cast<int>(f), s_aa, s_ba);
    try {
      if (!all_finite(s_aa) || !all_finite(s_ba)) {
        throw NumericalFailure("non-finite covariance");
      }
      retm.matrices[f] = matmul(s_aa, pseudoinverse(s_ba, tol));
    } catch (const NumericalFailure&) {
      retm.matrices[f] = ComplexMatrix::Zero(q_a, q_b);
      retm.failed[f] = 1;
    }
  });

  const int failed = retm.failed_count();
  if (2 * failed > bins) {
    throw NumericalFailure("ReTM estimation (" + method + ") failed at " +
                           std::to_string(failed) + " of " +
                           std::to_string(bins) + " bins");
  }
  return retm;
}

void check_compatible(const CovariancePair& a, const CovariancePair& b,
                     const char* op) {
  if (a.bins != b.bins || a.q_a != b.q_a || a.q_b != b.q_b) {
    throw ContractViolation(std::string(op) + ": covariance shapes differ");
  }
}

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in, const std::string& file) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw InputError("truncated ReTM file: " + file);
  return v;
}

}  // namespace

int Retm::failed_count() const {
  int n = 0;
  for (std::uint8_t f : failed) n += f;
  return n;
}

Retm estimate_direct(const CovariancePair& cov, double tol) {
  return estimate_from(cov.bins, cov.q_a, cov.q_b, tol, "direct",
                       [&](int f, ComplexMatrix& s_aa, ComplexMatrix& s_ba) {
                         s_aa = cov.p_aa[static_cast<std::size_t>(f)];
                         s_ba = cov.p_ba[static_cast<std::size_t>(f)];
                       });
}

Retm estimate_by_subtraction(const CovariancePair& full,
                             const CovariancePair& noise, double tol) {
  check_compatible(full, noise, "estimate_by_subtraction");
  const CovariancePair diff = subtract(full, noise);
  Retm retm = estimate_direct(diff, tol);
  retm.provenance["method"] = "subtraction";
  return retm;
}

Retm estimate_noise_retm(const CovariancePair& noise, double tol) {
  Retm retm = estimate_direct(noise, tol);
  retm.provenance["method"] = "noise";
  return retm;
}

Retm estimate_subset(const std::vector<CovariancePair>& parts, double tol) {
  if (parts.empty()) {
    throw ContractViolation("estimate_subset: no covariance parts given");
  }
  CovariancePair sum = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) {
    sum = add(sum, parts[i]);
  }
  Retm retm = estimate_direct(sum, tol);
  retm.provenance["method"] = "subset";
  retm.provenance["parts"] = std::to_string(parts.size());
  return retm;
}

Retm estimate_undesired_for_speaker(const CovariancePair& noise_only,
                                    const std::vector<CovariancePair>& noise_plus,
                                    int target, double tol) {
  if (target < 0 || target >= static_cast<int>(noise_plus.size())) {
    throw ContractViolation("estimate_undesired_for_speaker: target " +
                            std::to_string(target) + " out of range for " +
                            std::to_string(noise_plus.size()) + " speakers");
  }
  for (const auto& pair : noise_plus) {
    check_compatible(noise_only, pair, "estimate_undesired_for_speaker");
  }

  // Sum of (noise-plus-speaker minus noise) over non-target speakers, with
  // the noise statistics added back exactly once.
  CovariancePair acc = noise_only;
  for (std::size_t l = 0; l < noise_plus.size(); ++l) {
    if (static_cast<int>(l) == target) continue;
    acc = add(acc, subtract(noise_plus[l], noise_only));
  }
  Retm retm = estimate_direct(acc, tol);
  retm.provenance["method"] = "training";
  retm.provenance["target"] = std::to_string(target);
  retm.provenance["speakers"] = std::to_string(noise_plus.size());
  return retm;
}

std::vector<double> check_nonadditivity(const Retm& r_s, const Retm& r_n,
                                        const Retm& r_total) {
  if (r_s.bins != r_n.bins || r_s.bins != r_total.bins ||
      r_s.q_a != r_n.q_a || r_s.q_a != r_total.q_a || r_s.q_b != r_n.q_b ||
      r_s.q_b != r_total.q_b) {
    throw ContractViolation("check_nonadditivity: shape mismatch");
  }
  std::vector<double> out(static_cast<std::size_t>(r_s.bins), 0.0);
  for (int f = 0; f < r_s.bins; ++f) {
    const auto sf = static_cast<std::size_t>(f);
    const double num =
        (r_s.matrices[sf] + r_n.matrices[sf] - r_total.matrices[sf]).norm();
    const double den = r_total.matrices[sf].norm();
    if (den > 0) {
      out[sf] = num / den;
    } else {
      out[sf] = num > 0 ? std::numeric_limits<double>::infinity() : 0.0;
    }
  }
  return out;
}

void save_retm(const std::filesystem::path& path, const Retm& retm) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open for writing: " + path.string());
  write_pod(out, kMagic);
  write_pod(out, kVersion);
  write_pod(out, static_cast<std::uint32_t>(retm.bins));
  write_pod(out, static_cast<std::uint32_t>(retm.q_a));
  write_pod(out, static_cast<std::uint32_t>(retm.q_b));
  const std::string prov = nlohmann::json(retm.provenance).dump();
  write_pod(out, static_cast<std::uint32_t>(prov.size()));
  out.write(prov.data(), static_cast<std::streamsize>(prov.size()));
  out.write(reinterpret_cast<const char*>(retm.failed.data()),
            static_cast<std::streamsize>(retm.failed.size()));
  for (int f = 0; f < retm.bins; ++f) {
    const ComplexMatrix& m = retm.matrices[static_cast<std::size_t>(f)];
    for (int i = 0; i < retm.q_a; ++i) {
      for (int j = 0; j < retm.q_b; ++j) {
        const Complex v = m(i, j);
        write_pod(out, v);
      }
    }
  }
  if (!out) throw InputError("write failed: " + path.string());
}

Retm load_retm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open ReTM file: " + path.string());
  const std::string file = path.string();
  if (read_pod<std::uint32_t>(in, file) != kMagic) {
    throw InputError("not a ReTM file: " + file);
  }
  const std::uint32_t version = read_pod<std::uint32_t>(in, file);
  if (version != kVersion) {
    throw InputError("unsupported ReTM file version " +
                     std::to_string(version) + " in " + file);
  }
  Retm retm;
  retm.bins = static_cast<int>(read_pod<std::uint32_t>(in, file));
  retm.q_a = static_cast<int>(read_pod<std::uint32_t>(in, file));
  retm.q_b = static_cast<int>(read_pod<std::uint32_t>(in, file));
  const std::uint32_t prov_len = read_pod<std::uint32_t>(in, file);
  std::string prov(prov_len, '\0');
  in.read(prov.data(), prov_len);
  if (!in) throw InputError("truncated ReTM file: " + file);
  try {
    const auto j = nlohmann::json::parse(prov);
    retm.provenance = j.get<std::map<std::string, std::string>>();
  } catch (const nlohmann::json::exception&) {
    throw InputError("corrupt provenance in ReTM file: " + file);
  }
  retm.failed.resize(static_cast<std::size_t>(retm.bins));
  in.read(reinterpret_cast<char*>(retm.failed.data()),
          static_cast<std::streamsize>(retm.failed.size()));
  if (!in) throw InputError("truncated ReTM file: " + file);
  retm.matrices.resize(static_cast<std::size_t>(retm.bins));
  for (int f = 0; f < retm.bins; ++f) {
    ComplexMatrix m(retm.q_a, retm.q_b);
    for (int i = 0; i < retm.q_a; ++i) {
      for (int j = 0; j < retm.q_b; ++j) {
        m(i, j) = read_pod<Complex>(in, file);
      }
    }
    retm.matrices[static_cast<std::size_t>(f)] = std::move(m);
  }
  return retm;
}

}  // namespace retmsep
