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

// Acceptance suite. Each criterion prints one PASS/FAIL line; the process
// exits nonzero if any requested criterion fails.
//
//   acceptance           runs all seven criteria
//   acceptance 2 5       runs criteria 2 and 5

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "oracle.hpp"
#include "retmsep/covariance.hpp"
#include "retmsep/linalg.hpp"
#include "retmsep/metrics.hpp"
#include "retmsep/pipeline.hpp"
#include "retmsep/retm.hpp"
#include "retmsep/roomsim.hpp"
#include "retmsep/scenario.hpp"
#include "retmsep/separation.hpp"
#include "retmsep/stft.hpp"

using namespace retmsep;
namespace fs = std::filesystem;

namespace {

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

fs::path work_dir(int criterion) {
  const fs::path dir = fs::temp_directory_path() /
                       ("retmsep_acceptance_" + std::to_string(criterion));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path scenario_path() {
  return fs::path(RETMSEP_SCENARIO_DIR) / "desk_12mic.json";
}

double max_bin_residual(const Retm& got,
                        const std::vector<ComplexMatrix>& want) {
  double worst = 0.0;
  for (int f = 0; f < got.bins; ++f) {
    const auto sf = static_cast<std::size_t>(f);
    worst = std::max(worst,
                     (got.matrices[sf] - want[sf]).norm() / want[sf].norm());
  }
  return worst;
}

// Criterion 1: every estimator reproduces the definition-level relative
// transfer matrix of its source subset on analytic covariances.
Check criterion_1() {
  Check check;
  const int bins = 12;
  double worst = 0.0;
  for (int sources = 3; sources <= 5; ++sources) {
    Rng rng(500 + static_cast<std::uint64_t>(sources));
    const int q_a = sources + 2;
    const int q_b = sources + 3;
    const test::OracleScene scene =
        test::random_scene(bins, q_a, q_b, sources, rng, 3.0);
    const int n_noise = 2;
    std::vector<int> all, speech, noise;
    for (int l = 0; l < sources; ++l) {
      all.push_back(l);
      (l < sources - n_noise ? speech : noise).push_back(l);
    }

    const CovariancePair cov_all = test::oracle_cov(scene, all);
    const CovariancePair cov_noise = test::oracle_cov(scene, noise);

    worst = std::max(worst,
                     max_bin_residual(estimate_direct(cov_all),
                                      test::definition_retm_subset(scene, all)));
    worst = std::max(
        worst, max_bin_residual(estimate_by_subtraction(cov_all, cov_noise),
                                test::definition_retm_subset(scene, speech)));
    worst = std::max(worst, max_bin_residual(
                                estimate_noise_retm(cov_noise),
                                test::definition_retm_subset(scene, noise)));

    std::vector<CovariancePair> parts;
    for (int l : all) parts.push_back(test::oracle_cov(scene, {l}));
    std::vector<CovariancePair> pair_parts = {parts[0], parts[1]};
    worst = std::max(worst,
                     max_bin_residual(estimate_subset(pair_parts),
                                      test::definition_retm_subset(scene, {0, 1})));

    std::vector<CovariancePair> noise_plus;
    for (int spk : speech) {
      std::vector<int> set = noise;
      set.push_back(spk);
      noise_plus.push_back(test::oracle_cov(scene, set));
    }
    for (std::size_t target = 0; target < speech.size(); ++target) {
      std::vector<int> undesired = noise;
      for (std::size_t s = 0; s < speech.size(); ++s) {
        if (s != target) undesired.push_back(speech[s]);
      }
      worst = std::max(
          worst,
          max_bin_residual(
              estimate_undesired_for_speaker(cov_noise, noise_plus,
                                             static_cast<int>(target)),
              test::definition_retm_subset(scene, undesired)));
    }
  }
  char buf[128];
  std::snprintf(buf, sizeof(buf), "worst per-bin residual %.3e", worst);
  check.detail = buf;
  check.require(worst < 1e-8, "residual must be below 1e-8");
  return check;
}

// Criterion 2: relative transfer matrices of disjoint source sets are not
// additive in at least 90 of 100 seeded instances.
Check criterion_2() {
  Check check;
  int exceeded = 0;
  for (int trial = 0; trial < 100; ++trial) {
    Rng rng(9000 + static_cast<std::uint64_t>(trial));
    const test::OracleScene scene = test::random_scene(1, 4, 6, 3, rng);
    const Retm r_s = estimate_direct(test::oracle_cov(scene, {0, 1}));
    const Retm r_n = estimate_direct(test::oracle_cov(scene, {2}));
    const Retm r_total = estimate_direct(test::oracle_cov(scene, {0, 1, 2}));
    const std::vector<double> disc = check_nonadditivity(r_s, r_n, r_total);
    if (disc.front() > 0.1) ++exceeded;
  }
  check.detail = "discrepancy above 0.1 in " + std::to_string(exceeded) +
                 " of 100 instances";
  check.require(exceeded >= 90, "at least 90 instances must exceed 0.1");
  return check;
}

// Criterion 3: covariances of independent stationary sources add, within
// statistical tolerance at 10000 frames.
Check criterion_3() {
  Check check;
  Rng scene_rng(77);
  const test::OracleScene scene = test::random_scene(8, 6, 9, 3, scene_rng);
  const int t = 10000;

  Rng rng_solo(4242), rng_mix(4242);
  std::vector<CovariancePair> solos;
  test::FramePair mix;
  for (int l = 0; l < 3; ++l) {
    const auto take = test::synthetic_frames(scene, {l}, t, rng_solo);
    solos.push_back(estimate(take.a, take.b));
    const auto same = test::synthetic_frames(scene, {l}, t, rng_mix);
    if (l == 0) {
      mix = same;
    } else {
      for (int f = 0; f < mix.a.bins; ++f) {
        const auto sf = static_cast<std::size_t>(f);
        mix.a.data[sf] += same.a.data[sf];
        mix.b.data[sf] += same.b.data[sf];
      }
    }
  }
  const CovariancePair sum = add(add(solos[0], solos[1]), solos[2]);
  const CovariancePair mixture = estimate(mix.a, mix.b);

  double num = 0.0, den = 0.0;
  for (int f = 0; f < sum.bins; ++f) {
    const auto sf = static_cast<std::size_t>(f);
    num += (mixture.p_aa[sf] - sum.p_aa[sf]).squaredNorm() +
           (mixture.p_ba[sf] - sum.p_ba[sf]).squaredNorm();
    den += mixture.p_aa[sf].squaredNorm() + mixture.p_ba[sf].squaredNorm();
  }
  const double rel = std::sqrt(num / den);
  char buf[128];
  std::snprintf(buf, sizeof(buf), "relative Frobenius error %.4f at T=%d", rel,
                t);
  check.detail = buf;
  check.require(rel < 0.05, "error must be below 5%");
  return check;
}

// Criterion 4: with the definition-level undesired-source matrix, leakage of
// the undesired sources into the extracted signal stays below -80 dB per bin.
Check criterion_4() {
  Check check;
  Rng rng(88);
  const test::OracleScene scene = test::random_scene(32, 4, 8, 3, rng);
  const std::vector<int> undesired = {1, 2};  // target 0 stays silent
  const auto frames = test::synthetic_frames(scene, undesired, 200, rng);

  Retm oracle;
  oracle.bins = 32;
  oracle.q_a = 4;
  oracle.q_b = 8;
  oracle.matrices = test::definition_retm_subset(scene, undesired);
  oracle.failed.assign(32, 0);

  const SeparationOutput out = extract(frames.a, frames.b, oracle);
  double worst_db = -1e9;
  for (int f = 0; f < 32; ++f) {
    const auto sf = static_cast<std::size_t>(f);
    const double leak =
        out.frames.data[sf].squaredNorm() / frames.a.data[sf].squaredNorm();
    worst_db = std::max(worst_db, 10.0 * std::log10(std::max(leak, 1e-300)));
  }
  char buf[128];
  std::snprintf(buf, sizeof(buf), "worst per-bin leakage %.1f dB", worst_db);
  check.detail = buf;
  check.require(worst_db < -80.0, "leakage must stay below -80 dB");
  return check;
}

struct DeskRun {
  std::map<std::string, EvalResult> training;
  std::map<std::string, EvalResult> direct;
  std::map<std::string, EvalResult> unprocessed;
};

// One full desk-scale run at the given SNR: simulate once, separate with the
// calibration (training) estimator and optionally the direct baseline.
DeskRun desk_run(const fs::path& dir, double snr_db, bool with_direct) {
  SimulateOptions sim;
  sim.scenario_path = scenario_path();
  sim.out_dir = dir / "sim";
  sim.snr_db = snr_db;
  const SimulateResult simulated = run_simulate(sim);

  DeskRun run;
  const auto do_method = [&](Method method,
                             std::map<std::string, EvalResult>& rows) {
    SeparateConfig cfg =
        config_from_manifest(simulated.manifests.front(), method);
    cfg.out_dir = dir / ("sep_" + method_name(method));
    const SeparateResult sep = run_separate(cfg);

    EvaluateOptions ev;
    ev.manifest = simulated.manifests.front();
    ev.separation = sep.separation_manifest;
    ev.out_csv = dir / ("report_" + method_name(method) + ".csv");
    const EvaluateResult result = run_evaluate(ev);
    for (const auto& row : result.processed) rows[row.speaker] = row;
    for (const auto& row : result.unprocessed) {
      run.unprocessed[row.speaker] = row;
    }
  };
  do_method(Method::Training, run.training);
  if (with_direct) do_method(Method::Direct, run.direct);
  return run;
}

// Criterion 5: desk-scale separation quality and the agreement between the
// calibration estimator and the direct baseline.
Check criterion_5() {
  Check check;
  const DeskRun run = desk_run(work_dir(5), 0.0, true);
  std::string detail;
  for (const auto& [spk, row] : run.training) {
    const EvalResult& direct = run.direct.at(spk);
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "%s: training dSIR %.2f dSDR %.2f | direct dSIR %.2f",
                  spk.c_str(), row.sir_improvement_db, row.sdr_improvement_db,
                  direct.sir_improvement_db);
    if (!detail.empty()) detail += "; ";
    detail += buf;

    check.require(row.sir_improvement_db >= 15.0,
                  spk + ": training SIR improvement must be >= 15 dB");
    check.require(row.sdr_improvement_db >= 5.0,
                  spk + ": training SDR improvement must be >= 5 dB");
    check.require(direct.sir_improvement_db >= 15.0,
                  spk + ": direct SIR improvement must be >= 15 dB");
    check.require(std::abs(row.sir_db - direct.sir_db) <= 1.0,
                  spk + ": training and direct SIR must agree within 1 dB");
  }
  check.detail = detail + (check.detail.empty() ? "" : "; " + check.detail);
  return check;
}

// Criterion 6: the SIR improvement of criterion 5's method holds up across
// lower SNR levels (degradation below 3 dB).
Check criterion_6() {
  Check check;
  const fs::path dir = work_dir(6);
  std::map<double, double> mean_improvement;
  for (double snr : {0.0, -5.0, -10.0}) {
    char sub[32];
    std::snprintf(sub, sizeof(sub), "snr_%g", snr);
    const DeskRun run = desk_run(dir / sub, snr, false);
    double acc = 0.0;
    for (const auto& [spk, row] : run.training) acc += row.sir_improvement_db;
    mean_improvement[snr] = acc / static_cast<double>(run.training.size());
  }
  char buf[192];
  std::snprintf(buf, sizeof(buf),
                "mean SIR improvement: %.2f dB at 0, %.2f dB at -5, %.2f dB "
                "at -10",
                mean_improvement[0.0], mean_improvement[-5.0],
                mean_improvement[-10.0]);
  check.detail = buf;
  for (double snr : {-5.0, -10.0}) {
    check.require(mean_improvement[0.0] - mean_improvement[snr] < 3.0,
                  "degradation at " + std::to_string(snr) +
                      " dB must stay below 3 dB");
  }
  return check;
}

// Criterion 7: numerical foundations at their stated tolerances.
Check criterion_7() {
  Check check;

  // Penrose conditions below 1e-10.
  {
    Rng rng(404);
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
      const ComplexMatrix m = test::random_complex_matrix(5, 7, rng);
      const ComplexMatrix p = pseudoinverse(m);
      const ComplexMatrix mp = m * p;
      const ComplexMatrix pm = p * m;
      worst = std::max({worst, (m * p * m - m).norm() / m.norm(),
                        (p * m * p - p).norm() / p.norm(),
                        (mp - mp.adjoint()).norm() / std::max(1.0, mp.norm()),
                        (pm - pm.adjoint()).norm() / std::max(1.0, pm.norm())});
    }
    check.require(worst < 1e-10, "Penrose residuals must be below 1e-10");
    char buf[64];
    std::snprintf(buf, sizeof(buf), "penrose %.1e", worst);
    check.detail += buf;
  }

  // STFT round trip below 1e-6 on the interior.
  {
    Rng rng(405);
    const long n = 16 * 8192;
    AudioBuffer in;
    in.sample_rate = 16000.0;
    in.samples.resize(1, n);
    for (long i = 0; i < n; ++i) in.samples(0, i) = rng.gaussian();
    const AudioBuffer out = synthesize(analyze(in, 8192, 4096));
    const long lo = 8192, hi = std::min<long>(n, out.length()) - 8192;
    const double err =
        (out.samples.row(0).segment(lo, hi - lo) -
         in.samples.row(0).segment(lo, hi - lo)).norm() /
        in.samples.row(0).segment(lo, hi - lo).norm();
    check.require(err < 1e-6, "STFT round-trip error must be below 1e-6");
    char buf[64];
    std::snprintf(buf, sizeof(buf), ", stft %.1e", err);
    check.detail += buf;
  }

  // Metrics energy conservation below 1e-9.
  {
    Rng rng(406);
    std::vector<Eigen::VectorXd> refs;
    for (int k = 0; k < 2; ++k) {
      Eigen::VectorXd r(12000);
      for (long i = 0; i < r.size(); ++i) r(i) = rng.gaussian();
      refs.push_back(r);
    }
    Eigen::VectorXd est = refs[0] + 0.3 * refs[1];
    for (long i = 0; i < est.size(); ++i) est(i) += 0.05 * rng.gaussian();
    const Decomposition d = decompose(est, refs, 0, 128);
    const double total = d.target.squaredNorm() + d.interference.squaredNorm() +
                         d.artifact.squaredNorm();
    const double err = std::abs(total - est.squaredNorm()) / est.squaredNorm();
    check.require(err < 1e-9, "energy conservation must hold to 1e-9");
    char buf[64];
    std::snprintf(buf, sizeof(buf), ", energy %.1e", err);
    check.detail += buf;
  }

  // SNR calibration within 0.1 dB of the request.
  {
    Scenario sc = load_scenario(scenario_path());
    for (auto& seg : sc.segments) seg.duration_s = seg.eval ? 4.0 : 3.0;
    sc.snr_db = -7.5;
    const RenderResult rendered = render_mixture(sc);
    const double err = std::abs(rendered.achieved_snr_db + 7.5);
    check.require(err < 0.1, "achieved SNR must match the request to 0.1 dB");
    char buf[64];
    std::snprintf(buf, sizeof(buf), ", snr %.2e dB", err);
    check.detail += buf;
  }

  return check;
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::pair<std::string, std::function<Check()>>> criteria =
      {{1, {"oracle algebra reproduces the definition (< 1e-8)", criterion_1}},
       {2, {"relative transfer matrices are not additive (>= 90/100)",
            criterion_2}},
       {3, {"covariance additivity of independent sources (< 5%)",
            criterion_3}},
       {4, {"oracle cancellation leakage (< -80 dB per bin)", criterion_4}},
       {5, {"desk-scale separation quality and method agreement",
            criterion_5}},
       {6, {"SIR improvement robust across SNR levels (< 3 dB drop)",
            criterion_6}},
       {7, {"numerical foundations at stated tolerances", criterion_7}}};

  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  if (selected.empty()) {
    for (const auto& [n, _] : criteria) selected.push_back(n);
  }

  int failures = 0;
  for (int n : selected) {
    const auto it = criteria.find(n);
    if (it == criteria.end()) {
      std::fprintf(stderr, "unknown criterion %d\n", n);
      return 2;
    }
    const auto start = std::chrono::steady_clock::now();
    Check result;
    try {
      result = it->second.second();
    } catch (const std::exception& e) {
      result.ok = false;
      result.detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    std::printf("[%s] criterion %d: %s (%.1f s) -- %s\n",
                result.ok ? "PASS" : "FAIL", n, it->second.first.c_str(), secs,
                result.detail.c_str());
    std::fflush(stdout);
    failures += !result.ok;
  }
  return failures == 0 ? 0 : 1;
}
