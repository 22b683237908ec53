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

#ifndef RETMSEP_PIPELINE_HPP_
#define RETMSEP_PIPELINE_HPP_

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "retmsep/metrics.hpp"
#include "retmsep/separation.hpp"

namespace retmsep {

// How the per-speaker undesired-source ReTM is assembled:
//   Direct      - one undesired-only recording per speaker
//   Subtraction - session mixture minus the target speaker's own statistics
//   Subset      - summed per-source statistics from solo recordings
//   Training    - noise-only plus noise-plus-speaker calibration recordings
enum class Method { Direct, Subtraction, Subset, Training };

Method parse_method(const std::string& name);
std::string method_name(Method method);

// ---------------------------------------------------------------- simulate

struct SimulateOptions {
  std::filesystem::path scenario_path;
  std::filesystem::path out_dir;
  std::optional<double> snr_db;          // overrides the scenario value
  std::optional<std::uint64_t> seed;     // overrides the scenario value
  std::vector<double> snr_sweep;         // one manifest per entry when set
};

struct SimulateResult {
  std::vector<std::filesystem::path> manifests;
  std::vector<double> achieved_snr_db;
};

SimulateResult run_simulate(const SimulateOptions& options);

// ---------------------------------------------------------------- separate

// A calibration or session input: a WAV plus an optional STFT frame range
// [frame_begin, frame_end) within it (-1 = to the end), so segments can be
// separate recordings or slices of one long recording.
struct SegmentRef {
  std::filesystem::path wav;
  long frame_begin = 0;
  long frame_end = -1;
};

struct SeparateConfig {
  Method method = Method::Training;
  int window_len = 8192;
  int hop = 0;  // 0 selects window_len / 2
  double pinv_tolerance = -1.0;
  std::filesystem::path out_dir;
  ReconstructMode reconstruct = ReconstructMode::ReferenceChannel;
  bool reuse = false;  // load persisted ReTMs when provenance matches
  std::vector<int> group_a, group_b;
  std::vector<std::string> speakers;
  std::vector<std::string> noise_sources;
  SegmentRef mixture;
  std::optional<SegmentRef> noise_only;
  std::map<std::string, SegmentRef> noise_plus;      // per speaker
  std::map<std::string, SegmentRef> undesired_only;  // per speaker
  std::map<std::string, SegmentRef> solo;            // per source
  long rir_length = 0;  // informative; enables the window-length warning
};

// Wires a config from a simulate manifest by classifying segments through
// their active-source sets (noise only, noise plus one speaker, all but one
// speaker, solo, full mixture).
SeparateConfig config_from_manifest(const std::filesystem::path& manifest,
                                    Method method);

SeparateConfig load_separate_config(const std::filesystem::path& path);

struct SeparateResult {
  std::filesystem::path separation_manifest;
  std::map<std::string, std::filesystem::path> speaker_wavs;
  std::map<std::string, int> failed_bins;
};

SeparateResult run_separate(const SeparateConfig& config);

// ---------------------------------------------------------------- evaluate

struct EvaluateOptions {
  std::filesystem::path manifest;    // simulate manifest (ground truth)
  std::filesystem::path separation;  // separation manifest, or empty when
                                     // estimates are given explicitly
  std::map<std::string, std::filesystem::path> estimates;
  std::string method_label;          // used with explicit estimates
  std::filesystem::path out_csv;
  int filter_len = 512;
  int window_len = 8192;  // edge exclusion when no separation manifest
};

struct EvaluateResult {
  std::filesystem::path csv;
  std::vector<EvalResult> unprocessed;
  std::vector<EvalResult> processed;
  std::string method_label;
};

EvaluateResult run_evaluate(const EvaluateOptions& options);

// ---------------------------------------------------------------- pipeline

struct PipelineOptions {
  std::filesystem::path scenario_path;
  std::filesystem::path out_dir;
  Method method = Method::Training;
  int window_len = 8192;
  int hop = 0;
  double pinv_tolerance = -1.0;
  ReconstructMode reconstruct = ReconstructMode::ReferenceChannel;
  std::optional<double> snr_db;
  std::optional<std::uint64_t> seed;
  int filter_len = 512;
};

struct PipelineResult {
  std::filesystem::path manifest;
  SeparateResult separation;
  EvaluateResult evaluation;
};

PipelineResult run_pipeline(const PipelineOptions& options);

}  // namespace retmsep

#endif  // RETMSEP_PIPELINE_HPP_
