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

#ifndef RETMSEP_ROOMSIM_HPP_
#define RETMSEP_ROOMSIM_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace retmsep {

struct Room {
  Eigen::Vector3d dimensions = {0, 0, 0};  // meters
  double t60 = 0.0;                        // seconds; 0 means anechoic
  double speed_of_sound = 343.0;           // m/s
  int max_reflection_order = -1;           // -1: unlimited within the RIR span
};

enum class SourceKind { Speech, Noise };

// Source material: either a mono WAV file or a named synthetic signal.
struct SignalSpec {
  std::string path;   // WAV file; empty when synth is used
  std::string synth;  // synth_signal type; empty when path is used
  std::uint64_t seed = 0;
};

struct SourceSpec {
  std::string name;
  SourceKind kind = SourceKind::Speech;
  Eigen::Vector3d position = {0, 0, 0};
  SignalSpec signal;
};

// A contiguous stretch of the session timeline rendered as its own take.
// Sources consume their material along the global timeline whether audible
// or not, so every segment hears fresh signal content.
struct Segment {
  std::string name;
  double duration_s = 0.0;
  std::vector<std::string> active;  // source names audible in this segment
  bool eval = false;                // segment scored by the metrics stage
};

struct Scenario {
  std::string name;
  double sample_rate = 16000.0;
  std::uint64_t seed = 0;
  Room room;
  std::vector<SourceSpec> sources;
  std::vector<Eigen::Vector3d> microphones;
  std::vector<int> group_a;
  std::vector<int> group_b;
  double snr_db = 0.0;
  // White sensor noise per microphone, relative to the received signal.
  // A non-finite or >= 200 dB value disables it.
  double sensor_noise_snr_db = 40.0;
  bool normalize_sources = true;
  std::optional<double> noise_gain_override;  // skips SNR calibration
  std::vector<Segment> segments;

  void validate() const;
  int source_index(const std::string& name) const;
  std::vector<std::string> speaker_names() const;
  std::vector<std::string> noise_names() const;
  int eval_segment_index() const;  // marked segment, else the last one
  long rir_length() const;         // ceil(t60 * sample_rate)
};

// Allen-Berkley image-source room impulse response with frequency-independent
// wall reflectance derived from t60, delays rounded to the nearest sample.
// Positions must lie strictly inside the room and apart from each other.
std::vector<double> generate_rir(const Room& room,
                                 const Eigen::Vector3d& source,
                                 const Eigen::Vector3d& mic,
                                 double sample_rate);

struct SegmentRender {
  std::string name;
  Eigen::MatrixXd mixture;  // mics x samples, gains and sensor noise applied
  // Per-source clean images (mics x samples, gains applied, no sensor
  // noise); populated for the eval segment, or everywhere when requested.
  std::vector<Eigen::MatrixXd> images;
};

struct RenderResult {
  std::vector<SegmentRender> segments;
  int eval_segment = -1;
  double noise_gain = 1.0;      // common scale applied to all noise sources
  double achieved_snr_db = 0.0; // recomputed from the rendered eval images
  std::map<std::string, double> source_gains;  // per-source normalization
  std::vector<double> sensor_noise_std;        // per microphone
};

struct RenderOptions {
  bool keep_all_images = false;
};

// Renders every segment: per-source images convolved through the room,
// noise gain solved so the per-mic speech-to-noise ratio averages to
// snr_db over all microphones, then seeded sensor noise.
RenderResult render_mixture(const Scenario& scenario,
                            const RenderOptions& options = {});

}  // namespace retmsep

#endif  // RETMSEP_ROOMSIM_HPP_
