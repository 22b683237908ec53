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

#include "retmsep/roomsim.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "real_fft.hpp"
#include "retmsep/audio_io.hpp"
#include "retmsep/errors.hpp"
#include "retmsep/parallel.hpp"
#include "retmsep/rng.hpp"
#include "retmsep/signals.hpp"

namespace retmsep {
namespace {

bool inside_room(const Room& room, const Eigen::Vector3d& p) {
  for (int i = 0; i < 3; ++i) {
    if (!(p(i) > 0.0 && p(i) < room.dimensions(i))) return false;
  }
  return true;
}

std::string pos_string(const Eigen::Vector3d& p) {
  return "(" + std::to_string(p(0)) + ", " + std::to_string(p(1)) + ", " +
         std::to_string(p(2)) + ")";
}

// Uniform wall reflectance from the target reverberation time. Eyring form:
// under the image-source model it lands the -60 dB point at t60, where plain
// Sabine absorption decays ~20% early at desk-room absorption levels.
double wall_reflectance(const Room& room) {
  const Eigen::Vector3d& d = room.dimensions;
  const double volume = d(0) * d(1) * d(2);
  const double surface = 2.0 * (d(0) * d(1) + d(0) * d(2) + d(1) * d(2));
  const double sabine_alpha = 0.161 * volume / (surface * room.t60);
  if (sabine_alpha > 1.0) {
    throw InfeasibleScenario(
        "t60 " + std::to_string(room.t60) +
        " s is too small for this room (required absorption exceeds 1)");
  }
  const double alpha = 1.0 - std::exp(-sabine_alpha);
  return std::sqrt(1.0 - alpha);
}

double mean_db_ratio(const Eigen::VectorXd& num, const Eigen::VectorXd& den) {
  double acc = 0.0;
  for (long q = 0; q < num.size(); ++q) {
    acc += 10.0 * std::log10(num(q) / den(q));
  }
  return acc / static_cast<double>(num.size());
}

}  // namespace

void Scenario::validate() const {
  if (sample_rate <= 0) throw InputError("scenario: sample_rate must be positive");
  for (int i = 0; i < 3; ++i) {
    if (room.dimensions(i) <= 0) {
      throw InputError("scenario: room dimensions must be positive");
    }
  }
  if (room.t60 < 0) throw InputError("scenario: t60 must be non-negative");
  if (sources.empty()) throw InputError("scenario: at least one source required");
  if (microphones.empty()) throw InputError("scenario: no microphones");

  std::set<std::string> names;
  for (const auto& s : sources) {
    if (s.name.empty()) throw InputError("scenario: source without a name");
    if (!names.insert(s.name).second) {
      throw InputError("scenario: duplicate source name '" + s.name + "'");
    }
    if (!inside_room(room, s.position)) {
      throw InputError("scenario: source '" + s.name +
                       "' lies outside the room at " + pos_string(s.position));
    }
    if (s.signal.path.empty() == s.signal.synth.empty()) {
      throw InputError("scenario: source '" + s.name +
                       "' needs exactly one of a WAV path or a synth type");
    }
  }
  for (std::size_t q = 0; q < microphones.size(); ++q) {
    if (!inside_room(room, microphones[q])) {
      throw InputError("scenario: microphone " + std::to_string(q) +
                       " lies outside the room at " +
                       pos_string(microphones[q]));
    }
  }

  std::set<int> a(group_a.begin(), group_a.end());
  std::set<int> b(group_b.begin(), group_b.end());
  if (a.size() != group_a.size() || b.size() != group_b.size()) {
    throw InputError("scenario: duplicate microphone index in a group");
  }
  for (int idx : a) {
    if (b.count(idx)) {
      throw InputError("scenario: groups A and B overlap at microphone " +
                       std::to_string(idx));
    }
  }
  if (a.size() + b.size() != microphones.size()) {
    throw InputError("scenario: groups A and B must cover every microphone");
  }
  for (int idx : group_a) {
    if (idx < 0 || idx >= static_cast<int>(microphones.size())) {
      throw InputError("scenario: group A index out of range");
    }
  }
  for (int idx : group_b) {
    if (idx < 0 || idx >= static_cast<int>(microphones.size())) {
      throw InputError("scenario: group B index out of range");
    }
  }
  if (group_a.empty() || group_b.empty()) {
    throw InputError("scenario: both microphone groups must be non-empty");
  }
  // The relative transfer matrix of any modeled source subset is inverted
  // through group B, so B must not be smaller than the source count.
  if (group_b.size() < sources.size()) {
    throw InputError("scenario: group B has " + std::to_string(group_b.size()) +
                     " microphones but " + std::to_string(sources.size()) +
                     " sources are modeled");
  }

  if (segments.empty()) throw InputError("scenario: no segments");
  std::set<std::string> seg_names;
  for (const auto& seg : segments) {
    if (seg.name.empty()) throw InputError("scenario: segment without a name");
    if (!seg_names.insert(seg.name).second) {
      throw InputError("scenario: duplicate segment name '" + seg.name + "'");
    }
    if (seg.duration_s <= 0) {
      throw InputError("scenario: segment '" + seg.name +
                       "' must have positive duration");
    }
    for (const auto& src : seg.active) {
      if (!names.count(src)) {
        throw InputError("scenario: segment '" + seg.name +
                         "' references unknown source '" + src + "'");
      }
    }
  }
}

int Scenario::source_index(const std::string& src) const {
  for (std::size_t i = 0; i < sources.size(); ++i) {
    if (sources[i].name == src) return static_cast<int>(i);
  }
  throw InputError("scenario: unknown source '" + src + "'");
}

std::vector<std::string> Scenario::speaker_names() const {
  std::vector<std::string> out;
  for (const auto& s : sources) {
    if (s.kind == SourceKind::Speech) out.push_back(s.name);
  }
  return out;
}

std::vector<std::string> Scenario::noise_names() const {
  std::vector<std::string> out;
  for (const auto& s : sources) {
    if (s.kind == SourceKind::Noise) out.push_back(s.name);
  }
  return out;
}

int Scenario::eval_segment_index() const {
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (segments[i].eval) return static_cast<int>(i);
  }
  return static_cast<int>(segments.size()) - 1;
}

long Scenario::rir_length() const {
  return static_cast<long>(std::ceil(room.t60 * sample_rate));
}

std::vector<double> generate_rir(const Room& room,
                                 const Eigen::Vector3d& source,
                                 const Eigen::Vector3d& mic,
                                 double sample_rate) {
  for (int i = 0; i < 3; ++i) {
    if (room.dimensions(i) <= 0) {
      throw ContractViolation("generate_rir: room dimensions must be positive");
    }
  }
  if (room.t60 < 0) throw ContractViolation("generate_rir: t60 must be >= 0");
  if (sample_rate <= 0) {
    throw ContractViolation("generate_rir: sample rate must be positive");
  }
  if (!inside_room(room, source)) {
    throw ContractViolation("generate_rir: source outside the room at " +
                            pos_string(source));
  }
  if (!inside_room(room, mic)) {
    throw ContractViolation("generate_rir: microphone outside the room at " +
                            pos_string(mic));
  }
  const double direct_dist = (source - mic).norm();
  if (direct_dist < 1e-3) {
    throw ContractViolation(
        "generate_rir: source and microphone coincide (distance " +
        std::to_string(direct_dist) + " m)");
  }

  const double c = room.speed_of_sound;
  const double samples_per_meter = sample_rate / c;
  const long direct_delay = std::lround(direct_dist * samples_per_meter);

  if (room.t60 == 0.0) {
    std::vector<double> rir(static_cast<std::size_t>(direct_delay) + 1, 0.0);
    rir[static_cast<std::size_t>(direct_delay)] =
        1.0 / (4.0 * M_PI * direct_dist);
    return rir;
  }

  const double beta = wall_reflectance(room);
  long nsamples = static_cast<long>(std::ceil(room.t60 * sample_rate));
  nsamples = std::max(nsamples, direct_delay + 1);
  std::vector<double> rir(static_cast<std::size_t>(nsamples), 0.0);

  // Image lattice bounds: images further than the RIR span cannot land.
  const Eigen::Vector3d L = room.dimensions * samples_per_meter;
  const Eigen::Vector3d s = source * samples_per_meter;
  const Eigen::Vector3d r = mic * samples_per_meter;
  const int n1 = static_cast<int>(std::ceil(nsamples / (2.0 * L(0))));
  const int n2 = static_cast<int>(std::ceil(nsamples / (2.0 * L(1))));
  const int n3 = static_cast<int>(std::ceil(nsamples / (2.0 * L(2))));

  const int order = room.max_reflection_order;
  for (int mx = -n1; mx <= n1; ++mx) {
    for (int my = -n2; my <= n2; ++my) {
      for (int mz = -n3; mz <= n3; ++mz) {
        for (int q = 0; q <= 1; ++q) {
          for (int j = 0; j <= 1; ++j) {
            for (int k = 0; k <= 1; ++k) {
              if (order >= 0 && std::abs(2 * mx - q) + std::abs(2 * my - j) +
                                        std::abs(2 * mz - k) > order) {
                continue;
              }
              const double dx = (1 - 2 * q) * s(0) - r(0) + 2.0 * mx * L(0);
              const double dy = (1 - 2 * j) * s(1) - r(1) + 2.0 * my * L(1);
              const double dz = (1 - 2 * k) * s(2) - r(2) + 2.0 * mz * L(2);
              const double dist = std::sqrt(dx * dx + dy * dy + dz * dz);
              const long idx = std::lround(dist);
              if (idx >= nsamples) continue;
              const int hits = std::abs(mx - q) + std::abs(mx) +
                               std::abs(my - j) + std::abs(my) +
                               std::abs(mz - k) + std::abs(mz);
              const double refl = std::pow(beta, hits);
              const double dist_m = dist / samples_per_meter;
              rir[static_cast<std::size_t>(idx)] +=
                  refl / (4.0 * M_PI * std::max(dist_m, 1e-3));
            }
          }
        }
      }
    }
  }
  return rir;
}

RenderResult render_mixture(const Scenario& scenario,
                            const RenderOptions& options) {
  scenario.validate();
  const double fs = scenario.sample_rate;
  const int n_mics = static_cast<int>(scenario.microphones.size());
  const int n_src = static_cast<int>(scenario.sources.size());

  // Segment sample layout along the global timeline.
  std::vector<long> seg_len, seg_start;
  long total = 0;
  for (const auto& seg : scenario.segments) {
    seg_start.push_back(total);
    const long len = static_cast<long>(std::llround(seg.duration_s * fs));
    seg_len.push_back(len);
    total += len;
  }

  // Source material for the whole timeline.
  std::vector<Eigen::VectorXd> material(static_cast<std::size_t>(n_src));
  std::map<std::string, double> source_gains;
  for (int l = 0; l < n_src; ++l) {
    const SourceSpec& src = scenario.sources[static_cast<std::size_t>(l)];
    Eigen::VectorXd sig;
    if (!src.signal.synth.empty()) {
      sig = synth_signal(src.signal.synth, total, fs, src.signal.seed);
    } else {
      AudioBuffer buf = read_wav(src.signal.path);
      if (buf.sample_rate != fs) buf = resample(buf, fs);
      if (buf.length() < total) {
        throw InputError("source file too short: " + src.signal.path + " has " +
                         std::to_string(buf.length()) + " samples, " +
                         std::to_string(total) + " needed");
      }
      sig = buf.samples.row(0).head(total).transpose();
    }
    double gain = 1.0;
    if (scenario.normalize_sources) {
      const double rms = std::sqrt(sig.squaredNorm() / std::max<long>(1, total));
      if (rms <= 0) {
        throw InputError("source '" + src.name + "' is silent");
      }
      gain = 1.0 / rms;
    }
    material[static_cast<std::size_t>(l)] = gain * sig;
    source_gains[src.name] = gain;
  }

  // Room impulse responses for every (source, mic) pair.
  std::vector<std::vector<Eigen::VectorXd>> rir(
      static_cast<std::size_t>(n_src),
      std::vector<Eigen::VectorXd>(static_cast<std::size_t>(n_mics)));
  parallel_for(static_cast<std::size_t>(n_src * n_mics), [&](std::size_t i) {
    const int l = static_cast<int>(i) / n_mics;
    const int q = static_cast<int>(i) % n_mics;
    const std::vector<double> h = generate_rir(
        scenario.room, scenario.sources[static_cast<std::size_t>(l)].position,
        scenario.microphones[static_cast<std::size_t>(q)], fs);
    rir[static_cast<std::size_t>(l)][static_cast<std::size_t>(q)] =
        Eigen::Map<const Eigen::VectorXd>(h.data(),
                                          static_cast<long>(h.size()));
  });

  // Per-source images of one segment (own take: convolution from rest).
  auto render_images = [&](int seg_idx) {
    const Segment& seg = scenario.segments[static_cast<std::size_t>(seg_idx)];
    const long len = seg_len[static_cast<std::size_t>(seg_idx)];
    const long start = seg_start[static_cast<std::size_t>(seg_idx)];
    std::vector<Eigen::MatrixXd> images(static_cast<std::size_t>(n_src));
    for (const std::string& name : seg.active) {
      const int l = scenario.source_index(name);
      images[static_cast<std::size_t>(l)].setZero(n_mics, len);
    }
    std::vector<std::pair<int, int>> jobs;
    for (const std::string& name : seg.active) {
      const int l = scenario.source_index(name);
      for (int q = 0; q < n_mics; ++q) jobs.emplace_back(l, q);
    }
    parallel_for(jobs.size(), [&](std::size_t i) {
      const auto [l, q] = jobs[i];
      const Eigen::VectorXd slice =
          material[static_cast<std::size_t>(l)].segment(start, len);
      const Eigen::VectorXd y =
          fft_convolve(slice, rir[static_cast<std::size_t>(l)][static_cast<std::size_t>(q)]);
      images[static_cast<std::size_t>(l)].row(q) = y.head(len).transpose();
    });
    return images;
  };

  const int eval_idx = scenario.eval_segment_index();
  std::vector<Eigen::MatrixXd> eval_images = render_images(eval_idx);

  // Noise gain from the eval segment: mean over mics of the per-mic
  // speech-to-noise ratio in dB must equal snr_db.
  const auto is_noise = [&](int l) {
    return scenario.sources[static_cast<std::size_t>(l)].kind ==
           SourceKind::Noise;
  };
  double noise_gain = 1.0;
  double achieved_snr_db = 0.0;
  {
    const long len = seg_len[static_cast<std::size_t>(eval_idx)];
    Eigen::VectorXd p_speech = Eigen::VectorXd::Zero(n_mics);
    Eigen::VectorXd p_noise = Eigen::VectorXd::Zero(n_mics);
    Eigen::MatrixXd speech_sum = Eigen::MatrixXd::Zero(n_mics, len);
    Eigen::MatrixXd noise_sum = Eigen::MatrixXd::Zero(n_mics, len);
    for (int l = 0; l < n_src; ++l) {
      const auto& img = eval_images[static_cast<std::size_t>(l)];
      if (img.size() == 0) continue;
      (is_noise(l) ? noise_sum : speech_sum) += img;
    }
    for (int q = 0; q < n_mics; ++q) {
      p_speech(q) = speech_sum.row(q).squaredNorm();
      p_noise(q) = noise_sum.row(q).squaredNorm();
    }
    if (scenario.noise_gain_override.has_value()) {
      noise_gain = *scenario.noise_gain_override;
      if (p_speech.minCoeff() > 0 && p_noise.minCoeff() > 0 && noise_gain > 0) {
        achieved_snr_db =
            mean_db_ratio(p_speech, p_noise) - 20.0 * std::log10(noise_gain);
      }
    } else {
      if (p_speech.minCoeff() <= 0 || p_noise.minCoeff() <= 0) {
        throw InputError(
            "cannot calibrate SNR: eval segment needs active speech and "
            "noise energy at every microphone");
      }
      const double current_db = mean_db_ratio(p_speech, p_noise);
      noise_gain = std::pow(10.0, (current_db - scenario.snr_db) / 20.0);
      achieved_snr_db = current_db - 20.0 * std::log10(noise_gain);
    }
  }

  // Sensor noise level per mic from the eval-segment mixture.
  const bool sensor_on = std::isfinite(scenario.sensor_noise_snr_db) &&
                         scenario.sensor_noise_snr_db < 200.0;
  std::vector<double> sensor_std(static_cast<std::size_t>(n_mics), 0.0);
  if (sensor_on) {
    const long len = seg_len[static_cast<std::size_t>(eval_idx)];
    for (int q = 0; q < n_mics; ++q) {
      Eigen::VectorXd mix = Eigen::VectorXd::Zero(len);
      for (int l = 0; l < n_src; ++l) {
        const auto& img = eval_images[static_cast<std::size_t>(l)];
        if (img.size() == 0) continue;
        mix += (is_noise(l) ? noise_gain : 1.0) * img.row(q).transpose();
      }
      const double rms = std::sqrt(mix.squaredNorm() / std::max<long>(1, len));
      sensor_std[static_cast<std::size_t>(q)] =
          rms * std::pow(10.0, -scenario.sensor_noise_snr_db / 20.0);
    }
  }

  RenderResult result;
  result.eval_segment = eval_idx;
  result.noise_gain = noise_gain;
  result.achieved_snr_db = achieved_snr_db;
  result.source_gains = source_gains;
  result.sensor_noise_std = sensor_std;
  result.segments.resize(scenario.segments.size());

  for (std::size_t si = 0; si < scenario.segments.size(); ++si) {
    const int seg_idx = static_cast<int>(si);
    std::vector<Eigen::MatrixXd> images =
        seg_idx == eval_idx ? std::move(eval_images) : render_images(seg_idx);
    const long len = seg_len[si];

    // Apply the noise gain so stored images are the actual contributions.
    for (int l = 0; l < n_src; ++l) {
      auto& img = images[static_cast<std::size_t>(l)];
      if (img.size() != 0 && is_noise(l)) img *= noise_gain;
    }

    SegmentRender& out = result.segments[si];
    out.name = scenario.segments[si].name;
    out.mixture.setZero(n_mics, len);
    for (int l = 0; l < n_src; ++l) {
      const auto& img = images[static_cast<std::size_t>(l)];
      if (img.size() != 0) out.mixture += img;
    }
    if (sensor_on) {
      for (int q = 0; q < n_mics; ++q) {
        Rng rng = Rng::derive(scenario.seed, "sensor",
                              static_cast<std::uint64_t>(q) * 131071u +
                                  static_cast<std::uint64_t>(seg_idx));
        const double std_q = sensor_std[static_cast<std::size_t>(q)];
        for (long n = 0; n < len; ++n) {
          out.mixture(q, n) += std_q * rng.gaussian();
        }
      }
    }
    if (seg_idx == eval_idx || options.keep_all_images) {
      out.images = std::move(images);
    }
  }

  return result;
}

}  // namespace retmsep
