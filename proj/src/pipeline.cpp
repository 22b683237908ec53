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

#include "retmsep/pipeline.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>

#include <json.hpp>

#include "retmsep/audio_io.hpp"
#include "retmsep/errors.hpp"
#include "retmsep/scenario.hpp"

namespace retmsep {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr const char* kManifestSchema = "retmsep.manifest.v1";
constexpr const char* kSepConfigSchema = "retmsep.sepconfig.v1";
constexpr const char* kSepManifestSchema = "retmsep.separation.v1";
constexpr const char* kCsvHeader =
    "schema_version,scenario,snr_db,speaker,method,sir_db,sdr_db,"
    "sir_improvement_db,sdr_improvement_db,stoi";

std::string sanitize(const std::string& name) {
  std::string out;
  for (char c : name) {
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_')
               ? c
               : '_';
  }
  return out.empty() ? std::string("x") : out;
}

std::string format_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h = (h ^ c) * 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Exclusive lock on an output directory for the duration of a command.
class DirLock {
 public:
  explicit DirLock(const fs::path& dir) : path_(dir / ".retmsep.lock") {
    fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd_ < 0) {
      throw InputError("output directory is locked by another run: " +
                       dir.string() + " (remove " + path_.string() +
                       " if stale)");
    }
  }
  ~DirLock() {
    if (fd_ >= 0) {
      ::close(fd_);
      std::error_code ec;
      fs::remove(path_, ec);
    }
  }
  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;

 private:
  fs::path path_;
  int fd_ = -1;
};

json load_json_file(const fs::path& path, const char* what) {
  std::ifstream in(path);
  if (!in) {
    throw InputError(std::string("cannot open ") + what + ": " + path.string());
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InputError(std::string("invalid JSON in ") + path.string() + ": " +
                     e.what());
  }
  return j;
}

void check_schema(const json& j, const char* expected, const fs::path& path) {
  if (j.value("schema", std::string()) != expected) {
    throw InputError("expected schema '" + std::string(expected) + "' in " +
                     path.string());
  }
}

fs::path resolve(const fs::path& base_dir, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base_dir / path;
}

SegmentRef segment_ref_from_json(const json& j, const fs::path& base_dir) {
  SegmentRef ref;
  ref.wav = resolve(base_dir, j.at("wav").get<std::string>());
  if (j.contains("frames")) {
    const auto& fr = j.at("frames");
    if (!fr.is_array() || fr.size() != 2) {
      throw InputError("segment 'frames' must be [begin, end)");
    }
    ref.frame_begin = fr[0].get<long>();
    ref.frame_end = fr[1].get<long>();
  }
  return ref;
}

std::string ref_key(const SegmentRef& ref) {
  return ref.wav.string() + ":" + std::to_string(ref.frame_begin) + ":" +
         std::to_string(ref.frame_end);
}

// ------------------------------------------------------------------ simulate

SimulateResult simulate_once(const Scenario& scenario, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  DirLock lock(out_dir);

  RenderResult rendered = render_mixture(scenario);

  json manifest;
  manifest["schema"] = kManifestSchema;
  manifest["scenario"] = scenario_to_json(scenario);
  manifest["sample_rate"] = scenario.sample_rate;
  manifest["snr_db"] = scenario.snr_db;
  manifest["achieved_snr_db"] = rendered.achieved_snr_db;
  manifest["noise_gain"] = rendered.noise_gain;
  manifest["source_gains"] = rendered.source_gains;
  manifest["sensor_noise_std"] = rendered.sensor_noise_std;
  manifest["rir_length"] = scenario.rir_length();
  manifest["group_a"] = scenario.group_a;
  manifest["group_b"] = scenario.group_b;
  manifest["speakers"] = scenario.speaker_names();
  manifest["noise_sources"] = scenario.noise_names();

  const int eval_idx = rendered.eval_segment;
  manifest["eval_segment"] =
      scenario.segments[static_cast<std::size_t>(eval_idx)].name;

  json segments = json::array();
  for (std::size_t si = 0; si < rendered.segments.size(); ++si) {
    const SegmentRender& seg = rendered.segments[si];
    const std::string wav_name = sanitize(seg.name) + ".wav";
    AudioBuffer buf;
    buf.sample_rate = scenario.sample_rate;
    buf.samples = seg.mixture;
    write_wav(out_dir / wav_name, buf, SampleFormat::Float32);
    segments.push_back(
        {{"name", seg.name},
         {"wav", wav_name},
         {"active", scenario.segments[si].active},
         {"duration_s", scenario.segments[si].duration_s},
         {"samples", static_cast<long>(seg.mixture.cols())}});
  }
  manifest["segments"] = segments;

  fs::create_directories(out_dir / "images");
  json images = json::object();
  const SegmentRender& eval_seg =
      rendered.segments[static_cast<std::size_t>(eval_idx)];
  for (std::size_t l = 0; l < scenario.sources.size(); ++l) {
    const auto& img = eval_seg.images[l];
    if (img.size() == 0) continue;
    const std::string name = scenario.sources[l].name;
    const std::string rel =
        "images/" + sanitize(eval_seg.name) + "_" + sanitize(name) + ".wav";
    AudioBuffer buf;
    buf.sample_rate = scenario.sample_rate;
    buf.samples = img;
    write_wav(out_dir / rel, buf, SampleFormat::Float32);
    images[name] = rel;
  }
  manifest["images"] = images;

  const fs::path manifest_path = out_dir / "manifest.json";
  std::ofstream out(manifest_path);
  out << manifest.dump(2) << "\n";
  if (!out) throw InputError("write failed: " + manifest_path.string());

  SimulateResult result;
  result.manifests.push_back(manifest_path);
  result.achieved_snr_db.push_back(rendered.achieved_snr_db);
  return result;
}

}  // namespace

Method parse_method(const std::string& name) {
  if (name == "direct") return Method::Direct;
  if (name == "subtraction") return Method::Subtraction;
  if (name == "subset") return Method::Subset;
  if (name == "training") return Method::Training;
  throw InputError("unknown method '" + name +
                   "' (expected direct|subtraction|subset|training)");
}

std::string method_name(Method method) {
  switch (method) {
    case Method::Direct: return "direct";
    case Method::Subtraction: return "subtraction";
    case Method::Subset: return "subset";
    case Method::Training: return "training";
  }
  return "unknown";
}

SimulateResult run_simulate(const SimulateOptions& options) {
  Scenario scenario = load_scenario(options.scenario_path);
  if (options.seed) scenario.seed = *options.seed;
  if (options.snr_db) scenario.snr_db = *options.snr_db;

  if (options.snr_sweep.empty()) {
    return simulate_once(scenario, options.out_dir);
  }

  SimulateResult all;
  for (double snr : options.snr_sweep) {
    Scenario sc = scenario;
    sc.snr_db = snr;
    const fs::path sub = options.out_dir / ("snr_" + format_g(snr));
    SimulateResult one = simulate_once(sc, sub);
    all.manifests.push_back(one.manifests.front());
    all.achieved_snr_db.push_back(one.achieved_snr_db.front());
  }
  return all;
}

// ------------------------------------------------------------------ separate

SeparateConfig config_from_manifest(const fs::path& manifest_path,
                                    Method method) {
  const json m = load_json_file(manifest_path, "simulate manifest");
  check_schema(m, kManifestSchema, manifest_path);
  const fs::path base = manifest_path.parent_path();

  SeparateConfig cfg;
  cfg.method = method;
  cfg.group_a = m.at("group_a").get<std::vector<int>>();
  cfg.group_b = m.at("group_b").get<std::vector<int>>();
  cfg.speakers = m.at("speakers").get<std::vector<std::string>>();
  cfg.noise_sources = m.at("noise_sources").get<std::vector<std::string>>();
  cfg.rir_length = m.value("rir_length", 0L);

  const std::set<std::string> noise_set(cfg.noise_sources.begin(),
                                        cfg.noise_sources.end());
  std::set<std::string> all_set(cfg.speakers.begin(), cfg.speakers.end());
  all_set.insert(noise_set.begin(), noise_set.end());
  const std::string eval_name = m.at("eval_segment").get<std::string>();

  for (const json& seg : m.at("segments")) {
    const std::string name = seg.at("name").get<std::string>();
    const auto active_list = seg.at("active").get<std::vector<std::string>>();
    const std::set<std::string> active(active_list.begin(), active_list.end());
    SegmentRef ref;
    ref.wav = resolve(base, seg.at("wav").get<std::string>());

    if (name == eval_name) {
      cfg.mixture = ref;
      continue;
    }
    if (active == noise_set) {
      if (!cfg.noise_only) cfg.noise_only = ref;
      continue;
    }
    if (active.size() == 1 && all_set.count(*active.begin())) {
      cfg.solo.emplace(*active.begin(), ref);
      continue;
    }
    // noise set plus exactly one speaker?
    for (const std::string& spk : cfg.speakers) {
      std::set<std::string> want = noise_set;
      want.insert(spk);
      if (active == want && !cfg.noise_plus.count(spk)) {
        cfg.noise_plus.emplace(spk, ref);
      }
      std::set<std::string> undesired = all_set;
      undesired.erase(spk);
      if (active == undesired && !cfg.undesired_only.count(spk)) {
        cfg.undesired_only.emplace(spk, ref);
      }
    }
  }
  return cfg;
}

SeparateConfig load_separate_config(const fs::path& path) {
  const json j = load_json_file(path, "separation config");
  check_schema(j, kSepConfigSchema, path);
  const fs::path base = path.parent_path();

  SeparateConfig cfg;
  cfg.method = parse_method(j.value("method", std::string("training")));
  cfg.window_len = j.value("window_len", 8192);
  cfg.hop = j.value("hop", 0);
  cfg.pinv_tolerance = j.value("pinv_tolerance", -1.0);
  if (j.contains("out_dir")) {
    cfg.out_dir = resolve(base, j.at("out_dir").get<std::string>());
  }
  const std::string rec = j.value("reconstruct", std::string("reference"));
  if (rec == "reference") {
    cfg.reconstruct = ReconstructMode::ReferenceChannel;
  } else if (rec == "average") {
    cfg.reconstruct = ReconstructMode::Average;
  } else {
    throw InputError("reconstruct must be 'reference' or 'average'");
  }
  cfg.group_a = j.at("group_a").get<std::vector<int>>();
  cfg.group_b = j.at("group_b").get<std::vector<int>>();
  cfg.speakers = j.at("speakers").get<std::vector<std::string>>();
  if (j.contains("noise_sources")) {
    cfg.noise_sources = j.at("noise_sources").get<std::vector<std::string>>();
  }
  cfg.mixture = segment_ref_from_json(j.at("mixture"), base);
  if (j.contains("noise_only")) {
    cfg.noise_only = segment_ref_from_json(j.at("noise_only"), base);
  }
  for (const char* key : {"noise_plus", "undesired_only", "solo"}) {
    if (!j.contains(key)) continue;
    for (const auto& [name, val] : j.at(key).items()) {
      SegmentRef ref = segment_ref_from_json(val, base);
      if (std::string(key) == "noise_plus") cfg.noise_plus.emplace(name, ref);
      if (std::string(key) == "undesired_only") cfg.undesired_only.emplace(name, ref);
      if (std::string(key) == "solo") cfg.solo.emplace(name, ref);
    }
  }
  return cfg;
}

namespace {

void validate_separate_config(const SeparateConfig& cfg) {
  if (cfg.out_dir.empty()) throw InputError("separate: out_dir is required");
  if (cfg.speakers.empty()) throw InputError("separate: no speakers listed");
  if (cfg.group_a.empty() || cfg.group_b.empty()) {
    throw InputError("separate: both microphone groups are required");
  }
  if (cfg.mixture.wav.empty()) throw InputError("separate: mixture missing");

  const std::string mname = method_name(cfg.method);
  auto need_per_speaker = [&](const std::map<std::string, SegmentRef>& map,
                              const char* what) {
    for (const auto& spk : cfg.speakers) {
      if (!map.count(spk)) {
        throw InputError("separate: method '" + mname + "' requires a " +
                         what + " segment for speaker '" + spk + "'");
      }
    }
  };
  switch (cfg.method) {
    case Method::Training:
    case Method::Subtraction:
      if (!cfg.noise_only) {
        throw InputError("separate: method '" + mname +
                         "' requires a noise-only segment");
      }
      need_per_speaker(cfg.noise_plus, "noise-plus-speaker");
      break;
    case Method::Direct:
      need_per_speaker(cfg.undesired_only, "undesired-only");
      break;
    case Method::Subset: {
      std::vector<std::string> all = cfg.speakers;
      all.insert(all.end(), cfg.noise_sources.begin(), cfg.noise_sources.end());
      for (const auto& src : all) {
        if (!cfg.solo.count(src)) {
          throw InputError(
              "separate: method 'subset' requires a solo segment for source '" +
              src + "'");
        }
      }
      break;
    }
  }
}

std::string config_fingerprint(const SeparateConfig& cfg) {
  std::string s = method_name(cfg.method);
  s += "|w=" + std::to_string(cfg.window_len) + "|h=" + std::to_string(cfg.hop);
  char tol[32];
  std::snprintf(tol, sizeof(tol), "%.17g", cfg.pinv_tolerance);
  s += std::string("|tol=") + tol;
  s += "|rec=" +
       std::to_string(cfg.reconstruct == ReconstructMode::Average ? 1 : 0);
  s += "|a=";
  for (int g : cfg.group_a) s += std::to_string(g) + ",";
  s += "|b=";
  for (int g : cfg.group_b) s += std::to_string(g) + ",";
  s += "|mix=" + ref_key(cfg.mixture);
  if (cfg.noise_only) s += "|noise=" + ref_key(*cfg.noise_only);
  for (const auto& [k, v] : cfg.noise_plus) s += "|np:" + k + "=" + ref_key(v);
  for (const auto& [k, v] : cfg.undesired_only) s += "|uo:" + k + "=" + ref_key(v);
  for (const auto& [k, v] : cfg.solo) s += "|solo:" + k + "=" + ref_key(v);
  return s;
}

}  // namespace

SeparateResult run_separate(const SeparateConfig& config) {
  SeparateConfig cfg = config;
  if (cfg.hop <= 0) cfg.hop = cfg.window_len / 2;
  validate_separate_config(cfg);

  fs::create_directories(cfg.out_dir);
  DirLock lock(cfg.out_dir);

  if (cfg.rir_length > cfg.window_len) {
    std::cerr << "warning: simulated impulse response (" << cfg.rir_length
              << " samples) exceeds the analysis window (" << cfg.window_len
              << "); the per-bin transfer model degrades\n";
  }

  // Covariance estimation, one input at a time; a one-entry STFT cache
  // covers configs that slice a single long recording.
  struct FrameCache {
    std::string path;
    SpectralFrames frames_a, frames_b;
    double sample_rate = 0;
  } cache;

  double sample_rate = 0;
  auto cov_for = [&](const SegmentRef& ref,
                     const std::string& tag) -> CovariancePair {
    if (cache.path != ref.wav.string()) {
      const AudioBuffer audio = read_wav(ref.wav);
      const SpectralFrames frames = analyze(audio, cfg.window_len, cfg.hop);
      cache.path = ref.wav.string();
      cache.frames_a = frames.select_channels(cfg.group_a);
      cache.frames_b = frames.select_channels(cfg.group_b);
      cache.sample_rate = audio.sample_rate;
    }
    sample_rate = cache.sample_rate;
    CovariancePair cov =
        estimate(cache.frames_a, cache.frames_b, ref.frame_begin, ref.frame_end);
    save_covariance(cfg.out_dir / ("cov_" + sanitize(tag) + ".bin"), cov);
    return cov;
  };

  const std::string fingerprint = config_fingerprint(cfg);

  // Assemble the per-speaker undesired-source estimates.
  std::map<std::string, Retm> retms;
  auto finish = [&](const std::string& spk, Retm retm) {
    retm.provenance["config_hash"] =
        hex64(fnv1a(fingerprint + "|target=" + spk));
    retm.provenance["target_speaker"] = spk;
    retm.provenance["window_len"] = std::to_string(cfg.window_len);
    retm.provenance["hop"] = std::to_string(cfg.hop);
    retms.emplace(spk, std::move(retm));
  };
  auto try_reuse = [&](const std::string& spk) -> bool {
    if (!cfg.reuse) return false;
    const fs::path path = cfg.out_dir / ("retm_" + sanitize(spk) + ".bin");
    if (!fs::exists(path)) return false;
    Retm loaded = load_retm(path);
    const auto it = loaded.provenance.find("config_hash");
    if (it == loaded.provenance.end() ||
        it->second != hex64(fnv1a(fingerprint + "|target=" + spk))) {
      return false;
    }
    retms.emplace(spk, std::move(loaded));
    return true;
  };

  switch (cfg.method) {
    case Method::Training: {
      std::optional<CovariancePair> noise;
      std::vector<CovariancePair> noise_plus;
      std::vector<std::string> pending;
      for (const auto& spk : cfg.speakers) {
        if (!try_reuse(spk)) pending.push_back(spk);
      }
      if (!pending.empty()) {
        noise = cov_for(*cfg.noise_only, "noise_only");
        for (const auto& spk : cfg.speakers) {
          noise_plus.push_back(cov_for(cfg.noise_plus.at(spk),
                                       "noise_plus_" + spk));
        }
        for (const auto& spk : pending) {
          const int target = static_cast<int>(
              std::find(cfg.speakers.begin(), cfg.speakers.end(), spk) -
              cfg.speakers.begin());
          finish(spk, estimate_undesired_for_speaker(*noise, noise_plus, target,
                                                     cfg.pinv_tolerance));
        }
      }
      break;
    }
    case Method::Direct: {
      for (const auto& spk : cfg.speakers) {
        if (try_reuse(spk)) continue;
        finish(spk, estimate_direct(cov_for(cfg.undesired_only.at(spk),
                                            "undesired_only_" + spk),
                                    cfg.pinv_tolerance));
      }
      break;
    }
    case Method::Subtraction: {
      std::optional<CovariancePair> mix_cov, noise;
      for (const auto& spk : cfg.speakers) {
        if (try_reuse(spk)) continue;
        if (!mix_cov) mix_cov = cov_for(cfg.mixture, "mixture");
        if (!noise) noise = cov_for(*cfg.noise_only, "noise_only");
        const CovariancePair own =
            subtract(cov_for(cfg.noise_plus.at(spk), "noise_plus_" + spk),
                     *noise);
        finish(spk, estimate_by_subtraction(*mix_cov, own, cfg.pinv_tolerance));
      }
      break;
    }
    case Method::Subset: {
      std::vector<std::string> all = cfg.speakers;
      all.insert(all.end(), cfg.noise_sources.begin(), cfg.noise_sources.end());
      std::map<std::string, CovariancePair> solos;
      for (const auto& spk : cfg.speakers) {
        if (try_reuse(spk)) continue;
        if (solos.empty()) {
          for (const auto& src : all) {
            solos.emplace(src, cov_for(cfg.solo.at(src), "solo_" + src));
          }
        }
        std::vector<CovariancePair> parts;
        for (const auto& src : all) {
          if (src != spk) parts.push_back(solos.at(src));
        }
        finish(spk, estimate_subset(parts, cfg.pinv_tolerance));
      }
      break;
    }
  }

  for (const auto& [spk, retm] : retms) {
    save_retm(cfg.out_dir / ("retm_" + sanitize(spk) + ".bin"), retm);
  }

  // Extraction over the session mixture.
  const AudioBuffer mixture_audio = read_wav(cfg.mixture.wav);
  SpectralFrames mix_frames = analyze(mixture_audio, cfg.window_len, cfg.hop);
  if (cfg.mixture.frame_begin != 0 || cfg.mixture.frame_end >= 0) {
    mix_frames = mix_frames.slice_frames(
        cfg.mixture.frame_begin, cfg.mixture.frame_end < 0
                                     ? mix_frames.frames
                                     : cfg.mixture.frame_end);
  }
  const SpectralFrames frames_a = mix_frames.select_channels(cfg.group_a);
  const SpectralFrames frames_b = mix_frames.select_channels(cfg.group_b);

  SeparateResult result;
  json sep_manifest;
  sep_manifest["schema"] = kSepManifestSchema;
  sep_manifest["method"] = method_name(cfg.method);
  sep_manifest["window_len"] = cfg.window_len;
  sep_manifest["hop"] = cfg.hop;
  sep_manifest["pinv_tolerance"] = cfg.pinv_tolerance;
  sep_manifest["reconstruct"] =
      cfg.reconstruct == ReconstructMode::Average ? "average" : "reference";
  sep_manifest["sample_rate"] = mixture_audio.sample_rate;
  sep_manifest["mixture_wav"] = cfg.mixture.wav.string();
  sep_manifest["group_a"] = cfg.group_a;
  sep_manifest["group_b"] = cfg.group_b;
  json speakers = json::object();

  for (const auto& spk : cfg.speakers) {
    const Retm& retm = retms.at(spk);
    SeparationOutput out = extract(frames_a, frames_b, retm);
    const AudioBuffer est = reconstruct(out, cfg.reconstruct);
    const std::string wav_name = "speaker_" + sanitize(spk) + ".wav";
    write_wav(cfg.out_dir / wav_name, est, SampleFormat::Float32);

    std::vector<double> res = out.bin_residual;
    std::nth_element(res.begin(), res.begin() + res.size() / 2, res.end());
    const double median_residual = res.empty() ? 0.0 : res[res.size() / 2];

    speakers[spk] = {{"wav", wav_name},
                     {"retm", "retm_" + sanitize(spk) + ".bin"},
                     {"failed_bins", retm.failed_count()},
                     {"median_residual", median_residual}};
    result.speaker_wavs[spk] = cfg.out_dir / wav_name;
    result.failed_bins[spk] = retm.failed_count();
  }
  sep_manifest["speakers"] = speakers;

  const fs::path sep_path = cfg.out_dir / "separation_manifest.json";
  std::ofstream out(sep_path);
  out << sep_manifest.dump(2) << "\n";
  if (!out) throw InputError("write failed: " + sep_path.string());
  result.separation_manifest = sep_path;
  return result;
}

// ------------------------------------------------------------------ evaluate

EvaluateResult run_evaluate(const EvaluateOptions& options) {
  const json m = load_json_file(options.manifest, "simulate manifest");
  check_schema(m, kManifestSchema, options.manifest);
  const fs::path base = options.manifest.parent_path();

  const std::string scenario_name =
      m.at("scenario").value("name", std::string("scenario"));
  const double snr_db = m.value("snr_db", 0.0);
  const std::vector<std::string> speakers =
      m.at("speakers").get<std::vector<std::string>>();
  const std::vector<int> group_a = m.at("group_a").get<std::vector<int>>();
  if (group_a.empty()) throw InputError("evaluate: manifest has empty group A");
  const int ref_channel = group_a.front();

  int window_len = options.window_len;
  std::string method_label = options.method_label;
  std::map<std::string, fs::path> estimates = options.estimates;

  if (!options.separation.empty()) {
    const json sep = load_json_file(options.separation, "separation manifest");
    check_schema(sep, kSepManifestSchema, options.separation);
    window_len = sep.value("window_len", window_len);
    if (method_label.empty()) {
      method_label = sep.value("method", std::string("unknown"));
    }
    const fs::path sep_base = options.separation.parent_path();
    for (const auto& [spk, info] : sep.at("speakers").items()) {
      estimates[spk] = resolve(sep_base, info.at("wav").get<std::string>());
    }
  }
  if (method_label.empty()) method_label = "unknown";

  // Locate the eval-segment mixture recording.
  const std::string eval_name = m.at("eval_segment").get<std::string>();
  fs::path mixture_wav;
  long eval_samples = 0;
  for (const json& seg : m.at("segments")) {
    if (seg.at("name").get<std::string>() == eval_name) {
      mixture_wav = resolve(base, seg.at("wav").get<std::string>());
      eval_samples = seg.value("samples", 0L);
    }
  }
  if (mixture_wav.empty()) {
    throw InputError("evaluate: eval segment '" + eval_name +
                     "' not found in manifest");
  }

  std::ofstream csv(options.out_csv);
  if (!csv) throw InputError("cannot open for writing: " + options.out_csv.string());
  csv << kCsvHeader << "\n";

  EvaluateResult result;
  result.csv = options.out_csv;
  result.method_label = method_label;

  if (estimates.empty()) {
    return result;  // header-only CSV
  }

  // References: clean speaker images at the reference microphone.
  const json images = m.at("images");
  std::vector<Eigen::VectorXd> refs;
  for (const auto& spk : speakers) {
    if (!images.contains(spk)) {
      throw InputError("evaluate: manifest has no clean image for speaker '" +
                       spk + "'");
    }
    const AudioBuffer img =
        read_wav(resolve(base, images.at(spk).get<std::string>()));
    if (ref_channel >= img.channels()) {
      throw InputError("evaluate: reference channel out of range in image");
    }
    refs.push_back(img.samples.row(ref_channel).transpose());
  }

  const AudioBuffer mixture = read_wav(mixture_wav);
  if (ref_channel >= mixture.channels()) {
    throw InputError("evaluate: reference channel out of range in mixture");
  }
  Eigen::VectorXd mix_ref = mixture.samples.row(ref_channel).transpose();

  // Common interior range: drop one window of edge effects on both sides.
  long common = mix_ref.size();
  for (const auto& r : refs) common = std::min<long>(common, r.size());
  std::map<std::string, Eigen::VectorXd> est_signals;
  for (const auto& spk : speakers) {
    if (!estimates.count(spk)) continue;
    const AudioBuffer est = read_wav(estimates.at(spk));
    const Eigen::VectorXd sig = est.samples.row(0).transpose();
    if (eval_samples > 0 &&
        std::llabs(static_cast<long long>(sig.size()) - eval_samples) >
            window_len) {
      throw InputError("evaluate: estimate for '" + spk + "' has " +
                       std::to_string(sig.size()) + " samples, expected about " +
                       std::to_string(eval_samples));
    }
    common = std::min<long>(common, sig.size());
    est_signals[spk] = sig;
  }
  const long lo = window_len;
  const long hi = common - window_len;
  if (est_signals.empty()) {
    return result;  // nothing to score; header-only CSV
  }
  if (hi - lo < 4L * options.filter_len) {
    throw InputError("evaluate: eval segment too short for scoring after "
                     "edge exclusion");
  }

  std::vector<Eigen::VectorXd> refs_trimmed;
  for (auto& r : refs) refs_trimmed.push_back(r.segment(lo, hi - lo));
  const BssDecomposer decomposer(refs_trimmed, options.filter_len);

  char line[512];
  auto emit = [&](const EvalResult& row, const std::string& method) {
    std::snprintf(line, sizeof(line),
                  "1,%s,%s,%s,%s,%.6f,%.6f,%.6f,%.6f,NA\n",
                  scenario_name.c_str(), format_g(snr_db).c_str(),
                  row.speaker.c_str(), method.c_str(), row.sir_db, row.sdr_db,
                  row.sir_improvement_db, row.sdr_improvement_db);
    csv << line;
  };

  for (std::size_t si = 0; si < speakers.size(); ++si) {
    const std::string& spk = speakers[si];
    if (!est_signals.count(spk)) continue;
    const int target = static_cast<int>(si);

    const auto [sir_mix, sdr_mix] =
        sir_sdr(decomposer.decompose(mix_ref.segment(lo, hi - lo), target));
    EvalResult unproc;
    unproc.speaker = spk;
    unproc.sir_db = sir_mix;
    unproc.sdr_db = sdr_mix;
    emit(unproc, "unprocessed");
    result.unprocessed.push_back(unproc);

    const auto [sir, sdr] = sir_sdr(
        decomposer.decompose(est_signals.at(spk).segment(lo, hi - lo), target));
    EvalResult proc;
    proc.speaker = spk;
    proc.sir_db = sir;
    proc.sdr_db = sdr;
    proc.sir_improvement_db = sir - sir_mix;
    proc.sdr_improvement_db = sdr - sdr_mix;
    emit(proc, method_label);
    result.processed.push_back(proc);
  }

  if (!csv) throw InputError("write failed: " + options.out_csv.string());
  return result;
}

// ------------------------------------------------------------------ pipeline

PipelineResult run_pipeline(const PipelineOptions& options) {
  SimulateOptions sim;
  sim.scenario_path = options.scenario_path;
  sim.out_dir = options.out_dir / "sim";
  sim.snr_db = options.snr_db;
  sim.seed = options.seed;
  const SimulateResult simulated = run_simulate(sim);

  SeparateConfig cfg =
      config_from_manifest(simulated.manifests.front(), options.method);
  cfg.window_len = options.window_len;
  cfg.hop = options.hop;
  cfg.pinv_tolerance = options.pinv_tolerance;
  cfg.reconstruct = options.reconstruct;
  cfg.out_dir = options.out_dir / ("separation_" + method_name(options.method));
  const SeparateResult separated = run_separate(cfg);

  EvaluateOptions ev;
  ev.manifest = simulated.manifests.front();
  ev.separation = separated.separation_manifest;
  ev.out_csv = options.out_dir / ("report_" + method_name(options.method) + ".csv");
  ev.filter_len = options.filter_len;
  const EvaluateResult evaluated = run_evaluate(ev);

  PipelineResult result;
  result.manifest = simulated.manifests.front();
  result.separation = separated;
  result.evaluation = evaluated;
  return result;
}

}  // namespace retmsep
