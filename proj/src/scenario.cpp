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

#include "retmsep/scenario.hpp"

#include <fstream>

#include "retmsep/errors.hpp"
#include "retmsep/rng.hpp"

namespace retmsep {
namespace {

using nlohmann::json;

Eigen::Vector3d vec3(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) {
    throw InputError("scenario: " + what + " must be an [x, y, z] triple");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

// Seeded uniform microphone placement with wall margin, minimum spacing to
// sources and a small minimum spacing between microphones.
std::vector<Eigen::Vector3d> place_random_mics(const json& spec,
                                               const Scenario& scenario) {
  const int count = spec.at("count").get<int>();
  if (count < 1) throw InputError("scenario: random microphone count < 1");
  const std::uint64_t seed =
      spec.value("seed", static_cast<std::uint64_t>(scenario.seed));
  const double margin = spec.value("margin", 0.3);
  const double min_src_dist = spec.value("min_source_distance", 0.4);
  const double min_mic_dist = spec.value("min_microphone_distance", 0.05);

  const Eigen::Vector3d& dim = scenario.room.dimensions;
  for (int i = 0; i < 3; ++i) {
    if (dim(i) <= 2 * margin) {
      throw InputError("scenario: margin leaves no room for microphones");
    }
  }

  Rng rng = Rng::derive(seed, "mic-placement");
  std::vector<Eigen::Vector3d> mics;
  int attempts = 0;
  while (static_cast<int>(mics.size()) < count) {
    if (++attempts > 100000) {
      throw InputError(
          "scenario: could not place microphones under the given spacing "
          "constraints");
    }
    Eigen::Vector3d p;
    for (int i = 0; i < 3; ++i) {
      p(i) = rng.uniform(margin, dim(i) - margin);
    }
    bool ok = true;
    for (const auto& s : scenario.sources) {
      if ((p - s.position).norm() < min_src_dist) ok = false;
    }
    for (const auto& m : mics) {
      if ((p - m).norm() < min_mic_dist) ok = false;
    }
    if (ok) mics.push_back(p);
  }
  return mics;
}

}  // namespace

Scenario scenario_from_json(const json& j,
                            const std::filesystem::path& base_dir) {
  Scenario sc;
  try {
    sc.name = j.value("name", std::string("scenario"));
    sc.sample_rate = j.value("sample_rate", 16000.0);
    sc.seed = j.value("seed", static_cast<std::uint64_t>(0));

    const json& room = j.at("room");
    sc.room.dimensions = vec3(room.at("dimensions"), "room dimensions");
    sc.room.t60 = room.at("t60").get<double>();
    sc.room.speed_of_sound = room.value("speed_of_sound", 343.0);
    sc.room.max_reflection_order = room.value("max_reflection_order", -1);

    for (const json& js : j.at("sources")) {
      SourceSpec src;
      src.name = js.at("name").get<std::string>();
      const std::string kind = js.at("kind").get<std::string>();
      if (kind == "speech") {
        src.kind = SourceKind::Speech;
      } else if (kind == "noise") {
        src.kind = SourceKind::Noise;
      } else {
        throw InputError("scenario: source kind must be speech or noise, got '" +
                         kind + "'");
      }
      src.position = vec3(js.at("position"), "source position");
      const json& sig = js.at("signal");
      if (sig.contains("path")) {
        std::filesystem::path p = sig.at("path").get<std::string>();
        if (p.is_relative()) p = base_dir / p;
        src.signal.path = p.string();
      }
      if (sig.contains("synth")) {
        src.signal.synth = sig.at("synth").get<std::string>();
        src.signal.seed = sig.value("seed", static_cast<std::uint64_t>(0));
      }
      sc.sources.push_back(std::move(src));
    }

    sc.snr_db = j.value("snr_db", 0.0);
    sc.sensor_noise_snr_db = j.value("sensor_noise_snr_db", 40.0);
    sc.normalize_sources = j.value("normalize_sources", true);
    if (j.contains("noise_gain_override") && !j.at("noise_gain_override").is_null()) {
      sc.noise_gain_override = j.at("noise_gain_override").get<double>();
    }

    const json& mics = j.at("microphones");
    if (mics.is_object() && mics.contains("random")) {
      sc.microphones = place_random_mics(mics.at("random"), sc);
    } else if (mics.is_array()) {
      for (const json& m : mics) {
        sc.microphones.push_back(vec3(m, "microphone position"));
      }
    } else {
      throw InputError("scenario: microphones must be an array or {random: ...}");
    }

    sc.group_a = j.at("group_a").get<std::vector<int>>();
    sc.group_b = j.at("group_b").get<std::vector<int>>();

    for (const json& jseg : j.at("segments")) {
      Segment seg;
      seg.name = jseg.at("name").get<std::string>();
      seg.duration_s = jseg.at("duration_s").get<double>();
      if (jseg.contains("active")) {
        seg.active = jseg.at("active").get<std::vector<std::string>>();
      }
      seg.eval = jseg.value("eval", false);
      sc.segments.push_back(std::move(seg));
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("scenario: malformed JSON: ") + e.what());
  }

  sc.validate();
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open scenario file: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InputError("scenario: invalid JSON in " + path.string() + ": " +
                     e.what());
  }
  return scenario_from_json(j, path.parent_path());
}

json scenario_to_json(const Scenario& sc) {
  json j;
  j["name"] = sc.name;
  j["sample_rate"] = sc.sample_rate;
  j["seed"] = sc.seed;
  j["room"] = {{"dimensions",
                {sc.room.dimensions(0), sc.room.dimensions(1),
                 sc.room.dimensions(2)}},
               {"t60", sc.room.t60},
               {"speed_of_sound", sc.room.speed_of_sound},
               {"max_reflection_order", sc.room.max_reflection_order}};
  j["sources"] = json::array();
  for (const auto& src : sc.sources) {
    json js;
    js["name"] = src.name;
    js["kind"] = src.kind == SourceKind::Speech ? "speech" : "noise";
    js["position"] = {src.position(0), src.position(1), src.position(2)};
    json sig;
    if (!src.signal.path.empty()) sig["path"] = src.signal.path;
    if (!src.signal.synth.empty()) {
      sig["synth"] = src.signal.synth;
      sig["seed"] = src.signal.seed;
    }
    js["signal"] = sig;
    j["sources"].push_back(js);
  }
  j["microphones"] = json::array();
  for (const auto& m : sc.microphones) {
    j["microphones"].push_back({m(0), m(1), m(2)});
  }
  j["group_a"] = sc.group_a;
  j["group_b"] = sc.group_b;
  j["snr_db"] = sc.snr_db;
  j["sensor_noise_snr_db"] = sc.sensor_noise_snr_db;
  j["normalize_sources"] = sc.normalize_sources;
  if (sc.noise_gain_override.has_value()) {
    j["noise_gain_override"] = *sc.noise_gain_override;
  }
  j["segments"] = json::array();
  for (const auto& seg : sc.segments) {
    j["segments"].push_back({{"name", seg.name},
                             {"duration_s", seg.duration_s},
                             {"active", seg.active},
                             {"eval", seg.eval}});
  }
  return j;
}

}  // namespace retmsep
