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

#ifndef RETMSEP_SCENARIO_HPP_
#define RETMSEP_SCENARIO_HPP_

#include <filesystem>

#include <json.hpp>

#include "retmsep/roomsim.hpp"

namespace retmsep {

// Scenario file schema (JSON): see README for the key list. Microphones may
// be listed explicitly or as {"random": {"count", "seed", "margin",
// "min_source_distance"}}, which expands to seeded uniform placement away
// from walls and sources. Relative WAV paths resolve against the scenario
// file's directory.
Scenario load_scenario(const std::filesystem::path& path);

Scenario scenario_from_json(const nlohmann::json& j,
                            const std::filesystem::path& base_dir);

nlohmann::json scenario_to_json(const Scenario& scenario);

}  // namespace retmsep

#endif  // RETMSEP_SCENARIO_HPP_
