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

// Command line front end: simulate reverberant multichannel scenes, estimate
// relative transfer matrices from calibration recordings, separate speakers,
// and score the results.
//
//   retmsep simulate --scenario desk.json --out-dir out/sim
//   retmsep separate --manifest out/sim/manifest.json --method training \
//       --out-dir out/sep
//   retmsep evaluate --manifest out/sim/manifest.json \
//       --separation out/sep/separation_manifest.json --out report.csv
//   retmsep pipeline --scenario desk.json --method training --out-dir out
//
// Exit codes: 0 success, 1 input or contract error, 2 numerical failure.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "retmsep/errors.hpp"
#include "retmsep/pipeline.hpp"

namespace {

using namespace retmsep;

std::vector<double> parse_sweep(const std::string& spec) {
  std::vector<double> values;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    values.push_back(std::stod(item));
  }
  return values;
}

void print_rows(const EvaluateResult& ev) {
  for (std::size_t i = 0; i < ev.processed.size(); ++i) {
    const EvalResult& u = ev.unprocessed[i];
    const EvalResult& p = ev.processed[i];
    std::printf(
        "%-12s unprocessed SIR %7.2f dB / SDR %7.2f dB  ->  %s SIR %7.2f dB "
        "/ SDR %7.2f dB  (+%.2f / +%.2f)\n",
        p.speaker.c_str(), u.sir_db, u.sdr_db, ev.method_label.c_str(),
        p.sir_db, p.sdr_db, p.sir_improvement_db, p.sdr_improvement_db);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relative-transfer-matrix speaker separation toolkit"};
  app.require_subcommand(1);

  // simulate ---------------------------------------------------------------
  auto* sim = app.add_subcommand(
      "simulate", "Render a scenario to mixtures, clean images and a manifest");
  std::string sim_scenario, sim_out, sim_sweep;
  double sim_snr = 0.0;
  std::uint64_t sim_seed = 0;
  bool sim_has_snr = false, sim_has_seed = false;
  sim->add_option("--scenario", sim_scenario, "Scenario JSON file")->required();
  sim->add_option("--out-dir", sim_out, "Output directory")->required();
  sim->add_option("--snr", sim_snr, "Override the scenario SNR (dB)")
      ->each([&](const std::string&) { sim_has_snr = true; });
  sim->add_option("--seed", sim_seed, "Override the scenario seed")
      ->each([&](const std::string&) { sim_has_seed = true; });
  sim->add_option("--snr-sweep", sim_sweep,
                  "Comma-separated SNR list; renders one manifest per value");

  // separate ---------------------------------------------------------------
  auto* sep = app.add_subcommand(
      "separate", "Estimate undesired-source ReTMs and extract each speaker");
  std::string sep_manifest, sep_config, sep_out, sep_method = "training",
              sep_rec = "reference";
  int sep_window = 8192, sep_hop = 0;
  double sep_tol = -1.0;
  bool sep_reuse = false;
  sep->add_option("--manifest", sep_manifest, "Simulate manifest to wire from");
  sep->add_option("--config", sep_config, "Explicit separation config JSON");
  sep->add_option("--method", sep_method,
                  "direct|subtraction|subset|training (default training)");
  sep->add_option("--window-len", sep_window, "STFT window length (samples)");
  sep->add_option("--hop", sep_hop, "STFT hop (default window/2)");
  sep->add_option("--pinv-tol", sep_tol,
                  "Pseudoinverse truncation tolerance (negative = automatic)");
  sep->add_option("--out-dir", sep_out, "Output directory");
  sep->add_option("--reconstruct", sep_rec, "reference|average");
  sep->add_flag("--reuse", sep_reuse,
                "Reuse persisted ReTMs when the configuration matches");

  // evaluate ---------------------------------------------------------------
  auto* ev = app.add_subcommand(
      "evaluate", "Score separated speakers against the clean images (CSV)");
  std::string ev_manifest, ev_sep, ev_dir, ev_label, ev_out;
  int ev_filter = 512, ev_window = 8192;
  ev->add_option("--manifest", ev_manifest, "Simulate manifest")->required();
  ev->add_option("--separation", ev_sep, "Separation manifest");
  ev->add_option("--estimates-dir", ev_dir,
                 "Directory of speaker_<name>.wav estimates");
  ev->add_option("--method-label", ev_label,
                 "Method column value for explicit estimates");
  ev->add_option("--out", ev_out, "Report CSV path")->required();
  ev->add_option("--filter-len", ev_filter, "Distortion filter taps");
  ev->add_option("--window-len", ev_window,
                 "Edge exclusion when no separation manifest is given");

  // pipeline ---------------------------------------------------------------
  auto* pipe = app.add_subcommand(
      "pipeline", "simulate + separate + evaluate in one run");
  std::string pipe_scenario, pipe_out, pipe_method = "training",
              pipe_rec = "reference";
  int pipe_window = 8192, pipe_hop = 0, pipe_filter = 512;
  double pipe_tol = -1.0, pipe_snr = 0.0;
  std::uint64_t pipe_seed = 0;
  bool pipe_has_snr = false, pipe_has_seed = false;
  pipe->add_option("--scenario", pipe_scenario, "Scenario JSON file")->required();
  pipe->add_option("--out-dir", pipe_out, "Output directory")->required();
  pipe->add_option("--method", pipe_method,
                   "direct|subtraction|subset|training");
  pipe->add_option("--window-len", pipe_window, "STFT window length");
  pipe->add_option("--hop", pipe_hop, "STFT hop (default window/2)");
  pipe->add_option("--pinv-tol", pipe_tol, "Pseudoinverse tolerance");
  pipe->add_option("--reconstruct", pipe_rec, "reference|average");
  pipe->add_option("--filter-len", pipe_filter, "Distortion filter taps");
  pipe->add_option("--snr", pipe_snr, "Override the scenario SNR (dB)")
      ->each([&](const std::string&) { pipe_has_snr = true; });
  pipe->add_option("--seed", pipe_seed, "Override the scenario seed")
      ->each([&](const std::string&) { pipe_has_seed = true; });

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) {
      SimulateOptions options;
      options.scenario_path = sim_scenario;
      options.out_dir = sim_out;
      if (sim_has_snr) options.snr_db = sim_snr;
      if (sim_has_seed) options.seed = sim_seed;
      if (!sim_sweep.empty()) options.snr_sweep = parse_sweep(sim_sweep);
      const SimulateResult result = run_simulate(options);
      for (std::size_t i = 0; i < result.manifests.size(); ++i) {
        std::printf("manifest: %s (achieved SNR %.4f dB)\n",
                    result.manifests[i].string().c_str(),
                    result.achieved_snr_db[i]);
      }
    } else if (sep->parsed()) {
      if (sep_manifest.empty() == sep_config.empty()) {
        throw InputError("separate: give exactly one of --manifest/--config");
      }
      SeparateConfig config;
      if (!sep_manifest.empty()) {
        config = config_from_manifest(sep_manifest, parse_method(sep_method));
      } else {
        config = load_separate_config(sep_config);
        if (sep->count("--method")) config.method = parse_method(sep_method);
      }
      if (sep->count("--window-len")) config.window_len = sep_window;
      if (sep->count("--hop")) config.hop = sep_hop;
      if (sep->count("--pinv-tol")) config.pinv_tolerance = sep_tol;
      if (!sep_out.empty()) config.out_dir = sep_out;
      if (sep->count("--reconstruct")) {
        if (sep_rec == "reference") {
          config.reconstruct = ReconstructMode::ReferenceChannel;
        } else if (sep_rec == "average") {
          config.reconstruct = ReconstructMode::Average;
        } else {
          throw InputError("--reconstruct must be reference or average");
        }
      }
      config.reuse = sep_reuse;
      const SeparateResult result = run_separate(config);
      for (const auto& [spk, path] : result.speaker_wavs) {
        std::printf("speaker %s -> %s (failed bins: %d)\n", spk.c_str(),
                    path.string().c_str(), result.failed_bins.at(spk));
      }
      std::printf("separation manifest: %s\n",
                  result.separation_manifest.string().c_str());
    } else if (ev->parsed()) {
      EvaluateOptions options;
      options.manifest = ev_manifest;
      options.out_csv = ev_out;
      options.filter_len = ev_filter;
      options.window_len = ev_window;
      options.method_label = ev_label;
      if (!ev_sep.empty()) options.separation = ev_sep;
      if (!ev_dir.empty()) {
        for (const auto& entry : std::filesystem::directory_iterator(ev_dir)) {
          const std::string name = entry.path().filename().string();
          if (name.rfind("speaker_", 0) == 0 &&
              entry.path().extension() == ".wav") {
            const std::string spk =
                name.substr(8, name.size() - 8 - 4);
            options.estimates[spk] = entry.path();
          }
        }
      }
      const EvaluateResult result = run_evaluate(options);
      print_rows(result);
      std::printf("report: %s\n", result.csv.string().c_str());
    } else if (pipe->parsed()) {
      PipelineOptions options;
      options.scenario_path = pipe_scenario;
      options.out_dir = pipe_out;
      options.method = parse_method(pipe_method);
      options.window_len = pipe_window;
      options.hop = pipe_hop;
      options.pinv_tolerance = pipe_tol;
      options.filter_len = pipe_filter;
      if (pipe_rec == "average") {
        options.reconstruct = ReconstructMode::Average;
      }
      if (pipe_has_snr) options.snr_db = pipe_snr;
      if (pipe_has_seed) options.seed = pipe_seed;
      const PipelineResult result = run_pipeline(options);
      print_rows(result.evaluation);
      std::printf("report: %s\n", result.evaluation.csv.string().c_str());
    }
  } catch (const NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
