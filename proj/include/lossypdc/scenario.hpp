// Copyright 2026 The lossypdc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Scenario configuration, the end-to-end pipeline and file output.

#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "lossypdc/continuous_loss.hpp"
#include "lossypdc/dispersion.hpp"
#include "lossypdc/gaussian.hpp"
#include "lossypdc/lossless.hpp"
#include "lossypdc/mode_bases.hpp"

namespace lossypdc {

enum class SolverModel { lossless, discrete, continuous };
enum class LossKind { none, constant, tabulated };

struct Scenario {
  int count = 511;
  double half_width = kDefaultHalfWidth;
  OpticalModel model;
  double length_um = 1e4;
  PumpSpec pump;

  std::optional<double> gamma;
  std::optional<double> target_n1;
  double calibration_tolerance = 1e-3;

  LossKind loss_kind = LossKind::none;
  double loss_db_per_cm = 0.0;
  std::vector<std::pair<double, double>> loss_points;  // (omega rad/fs, dB/cm)

  nlohmann::json input_nbar = 0.0;  // number or per-frequency array
  bool input_thermal = false;
  nlohmann::json env_nbar = 0.0;
  bool env_thermal = false;

  SolverModel solver = SolverModel::lossless;
  int steps = 1000;
  int segments = 16;
  int steps_per_segment = 0;  // 0: steps / segments

  std::vector<BasisKind> bases{BasisKind::schmidt};
  int purity_depth = 3;
  int mode_shapes = 3;
  int covariance_modes = 6;
  int overlap_modes = 10;

  std::vector<int> convergence_segments{4, 8, 16, 32, 64};
  std::vector<int> convergence_steps{125, 250, 500, 1000};

  std::string output_directory = "out";
  bool write_correlations = false;

  // Fully resolved configuration and its hash, filled by the loader.
  nlohmann::json resolved;
  std::string hash;
};

// Parses a configuration document. Unknown keys and ill-typed values throw
// ConfigError. `overrides` are "dotted.key=value" strings applied first;
// values are parsed as JSON when possible, else taken as strings.
Scenario scenario_from_json(nlohmann::json doc, const std::vector<std::string>& overrides = {});
Scenario load_scenario(const std::string& path, const std::vector<std::string>& overrides = {});
nlohmann::json scenario_to_json(const Scenario& s);

std::string config_hash(const nlohmann::json& resolved);

struct CalibrationInfo {
  bool calibrated = false;
  double target = 0.0;
  double achieved = 0.0;
  int evaluations = 0;
};

struct RunReport {
  double gamma = 0.0;
  CalibrationInfo calibration;
  FrequencyGrid grid;
  CorrelationPair correlations;
  RVector spectrum;  // <a_i^dag a_i>
  std::vector<ModeBasis> bases;
  std::vector<BasisReport> reports;
  // Pairwise overlaps in the order (0,1), (0,2), ..., (1,2), ...
  std::vector<std::pair<std::pair<int, int>, CMatrix>> overlaps;
  std::optional<SchmidtDecomposition> schmidt;
  double runtime_s = 0.0;
};

RunReport run_scenario(const Scenario& s);
RunReport compare_bases(const Scenario& s);

struct ConvergenceTable {
  std::vector<int> segments;
  std::vector<double> segment_error;
  std::vector<int> steps;
  std::vector<double> step_change;  // |C(steps) - C(2 steps)|
};
ConvergenceTable convergence_study(const Scenario& s);

CalibrationResult calibrate_scenario(const Scenario& s);

// Writers. Every file is written to a temporary name and renamed; on failure
// everything written by the call is removed and IoError is thrown.
void write_run_outputs(const Scenario& s, const RunReport& report, const std::string& verb,
                       const std::string& directory, long seed);
void write_convergence_outputs(const Scenario& s, const ConvergenceTable& table,
                               const std::string& directory, long seed);
void write_calibration_outputs(const Scenario& s, const CalibrationResult& cal,
                               const std::string& directory, long seed);

}  // namespace lossypdc
