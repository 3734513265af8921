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

// Lossless parametric amplification: transfer matrices (E, F), their
// Bloch-Messiah (Schmidt) reduction and gain calibration.

#pragma once

#include "lossypdc/dispersion.hpp"
#include "lossypdc/gaussian.hpp"

namespace lossypdc {

// a(z1) = E a(z0) + F a^dag(z0)
struct BogoliubovPair {
  CMatrix e;
  CMatrix f;
  double z0 = 0.0;
  double z1 = 0.0;
};

// E = U^H diag(lambda_e) W_E, F = U^H diag(lambda_f) W_E^*
struct SchmidtDecomposition {
  CMatrix u;
  CMatrix w_e;
  RVector lambda_e;
  RVector lambda_f;

  ModeBasis basis() const { return {u, BasisKind::schmidt}; }
};

struct BogoliubovOptions {
  int steps = 1000;
  // Throw when the commutator residual exceeds this; <= 0 disables the check.
  double residual_limit = 1e-6;
};

BogoliubovPair integrate_bogoliubov(double gamma, const PropagationTables& tables, double z0,
                                    double z1, const BogoliubovOptions& options = {});
BogoliubovPair integrate_bogoliubov(double gamma, const FrequencyGrid& grid,
                                    const PumpSpec& pump, const OpticalModel& model,
                                    double length, int steps);

// max(|E E^H - F F^H - I|, |E F^T - (E F^T)^T|)
double commutator_residual(const BogoliubovPair& pair);

SchmidtDecomposition bloch_messiah(const BogoliubovPair& pair);

CorrelationPair vacuum_correlations(const BogoliubovPair& pair);

// Photon number of the strongest Schmidt mode.
double leading_photons(const BogoliubovPair& pair);

struct CalibrationResult {
  double gamma = 0.0;
  double n1 = 0.0;
  int evaluations = 0;
  BogoliubovPair pair;  // at the returned gamma, full step count
};

struct CalibrationOptions {
  int steps = 1000;
  double tolerance = 1e-3;  // relative, on N1
  double gamma_max = 1.0;
};

CalibrationResult calibrate_gamma(double target_n1, const PropagationTables& tables,
                                  double length, const CalibrationOptions& options = {});

}  // namespace lossypdc
