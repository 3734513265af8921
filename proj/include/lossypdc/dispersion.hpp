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

// Frequency grid, crystal dispersion, pump spectrum and loss profiles.
//
// Units throughout: micrometres, femtoseconds, rad/fs, rad/um.

#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "lossypdc/types.hpp"

namespace lossypdc {

// n^2(lambda) = a + b / (lambda^2 - c) - d * lambda^2, lambda in um.
struct SellmeierCoefficients {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;
};

enum class Polarization { ordinary, extraordinary };
// The down-converted field is an ordinary wave, the pump extraordinary.
enum class WaveRole { pdc, pump };

struct OpticalModel {
  SellmeierCoefficients ordinary{2.7359, 0.01878, 0.01822, 0.01354};
  SellmeierCoefficients eta{2.3753, 0.01224, 0.01667, 0.01516};
  double theta = 0.1107 * kPi;
  double c = kSpeedOfLight;
  // Working band of the fit, um.
  double band_min = 0.4;
  double band_max = 3.0;
};

double refractive_index(const OpticalModel& model, double wavelength_um, Polarization pol);
// d n / d lambda, 1/um.
double refractive_index_slope(const OpticalModel& model, double wavelength_um, Polarization pol);
double wavevector(const OpticalModel& model, WaveRole role, double omega);
// k_p(wi + wj) - k(wi) - k(wj)
double phase_mismatch(const OpticalModel& model, double omega_i, double omega_j);

struct PumpSpec {
  double wavelength_um = 0.8;
  // Intensity FWHM of a transform-limited Gaussian pulse.
  double fwhm_fs = 50.0;

  double tau() const;
  double central_omega() const;
};

// exp(-tau^2 (w - w_p)^2 / 2), peak 1.
double pump_spectrum(const PumpSpec& pump, double omega_sum);

// 2 pi x 25 THz of detuning on either side of degeneracy, rad/fs.
inline constexpr double kDefaultHalfWidth = 2.0 * kPi * 0.025;

struct FrequencyGrid {
  double center_frequency = 0.0;
  double half_width = 0.0;
  int count = 0;
  double spacing = 0.0;
  RVector omegas;

  static FrequencyGrid centered(double center, double half_width, int count);
  // Degenerate grid around half the pump frequency.
  static FrequencyGrid for_pump(const PumpSpec& pump, double half_width, int count);
};

// J_ij(z) = S(wi + wj) exp(i k_p(wi + wj) z)
CMatrix coupling_matrix(double z, const FrequencyGrid& grid, const PumpSpec& pump,
                        const OpticalModel& model);

// Everything the propagators need from the dispersion model, evaluated once.
// Built either from the physical model or directly for toy problems.
struct PropagationTables {
  RVector k;    // k(w_i)
  RMatrix s;    // S(w_i + w_j), symmetric
  RMatrix dk;   // phase mismatch, symmetric

  int size() const { return static_cast<int>(k.size()); }
  static PropagationTables build(const FrequencyGrid& grid, const PumpSpec& pump,
                                 const OpticalModel& model);
  // Validates shapes and symmetry.
  static PropagationTables from_arrays(RVector k, RMatrix s, RMatrix dk);
  // Coupling in the frame co-moving with the fields of an interval starting
  // at z0: S e^{i dk z} e^{i (k_i + k_j) z0}.
  CMatrix slow_coupling(double z, double z0 = 0.0) const;
  // Lab-frame coupling J(z).
  CMatrix coupling(double z) const;
};

struct LossProfile {
  RVector alpha;  // intensity extinction, 1/um
  std::string provenance;
};

double db_per_cm_to_alpha(double db_per_cm);
LossProfile loss_profile_constant(double db_per_cm, const FrequencyGrid& grid);
// (omega rad/fs, dB/cm) points; linear interpolation, clamped ends.
LossProfile loss_profile_tabulated(std::vector<std::pair<double, double>> points,
                                   const FrequencyGrid& grid);
LossProfile loss_profile_parametric(const std::function<double(double)>& db_per_cm_of_omega,
                                    const FrequencyGrid& grid);
LossProfile loss_profile_none(int count);
bool is_lossless(const LossProfile& loss);

}  // namespace lossypdc
