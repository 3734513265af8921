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

#include "lossypdc/dispersion.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lossypdc/errors.hpp"

namespace lossypdc {
namespace {

double sellmeier_n2(const SellmeierCoefficients& s, double l2) {
  return s.a + s.b / (l2 - s.c) - s.d * l2;
}

// d(n^2)/d(lambda)
double sellmeier_n2_slope(const SellmeierCoefficients& s, double lambda) {
  const double l2 = lambda * lambda;
  const double den = l2 - s.c;
  return -2.0 * lambda * s.b / (den * den) - 2.0 * s.d * lambda;
}

void check_band(const OpticalModel& model, double wavelength_um) {
  if (!(wavelength_um > model.band_min && wavelength_um < model.band_max)) {
    std::ostringstream msg;
    msg << "wavelength " << wavelength_um << " um outside the Sellmeier band ("
        << model.band_min << ", " << model.band_max << ")";
    throw DomainError(msg.str());
  }
}

}  // namespace

double refractive_index(const OpticalModel& model, double wavelength_um, Polarization pol) {
  check_band(model, wavelength_um);
  const double l2 = wavelength_um * wavelength_um;
  const double no2 = sellmeier_n2(model.ordinary, l2);
  if (pol == Polarization::ordinary) return std::sqrt(no2);
  const double eta2 = sellmeier_n2(model.eta, l2);
  const double s = std::sin(model.theta);
  const double c = std::cos(model.theta);
  return 1.0 / std::sqrt(s * s / eta2 + c * c / no2);
}

double refractive_index_slope(const OpticalModel& model, double wavelength_um,
                              Polarization pol) {
  check_band(model, wavelength_um);
  const double l2 = wavelength_um * wavelength_um;
  const double no2 = sellmeier_n2(model.ordinary, l2);
  const double dno2 = sellmeier_n2_slope(model.ordinary, wavelength_um);
  if (pol == Polarization::ordinary) return dno2 / (2.0 * std::sqrt(no2));
  const double eta2 = sellmeier_n2(model.eta, l2);
  const double deta2 = sellmeier_n2_slope(model.eta, wavelength_um);
  const double s2 = std::pow(std::sin(model.theta), 2);
  const double c2 = std::pow(std::cos(model.theta), 2);
  // n = u^{-1/2}, u = s2/eta2 + c2/no2
  const double u = s2 / eta2 + c2 / no2;
  const double du = -s2 * deta2 / (eta2 * eta2) - c2 * dno2 / (no2 * no2);
  return -0.5 * std::pow(u, -1.5) * du;
}

double wavevector(const OpticalModel& model, WaveRole role, double omega) {
  if (!(omega > 0.0)) throw DomainError("wavevector: frequency must be positive");
  const double lambda = 2.0 * kPi * model.c / omega;
  const Polarization pol =
      role == WaveRole::pdc ? Polarization::ordinary : Polarization::extraordinary;
  return refractive_index(model, lambda, pol) * omega / model.c;
}

double phase_mismatch(const OpticalModel& model, double omega_i, double omega_j) {
  return wavevector(model, WaveRole::pump, omega_i + omega_j) -
         wavevector(model, WaveRole::pdc, omega_i) - wavevector(model, WaveRole::pdc, omega_j);
}

double PumpSpec::tau() const {
  if (!(fwhm_fs > 0.0)) throw ValidationError("pump duration must be positive");
  return fwhm_fs / (2.0 * std::sqrt(std::log(2.0)));
}

double PumpSpec::central_omega() const {
  if (!(wavelength_um > 0.0)) throw ValidationError("pump wavelength must be positive");
  return 2.0 * kPi * kSpeedOfLight / wavelength_um;
}

double pump_spectrum(const PumpSpec& pump, double omega_sum) {
  const double t = pump.tau();
  const double d = omega_sum - pump.central_omega();
  return std::exp(-0.5 * t * t * d * d);
}

FrequencyGrid FrequencyGrid::centered(double center, double half_width, int count) {
  if (count < 1) throw ValidationError("grid needs at least one point");
  if (count > 1 && !(half_width > 0.0)) throw ValidationError("grid half width must be positive");
  if (!(center - (count > 1 ? half_width : 0.0) > 0.0))
    throw ValidationError("grid frequencies must be positive");
  FrequencyGrid g;
  g.center_frequency = center;
  g.count = count;
  g.half_width = count > 1 ? half_width : 0.0;
  g.spacing = count > 1 ? 2.0 * half_width / (count - 1) : 0.0;
  g.omegas.resize(count);
  for (int i = 0; i < count; ++i) {
    // Built from both ends toward the middle so the grid is exactly
    // mirror-symmetric about the centre.
    const double offset = count > 1 ? -half_width + i * g.spacing : 0.0;
    const double mirror = count > 1 ? half_width - (count - 1 - i) * g.spacing : 0.0;
    g.omegas(i) = center + (2 * i < count - 1 ? offset : mirror);
  }
  if (count % 2 == 1) g.omegas(count / 2) = center;
  return g;
}

FrequencyGrid FrequencyGrid::for_pump(const PumpSpec& pump, double half_width, int count) {
  return centered(0.5 * pump.central_omega(), half_width, count);
}

CMatrix coupling_matrix(double z, const FrequencyGrid& grid, const PumpSpec& pump,
                        const OpticalModel& model) {
  const int n = grid.count;
  CMatrix j(n, n);
  for (int b = 0; b < n; ++b) {
    for (int a = b; a < n; ++a) {
      const double w = grid.omegas(a) + grid.omegas(b);
      const double kp = wavevector(model, WaveRole::pump, w);
      const cplx v = pump_spectrum(pump, w) * std::polar(1.0, kp * z);
      j(a, b) = v;
      j(b, a) = v;
    }
  }
  return j;
}

PropagationTables PropagationTables::build(const FrequencyGrid& grid, const PumpSpec& pump,
                                           const OpticalModel& model) {
  const int n = grid.count;
  PropagationTables t;
  t.k.resize(n);
  t.s.resize(n, n);
  t.dk.resize(n, n);
  for (int i = 0; i < n; ++i) t.k(i) = wavevector(model, WaveRole::pdc, grid.omegas(i));
  for (int b = 0; b < n; ++b) {
    for (int a = b; a < n; ++a) {
      const double w = grid.omegas(a) + grid.omegas(b);
      const double s = pump_spectrum(pump, w);
      const double d = wavevector(model, WaveRole::pump, w) - t.k(a) - t.k(b);
      t.s(a, b) = t.s(b, a) = s;
      t.dk(a, b) = t.dk(b, a) = d;
    }
  }
  return t;
}

PropagationTables PropagationTables::from_arrays(RVector k, RMatrix s, RMatrix dk) {
  const auto n = k.size();
  if (n < 1 || s.rows() != n || s.cols() != n || dk.rows() != n || dk.cols() != n)
    throw ValidationError("propagation tables: inconsistent shapes");
  if ((s - s.transpose()).cwiseAbs().maxCoeff() > 0.0 ||
      (dk - dk.transpose()).cwiseAbs().maxCoeff() > 0.0)
    throw ValidationError("propagation tables: S and dk must be symmetric");
  PropagationTables t;
  t.k = std::move(k);
  t.s = std::move(s);
  t.dk = std::move(dk);
  return t;
}

CMatrix PropagationTables::slow_coupling(double z, double z0) const {
  const int n = size();
  CMatrix g(n, n);
  for (int b = 0; b < n; ++b)
    for (int a = 0; a < n; ++a)
      g(a, b) = s(a, b) * std::polar(1.0, dk(a, b) * z + (k(a) + k(b)) * z0);
  return g;
}

CMatrix PropagationTables::coupling(double z) const {
  const int n = size();
  CMatrix g(n, n);
  for (int b = 0; b < n; ++b)
    for (int a = 0; a < n; ++a) g(a, b) = s(a, b) * std::polar(1.0, (dk(a, b) + k(a) + k(b)) * z);
  return g;
}

double db_per_cm_to_alpha(double db_per_cm) {
  if (!(db_per_cm >= 0.0)) throw ValidationError("loss must be non-negative");
  return db_per_cm * std::log(10.0) / 10.0 / 1e4;
}

LossProfile loss_profile_constant(double db_per_cm, const FrequencyGrid& grid) {
  return {RVector::Constant(grid.count, db_per_cm_to_alpha(db_per_cm)), "constant"};
}

LossProfile loss_profile_tabulated(std::vector<std::pair<double, double>> points,
                                   const FrequencyGrid& grid) {
  if (points.empty()) throw ValidationError("tabulated loss needs at least one point");
  std::sort(points.begin(), points.end());
  for (size_t i = 1; i < points.size(); ++i)
    if (points[i].first == points[i - 1].first)
      throw ValidationError("tabulated loss: duplicate frequency");
  for (const auto& p : points) (void)db_per_cm_to_alpha(p.second);
  LossProfile out{RVector(grid.count), "tabulated"};
  for (int i = 0; i < grid.count; ++i) {
    const double w = grid.omegas(i);
    double db;
    if (w <= points.front().first) {
      db = points.front().second;
    } else if (w >= points.back().first) {
      db = points.back().second;
    } else {
      auto hi = std::upper_bound(points.begin(), points.end(), w,
                                 [](double x, const std::pair<double, double>& p) {
                                   return x < p.first;
                                 });
      auto lo = hi - 1;
      const double f = (w - lo->first) / (hi->first - lo->first);
      db = lo->second + f * (hi->second - lo->second);
    }
    out.alpha(i) = db_per_cm_to_alpha(db);
  }
  return out;
}

LossProfile loss_profile_parametric(const std::function<double(double)>& db_per_cm_of_omega,
                                    const FrequencyGrid& grid) {
  LossProfile out{RVector(grid.count), "parametric"};
  for (int i = 0; i < grid.count; ++i)
    out.alpha(i) = db_per_cm_to_alpha(db_per_cm_of_omega(grid.omegas(i)));
  return out;
}

LossProfile loss_profile_none(int count) { return {RVector::Zero(count), "none"}; }

bool is_lossless(const LossProfile& loss) {
  return loss.alpha.size() == 0 || loss.alpha.cwiseAbs().maxCoeff() == 0.0;
}

}  // namespace lossypdc
