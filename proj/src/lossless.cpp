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

#include "lossypdc/lossless.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lossypdc/errors.hpp"
#include "lossypdc/linalg.hpp"

namespace lossypdc {
namespace {

// Elementwise e^{i dk h}.
CMatrix phase_table(const RMatrix& dk, double h) {
  CMatrix p(dk.rows(), dk.cols());
  for (Eigen::Index b = 0; b < dk.cols(); ++b)
    for (Eigen::Index a = 0; a < dk.rows(); ++a) p(a, b) = std::polar(1.0, dk(a, b) * h);
  return p;
}

// d/dz [calE | calF] = i gamma G [conj(calF) | conj(calE)]
void slow_rhs(const CMatrix& g, const CMatrix& x, double gamma, CMatrix& y, CMatrix& out) {
  const auto n = g.rows();
  y.leftCols(n) = x.rightCols(n).conjugate();
  y.rightCols(n) = x.leftCols(n).conjugate();
  out.noalias() = g * y;
  out *= cplx(0.0, gamma);
}

}  // namespace

BogoliubovPair integrate_bogoliubov(double gamma, const PropagationTables& tables, double z0,
                                    double z1, const BogoliubovOptions& options) {
  if (options.steps < 1) throw ValidationError("integrate_bogoliubov: steps must be >= 1");
  if (!(gamma >= 0.0)) throw ValidationError("integrate_bogoliubov: gamma must be >= 0");
  if (!(z1 >= z0)) throw ValidationError("integrate_bogoliubov: empty interval");
  const int n = tables.size();
  const double h = (z1 - z0) / options.steps;

  CMatrix x = CMatrix::Zero(n, 2 * n);
  x.leftCols(n).setIdentity();

  if (gamma > 0.0 && h > 0.0) {
    // S e^{i (k_i + k_j) z0}; the z-dependent factor e^{i dk z} is applied per step.
    CMatrix base(n, n);
    for (int b = 0; b < n; ++b)
      for (int a = 0; a < n; ++a)
        base(a, b) = tables.s(a, b) * std::polar(1.0, (tables.k(a) + tables.k(b)) * z0);
    const CMatrix half = phase_table(tables.dk, 0.5 * h);
    auto exact = [&](double z) { return CMatrix(base.cwiseProduct(phase_table(tables.dk, z))); };

    CMatrix ga = exact(z0), gm(n, n), gb(n, n);
    CMatrix k1(n, 2 * n), k2(n, 2 * n), k3(n, 2 * n), k4(n, 2 * n), tmp(n, 2 * n), y(n, 2 * n);
    for (int step = 0; step < options.steps; ++step) {
      const double zb = step + 1 == options.steps ? z1 : z0 + (step + 1) * h;
      gm = ga.cwiseProduct(half);
      gb = exact(zb);
      slow_rhs(ga, x, gamma, y, k1);
      tmp = x + (0.5 * h) * k1;
      slow_rhs(gm, tmp, gamma, y, k2);
      tmp = x + (0.5 * h) * k2;
      slow_rhs(gm, tmp, gamma, y, k3);
      tmp = x + h * k3;
      slow_rhs(gb, tmp, gamma, y, k4);
      x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      ga.swap(gb);
    }
  }

  BogoliubovPair out;
  out.z0 = z0;
  out.z1 = z1;
  CVector fast(n);
  for (int i = 0; i < n; ++i) fast(i) = std::polar(1.0, tables.k(i) * (z1 - z0));
  out.e = fast.asDiagonal() * x.leftCols(n);
  out.f = fast.asDiagonal() * x.rightCols(n);

  if (options.residual_limit > 0.0) {
    const double res = commutator_residual(out);
    const double scale = std::max(1.0, std::pow(linalg::max_abs(out.e), 2));
    if (!(res <= options.residual_limit * scale)) {
      std::ostringstream msg;
      msg << "commutator residual " << res << " exceeds " << options.residual_limit
          << "; increase the number of integration steps (now " << options.steps << ")";
      throw NumericalError(msg.str());
    }
  }
  return out;
}

BogoliubovPair integrate_bogoliubov(double gamma, const FrequencyGrid& grid,
                                    const PumpSpec& pump, const OpticalModel& model,
                                    double length, int steps) {
  BogoliubovOptions opt;
  opt.steps = steps;
  return integrate_bogoliubov(gamma, PropagationTables::build(grid, pump, model), 0.0, length,
                              opt);
}

double commutator_residual(const BogoliubovPair& pair) {
  const auto n = pair.e.rows();
  const CMatrix a = pair.e * pair.e.adjoint() - pair.f * pair.f.adjoint() -
                    CMatrix::Identity(n, n);
  const CMatrix b = pair.e * pair.f.transpose();
  return std::max(linalg::max_abs(a), linalg::symmetry_error(b));
}

SchmidtDecomposition bloch_messiah(const BogoliubovPair& pair) {
  const auto n = pair.e.rows();
  if (pair.e.cols() != n || pair.f.rows() != n || pair.f.cols() != n)
    throw ValidationError("bloch_messiah: E and F must be square and of equal size");
  const double scale = std::max(1.0, std::pow(linalg::max_abs(pair.e), 2));
  const double res = commutator_residual(pair);
  if (!(res <= 1e-6 * scale)) {
    std::ostringstream msg;
    msg << "bloch_messiah: not a closed Bogoliubov transformation (residual " << res << ")";
    throw NumericalError(msg.str());
  }

  const linalg::Svd sf = linalg::svd(pair.f);
  CMatrix v = sf.u;
  const RVector lf = sf.s;
  const RVector le = (lf.array().square() + 1.0).sqrt();
  CMatrix x = le.cwiseInverse().asDiagonal() * (v.adjoint() * pair.e);
  // Rotation condition: V^H F X^T must become diag(lambda_f).
  const CMatrix m = v.adjoint() * pair.f * x.transpose();

  const double top = lf.size() ? lf(0) : 0.0;
  const double floor = 1e-9 * std::max(1.0, top);
  const auto groups =
      linalg::clusters(lf, [&](double value) { return 1e-8 * std::max(1.0, value); });
  for (const auto& [b, e] : groups) {
    const int k = e - b;
    CMatrix q;
    if (lf(b) <= floor && k > 1) {
      // Numerically zero squeezing: any rotation is valid, pick the one
      // closest to the unit vectors.
      q = linalg::canonical_rotation(v.middleCols(b, k).adjoint());
    } else if (k == 1) {
      q = CMatrix::Constant(1, 1, std::polar(1.0, 0.5 * std::arg(m(b, b))));
    } else {
      const CMatrix y = lf.segment(b, k).cwiseInverse().asDiagonal() * m.block(b, b, k, k);
      const linalg::Svd sy = linalg::svd(y);
      q = linalg::sqrtm_normal(sy.u * sy.vh);
    }
    v.middleCols(b, k) = (v.middleCols(b, k) * q).eval();
    x.middleRows(b, k) = (q.adjoint() * x.middleRows(b, k)).eval();
  }

  SchmidtDecomposition out;
  out.u = v.adjoint();
  out.w_e = x;
  out.lambda_e = le;
  out.lambda_f = lf;
  for (Eigen::Index r = 0; r < n; ++r) {
    Eigen::Index j;
    out.u.row(r).cwiseAbs().maxCoeff(&j);
    if (out.u(r, j).real() < 0.0) {
      out.u.row(r) *= -1.0;
      out.w_e.row(r) *= -1.0;
    }
  }

  const double escale = std::max(1.0, linalg::max_abs(pair.e));
  const CMatrix uh = out.u.adjoint();
  const double re = linalg::max_abs(CMatrix(uh * le.asDiagonal() * out.w_e - pair.e));
  const double rf =
      linalg::max_abs(CMatrix(uh * lf.asDiagonal() * out.w_e.conjugate() - pair.f));
  if (!(std::max(re, rf) <= 1e-6 * escale)) {
    std::ostringstream msg;
    msg << "bloch_messiah: reconstruction residual " << std::max(re, rf);
    throw NumericalError(msg.str());
  }
  return out;
}

CorrelationPair vacuum_correlations(const BogoliubovPair& pair) {
  CorrelationPair out;
  out.c1 = pair.f.conjugate() * pair.f.transpose();
  out.c2 = pair.e * pair.f.transpose();
  symmetrize(out);
  return out;
}

double leading_photons(const BogoliubovPair& pair) {
  const RVector s = linalg::singular_values(pair.f);
  return s.size() ? s(0) * s(0) : 0.0;
}

CalibrationResult calibrate_gamma(double target_n1, const PropagationTables& tables,
                                  double length, const CalibrationOptions& options) {
  if (!(target_n1 > 0.0)) throw ValidationError("calibration target must be positive");
  if (!(length > 0.0)) throw ValidationError("calibration needs a positive length");
  if (options.steps < 1) throw ValidationError("calibration needs steps >= 1");
  if (!(options.tolerance > 0.0)) throw ValidationError("calibration tolerance must be positive");

  CalibrationResult result;
  // asinh(sqrt(N1)) is the single-mode gain and is close to linear in gamma,
  // which keeps the secant-type iterations short.
  const double goal = std::asinh(std::sqrt(target_n1));
  auto eval = [&](double gamma, int steps, bool check) {
    BogoliubovOptions opt;
    opt.steps = steps;
    opt.residual_limit = check ? 1e-6 : 0.0;
    ++result.evaluations;
    return integrate_bogoliubov(gamma, tables, 0.0, length, opt);
  };
  auto excess = [&](double n1) { return std::asinh(std::sqrt(n1)) - goal; };

  // Phase-matched estimate: with dk = 0 the leading gain is gamma L rho(S).
  const linalg::SymmetricEigen se = linalg::eigh(RMatrix(tables.s));
  const double rho = std::max(std::abs(se.values(0)), std::abs(se.values(se.values.size() - 1)));
  if (!(rho > 0.0)) throw NumericalError("calibration: pump spectrum vanishes on the grid");

  // Coarse stage on a reduced step count, then polish at full resolution.
  const int coarse_steps = std::min(options.steps, std::max(50, options.steps / 8));
  auto coarse = [&](double gamma) { return excess(leading_photons(eval(gamma, coarse_steps, false))); };

  double lo = 0.0, glo = -goal;
  double hi = std::min(goal / (length * rho), options.gamma_max);
  double ghi = coarse(hi);
  while (ghi < 0.0) {
    if (hi >= options.gamma_max) throw NumericalError("calibration: no bracket below gamma_max");
    lo = hi;
    glo = ghi;
    hi = std::min(2.0 * hi, options.gamma_max);
    ghi = coarse(hi);
  }

  // Illinois false position.
  const double rel_goal = 0.1 * options.tolerance;
  double gamma = hi;
  double g = ghi;
  int side = 0;
  for (int it = 0; it < 200; ++it) {
    gamma = (lo * ghi - hi * glo) / (ghi - glo);
    g = coarse(gamma);
    const double n1 = std::pow(std::sinh(g + goal), 2);
    if (std::abs(n1 / target_n1 - 1.0) < rel_goal || hi - lo < 1e-14 * hi) break;
    if (g < 0.0) {
      lo = gamma;
      glo = g;
      if (side == -1) ghi *= 0.5;
      side = -1;
    } else {
      hi = gamma;
      ghi = g;
      if (side == 1) glo *= 0.5;
      side = 1;
    }
  }
  double slope = (ghi - glo) / (hi - lo);
  if (!(slope > 0.0)) slope = goal / gamma;

  double prev_gamma = 0.0, prev_g = 0.0;
  bool have_prev = false;
  for (int it = 0; it < 12; ++it) {
    BogoliubovPair pair = eval(gamma, options.steps, true);
    const double n1 = leading_photons(pair);
    if (std::abs(n1 / target_n1 - 1.0) <= options.tolerance) {
      result.gamma = gamma;
      result.n1 = n1;
      result.pair = std::move(pair);
      return result;
    }
    const double gf = excess(n1);
    if (have_prev && gamma != prev_gamma) {
      const double s = (gf - prev_g) / (gamma - prev_gamma);
      if (s > 0.0) slope = s;
    }
    prev_gamma = gamma;
    prev_g = gf;
    have_prev = true;
    gamma = std::clamp(gamma - gf / slope, 0.5 * gamma, 2.0 * gamma);
  }
  throw NumericalError("calibration did not converge at full step count");
}

}  // namespace lossypdc
