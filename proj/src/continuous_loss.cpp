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

#include "lossypdc/continuous_loss.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lossypdc/errors.hpp"
#include "lossypdc/linalg.hpp"

namespace lossypdc {

EnvironmentSpec EnvironmentSpec::vacuum() { return {}; }

EnvironmentSpec EnvironmentSpec::thermal(RVector nbar) {
  if (nbar.size() && nbar.minCoeff() < 0.0)
    throw ValidationError("thermal occupation must be non-negative");
  EnvironmentSpec e;
  e.kind = EnvironmentKind::thermal;
  e.nbar = std::move(nbar);
  return e;
}

EnvironmentSpec EnvironmentSpec::custom(CMatrix c1, CMatrix c2) {
  CorrelationPair probe{c1, c2, "environment"};
  validate_correlations(probe);
  EnvironmentSpec e;
  e.kind = EnvironmentKind::custom;
  e.custom_c1 = std::move(c1);
  e.custom_c2 = std::move(c2);
  return e;
}

CMatrix EnvironmentSpec::moment1(int n) const {
  switch (kind) {
    case EnvironmentKind::vacuum: return CMatrix::Zero(n, n);
    case EnvironmentKind::thermal:
      if (nbar.size() != n) throw ValidationError("environment occupation has wrong length");
      return nbar.cast<cplx>().asDiagonal();
    case EnvironmentKind::custom:
      if (custom_c1.rows() != n) throw ValidationError("environment moments have wrong size");
      return custom_c1;
  }
  return CMatrix::Zero(n, n);
}

CMatrix EnvironmentSpec::moment2(int n) const {
  if (kind == EnvironmentKind::custom) {
    if (custom_c2.rows() != n) throw ValidationError("environment moments have wrong size");
    return custom_c2;
  }
  return CMatrix::Zero(n, n);
}

InputState InputState::vacuum() { return {}; }

InputState InputState::thermal(RVector nbar) {
  if (nbar.size() && nbar.minCoeff() < 0.0)
    throw ValidationError("thermal occupation must be non-negative");
  return {InputKind::thermal, std::move(nbar)};
}

CorrelationPair InputState::correlations(int n) const {
  CorrelationPair c = CorrelationPair::vacuum(n);
  if (kind == InputKind::thermal) {
    if (nbar.size() != n) throw ValidationError("input occupation has wrong length");
    c.c1 = nbar.cast<cplx>().asDiagonal();
  }
  return c;
}

namespace {

void check_loss(const LossProfile& loss, int n) {
  if (loss.alpha.size() != n) throw ValidationError("loss profile has wrong length");
  if (n && loss.alpha.minCoeff() < 0.0) throw ValidationError("loss must be non-negative");
}

// sqrt(alpha_i alpha_j) <f^dag_i f_j> and sqrt(alpha_i alpha_j) <f_i f_j>.
void noise_terms(const RVector& alpha, const EnvironmentSpec& env, int n, CMatrix& n1,
                 CMatrix& n2) {
  const RVector sa = alpha.cwiseSqrt();
  const RMatrix w = sa * sa.transpose();
  n1 = env.moment1(n).cwiseProduct(w.cast<cplx>());
  n2 = env.moment2(n).cwiseProduct(w.cast<cplx>());
}

}  // namespace

MasterDerivative master_rhs(double z, const CMatrix& c1, const CMatrix& c2, double gamma,
                            const PropagationTables& tables, const LossProfile& loss,
                            const EnvironmentSpec& env) {
  const int n = tables.size();
  check_loss(loss, n);
  const CMatrix j = tables.coupling(z);
  CMatrix n1, n2;
  noise_terms(loss.alpha, env, n, n1, n2);
  MasterDerivative d;
  d.dc1.resize(n, n);
  d.dc2.resize(n, n);
  // (-i kappa_i^* + i kappa_j) and (i kappa_i + i kappa_j), kappa = k + i alpha / 2
  for (int b = 0; b < n; ++b) {
    for (int a = 0; a < n; ++a) {
      const double damp = -0.5 * (loss.alpha(a) + loss.alpha(b));
      d.dc1(a, b) = cplx(damp, tables.k(b) - tables.k(a)) * c1(a, b);
      d.dc2(a, b) = cplx(damp, tables.k(a) + tables.k(b)) * c2(a, b);
    }
  }
  const cplx ig(0.0, gamma);
  // sum_s J_js <a_i^dag a_s^dag> - J_is^* <a_s a_j>
  d.dc1 += ig * (c2.conjugate() * j.transpose() - j.conjugate() * c2) + n1;
  // sum_s J_js (delta_is + C1_si) + J_is C1_sj
  d.dc2 += ig * (j.transpose() + c1.transpose() * j.transpose() + j * c1) + n2;
  return d;
}

CorrelationPair integrate_master(double gamma, const PropagationTables& tables,
                                 const LossProfile& loss, const InputState& input,
                                 const EnvironmentSpec& env, double length,
                                 const MasterOptions& options, MasterDiagnostics* diagnostics) {
  if (options.steps < 1) throw ValidationError("integrate_master: steps must be >= 1");
  if (!(gamma >= 0.0)) throw ValidationError("integrate_master: gamma must be >= 0");
  if (!(length >= 0.0)) throw ValidationError("integrate_master: negative length");
  const int n = tables.size();
  check_loss(loss, n);
  const double h = length / options.steps;

  // Rotating frame: tc1_ij = C1_ij e^{i(k_i - k_j) z}, tc2_ij = C2_ij e^{-i(k_i + k_j) z}.
  // The k rotation drops out and the coupling becomes G = S e^{i dk z}.
  const CorrelationPair start = input.correlations(n);
  CMatrix x(n, 2 * n);
  x.leftCols(n) = start.c1;
  x.rightCols(n) = start.c2;

  CMatrix damp(n, n);
  for (int b = 0; b < n; ++b)
    for (int a = 0; a < n; ++a) damp(a, b) = -0.5 * (loss.alpha(a) + loss.alpha(b));
  CMatrix n1, n2;
  noise_terms(loss.alpha, env, n, n1, n2);
  const bool custom = env.kind == EnvironmentKind::custom;

  CMatrix p(n, 2 * n), y(n, 2 * n), xt(n, n);
  auto rhs = [&](double z, const CMatrix& g, const CMatrix& s, CMatrix& out) {
    const auto c1 = s.leftCols(n);
    const auto c2 = s.rightCols(n);
    out.leftCols(n) = damp.cwiseProduct(c1);
    out.rightCols(n) = damp.cwiseProduct(c2);
    if (gamma != 0.0) {
      y.leftCols(n) = c1;
      y.rightCols(n) = c2.conjugate();
      p.noalias() = g * y;
      const cplx ig(0.0, gamma);
      // X = conj(tc2) G = (G conj(tc2))^T since both factors are symmetric.
      xt = p.rightCols(n).transpose();
      out.leftCols(n) += ig * (xt - xt.adjoint());
      out.rightCols(n) += ig * (g + p.leftCols(n) + p.leftCols(n).transpose());
    }
    if (custom) {
      for (int b = 0; b < n; ++b) {
        for (int a = 0; a < n; ++a) {
          out(a, b) += n1(a, b) * std::polar(1.0, (tables.k(a) - tables.k(b)) * z);
          out(a, n + b) += n2(a, b) * std::polar(1.0, -(tables.k(a) + tables.k(b)) * z);
        }
      }
    } else {
      out.leftCols(n) += n1;
    }
  };

  double drift = 0.0;
  if (h > 0.0) {
    CMatrix half(n, n);
    for (int b = 0; b < n; ++b)
      for (int a = 0; a < n; ++a) half(a, b) = std::polar(1.0, tables.dk(a, b) * 0.5 * h);
    CMatrix ga = tables.slow_coupling(0.0), gm(n, n), gb(n, n);
    CMatrix k1(n, 2 * n), k2(n, 2 * n), k3(n, 2 * n), k4(n, 2 * n), tmp(n, 2 * n);
    for (int step = 0; step < options.steps; ++step) {
      const double za = step * h;
      const double zb = step + 1 == options.steps ? length : (step + 1) * h;
      gm = ga.cwiseProduct(half);
      gb = tables.slow_coupling(zb);
      rhs(za, ga, x, k1);
      tmp = x + (0.5 * h) * k1;
      rhs(za + 0.5 * h, gm, tmp, k2);
      tmp = x + (0.5 * h) * k2;
      rhs(za + 0.5 * h, gm, tmp, k3);
      tmp = x + h * k3;
      rhs(zb, gb, tmp, k4);
      x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      drift = std::max({drift, linalg::hermiticity_error(CMatrix(x.leftCols(n))),
                        linalg::symmetry_error(CMatrix(x.rightCols(n)))});
      x.leftCols(n) = (0.5 * (x.leftCols(n) + x.leftCols(n).adjoint())).eval();
      x.rightCols(n) = (0.5 * (x.rightCols(n) + x.rightCols(n).transpose())).eval();
      ga.swap(gb);
    }
  }

  CorrelationPair out;
  out.c1.resize(n, n);
  out.c2.resize(n, n);
  for (int b = 0; b < n; ++b) {
    for (int a = 0; a < n; ++a) {
      out.c1(a, b) = x(a, b) * std::polar(1.0, -(tables.k(a) - tables.k(b)) * length);
      out.c2(a, b) = x(a, n + b) * std::polar(1.0, (tables.k(a) + tables.k(b)) * length);
    }
  }
  symmetrize(out);

  double margin = 0.0;
  if (options.check_physicality) {
    margin = physicality_margin(covariance_from_correlations(out));
    if (margin < -1e-8) {
      std::ostringstream msg;
      msg << "integrate_master: output violates the uncertainty bound (min eig " << margin
          << "); increase the number of steps";
      throw NumericalError(msg.str());
    }
  }
  if (diagnostics) {
    diagnostics->max_step_drift = drift;
    diagnostics->physicality = margin;
  }
  return out;
}

double single_mode_oracle(double gamma, double alpha, double length) {
  if (!(gamma >= 0.0) || !(alpha >= 0.0) || !(length >= 0.0))
    throw ValidationError("single_mode_oracle: arguments must be non-negative");
  const double a = alpha + 2.0 * gamma;
  if (a == 0.0) return 1.0;
  // -expm1(-aL) = 1 - e^{-aL} without cancellation for small aL
  const double decayed = -std::expm1(-a * length);
  return std::exp(-a * length) + alpha * decayed / a;
}

}  // namespace lossypdc
