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

#include "lossypdc/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "lossypdc/errors.hpp"
#include "lossypdc/linalg.hpp"

namespace lossypdc {

CorrelationPair CorrelationPair::vacuum(int n) {
  return {CMatrix::Zero(n, n), CMatrix::Zero(n, n), "monochromatic"};
}

std::string to_string(BasisKind kind) {
  switch (kind) {
    case BasisKind::schmidt: return "schmidt";
    case BasisKind::mercer_wolf: return "mercer_wolf";
    case BasisKind::williamson_euler: return "williamson_euler";
    case BasisKind::msq: return "msq";
    case BasisKind::custom: return "custom";
  }
  return "custom";
}

void validate_correlations(const CorrelationPair& corr, double tol) {
  const auto n = corr.c1.rows();
  if (corr.c1.cols() != n || corr.c2.rows() != n || corr.c2.cols() != n)
    throw ValidationError("correlation matrices must be square and of equal size");
  const double s1 = std::max(1.0, linalg::max_abs(corr.c1));
  const double s2 = std::max(1.0, linalg::max_abs(corr.c2));
  if (linalg::hermiticity_error(corr.c1) > tol * s1)
    throw ValidationError("<a^dag a> is not Hermitian");
  if (linalg::symmetry_error(corr.c2) > tol * s2)
    throw ValidationError("<a a> is not symmetric");
  for (Eigen::Index i = 0; i < n; ++i)
    if (corr.c1(i, i).real() < -tol * s1)
      throw ValidationError("<a^dag a> has a negative diagonal entry");
}

void symmetrize(CorrelationPair& corr) {
  corr.c1 = (0.5 * (corr.c1 + corr.c1.adjoint())).eval();
  corr.c2 = (0.5 * (corr.c2 + corr.c2.transpose())).eval();
}

CovarianceMatrix covariance_from_correlations(const CorrelationPair& corr) {
  validate_correlations(corr);
  const auto n = corr.c1.rows();
  const RMatrix re1 = corr.c1.real();
  const RMatrix re2 = corr.c2.real();
  // Symmetric and antisymmetric parts are taken explicitly so the output is
  // exactly symmetric even if the input carries rounding-level asymmetry.
  const RMatrix im1 = 0.5 * (corr.c1.imag() - RMatrix(corr.c1.imag().transpose()));
  const RMatrix im2 = 0.5 * (corr.c2.imag() + RMatrix(corr.c2.imag().transpose()));
  const RMatrix r1 = 0.5 * (re1 + RMatrix(re1.transpose()));
  const RMatrix r2 = 0.5 * (re2 + RMatrix(re2.transpose()));
  CovarianceMatrix out;
  out.sigma.resize(2 * n, 2 * n);
  const RMatrix id = RMatrix::Identity(n, n);
  out.sigma.topLeftCorner(n, n) = id + 2.0 * (r1 + r2);
  out.sigma.bottomRightCorner(n, n) = id + 2.0 * (r1 - r2);
  // <p_i q_j + q_j p_i>/2 block
  const RMatrix x = 2.0 * (im2 - im1);
  out.sigma.bottomLeftCorner(n, n) = x;
  out.sigma.topRightCorner(n, n) = x.transpose();
  return out;
}

CorrelationPair correlations_from_covariance(const CovarianceMatrix& cov) {
  const auto n = cov.sigma.rows() / 2;
  if (cov.sigma.rows() != 2 * n || cov.sigma.cols() != 2 * n)
    throw ValidationError("covariance must be 2N x 2N");
  const RMatrix qq = cov.sigma.topLeftCorner(n, n);
  const RMatrix pp = cov.sigma.bottomRightCorner(n, n);
  const RMatrix x = cov.sigma.bottomLeftCorner(n, n);
  const RMatrix id = RMatrix::Identity(n, n);
  const RMatrix re1 = 0.25 * (qq + pp - 2.0 * id);
  const RMatrix re2 = 0.25 * (qq - pp);
  const RMatrix im2 = 0.25 * (x + RMatrix(x.transpose()));
  const RMatrix im1 = -0.25 * (x - RMatrix(x.transpose()));
  CorrelationPair out;
  out.c1 = re1.cast<cplx>() + kI * im1.cast<cplx>();
  out.c2 = re2.cast<cplx>() + kI * im2.cast<cplx>();
  symmetrize(out);
  return out;
}

void require_unitary(const CMatrix& u, double tol, const char* what) {
  const double err = linalg::unitarity_error(u);
  if (!(err <= tol)) {
    std::ostringstream msg;
    msg << what << ": matrix is not unitary (residual " << err << ")";
    throw ValidationError(msg.str());
  }
}

CorrelationPair transform_correlations(const CorrelationPair& corr, const ModeBasis& basis) {
  if (basis.u.rows() != corr.c1.rows()) throw ValidationError("basis size mismatch");
  require_unitary(basis.u, 1e-8, "transform_correlations");
  CorrelationPair out;
  out.c1 = basis.u.conjugate() * corr.c1 * basis.u.transpose();
  out.c2 = basis.u * corr.c2 * basis.u.transpose();
  out.basis_tag = to_string(basis.kind);
  symmetrize(out);
  return out;
}

RMatrix symplectic_form(int n) {
  RMatrix om = RMatrix::Zero(2 * n, 2 * n);
  om.topRightCorner(n, n).setIdentity();
  om.bottomLeftCorner(n, n) = -RMatrix::Identity(n, n);
  return om;
}

RMatrix symplectic_from_unitary(const CMatrix& u) {
  require_unitary(u, 1e-8, "symplectic_from_unitary");
  const auto n = u.rows();
  RMatrix o(2 * n, 2 * n);
  o.topLeftCorner(n, n) = u.real();
  o.topRightCorner(n, n) = -u.imag();
  o.bottomLeftCorner(n, n) = u.imag();
  o.bottomRightCorner(n, n) = u.real();
  return o;
}

RMatrix symplectic_from_unitary(const ModeBasis& basis) {
  return symplectic_from_unitary(basis.u);
}

CovarianceMatrix transform_covariance(const CovarianceMatrix& cov, const CMatrix& u) {
  const RMatrix o = symplectic_from_unitary(u);
  CovarianceMatrix out{o * cov.sigma * o.transpose()};
  out.sigma = (0.5 * (out.sigma + out.sigma.transpose())).eval();
  return out;
}

double to_db(double variance) { return 10.0 * std::log10(variance); }

std::vector<QuadratureEntry> quadrature_report(const CovarianceMatrix& cov) {
  const int n = cov.modes();
  std::vector<QuadratureEntry> out(n);
  for (int m = 0; m < n; ++m) {
    auto& e = out[m];
    e.dq2 = cov.sigma(m, m);
    e.dp2 = cov.sigma(n + m, n + m);
    e.dq2_db = to_db(e.dq2);
    e.dp2_db = to_db(e.dp2);
    e.squeezed = e.dp2 < 1.0;
  }
  return out;
}

double purity(const CovarianceMatrix& cov) {
  if (cov.sigma.rows() != cov.sigma.cols() || cov.sigma.rows() % 2 != 0)
    throw ValidationError("purity: covariance must be 2M x 2M");
  return std::exp(-0.5 * linalg::log_det_spd(cov.sigma));
}

CovarianceMatrix reduced_covariance(const CovarianceMatrix& cov, const std::vector<int>& modes) {
  const int n = cov.modes();
  std::set<int> seen;
  for (int m : modes) {
    if (m < 0 || m >= n) throw ValidationError("reduced_covariance: mode index out of range");
    if (!seen.insert(m).second) throw ValidationError("reduced_covariance: duplicate mode index");
  }
  const int k = static_cast<int>(modes.size());
  std::vector<int> idx;
  idx.reserve(2 * k);
  for (int m : modes) idx.push_back(m);
  for (int m : modes) idx.push_back(n + m);
  CovarianceMatrix out{RMatrix(2 * k, 2 * k)};
  for (int b = 0; b < 2 * k; ++b)
    for (int a = 0; a < 2 * k; ++a) out.sigma(a, b) = cov.sigma(idx[a], idx[b]);
  return out;
}

double mode_count(const RVector& photons) {
  if (photons.size() == 0) throw ValidationError("mode_count: empty input");
  if (photons.minCoeff() < 0.0) throw ValidationError("mode_count: negative photon number");
  const double total = photons.sum();
  if (!(total > 0.0)) throw ValidationError("mode_count: no photons");
  return 1.0 / (photons / total).squaredNorm();
}

CMatrix overlap(const ModeBasis& u, const ModeBasis& v) {
  if (u.u.rows() != v.u.rows() || u.u.cols() != v.u.cols())
    throw ValidationError("overlap: basis size mismatch");
  require_unitary(u.u, 1e-8, "overlap");
  require_unitary(v.u, 1e-8, "overlap");
  return u.u * v.u.adjoint();
}

double physicality_margin(const CovarianceMatrix& cov) {
  const int n = cov.modes();
  const CMatrix h = cov.sigma.cast<cplx>() + kI * symplectic_form(n).cast<cplx>();
  return linalg::eigh(h).values(0);
}

}  // namespace lossypdc
