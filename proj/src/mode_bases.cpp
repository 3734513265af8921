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

#include "lossypdc/mode_bases.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "lossypdc/errors.hpp"
#include "lossypdc/linalg.hpp"
#include "lossypdc/lossless.hpp"

namespace lossypdc {
namespace {

void require_covariance(const CovarianceMatrix& cov, const char* what) {
  const auto d = cov.sigma.rows();
  if (d == 0 || d != cov.sigma.cols() || d % 2 != 0)
    throw ValidationError(std::string(what) + ": covariance must be 2N x 2N");
  if (linalg::symmetry_error(cov.sigma) > 1e-10 * std::max(1.0, linalg::max_abs(cov.sigma)))
    throw ValidationError(std::string(what) + ": covariance is not symmetric");
}

// Rotate a column so its largest-magnitude entry is real and positive.
void fix_column_phase(Eigen::Ref<CVector> v) {
  Eigen::Index j;
  v.cwiseAbs().maxCoeff(&j);
  if (std::abs(v(j)) > 0.0) v *= std::conj(v(j)) / std::abs(v(j));
}

}  // namespace

ModeBasis mercer_wolf_from_eigensystem(CMatrix v, const RVector& values, const CMatrix& c2) {
  const auto n = v.rows();
  if (v.cols() != n || values.size() != n || c2.rows() != n)
    throw ValidationError("mercer_wolf: inconsistent sizes");
  const double top = std::max(1.0, values.cwiseAbs().maxCoeff());
  const auto groups = linalg::clusters(values, [&](double) { return 1e-9 * top; });
  for (const auto& [b, e] : groups) {
    const int k = e - b;
    if (k < 2) continue;
    // Coordinates of the projected unit vectors e_0, e_1, ... in the
    // eigenspace basis: column j is row j of the eigenvector block, conjugated.
    const CMatrix q = linalg::canonical_rotation(v.middleCols(b, k).adjoint());
    v.middleCols(b, k) = (v.middleCols(b, k) * q).eval();
  }
  for (Eigen::Index i = 0; i < n; ++i) fix_column_phase(v.col(i));

  // <B_i B_i> for B = V^T a
  const CVector bb = (c2 * v).cwiseProduct(v).colwise().sum().transpose();
  const double floor = 1e-13 * std::max(1.0, linalg::max_abs(c2));
  CVector y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double phi = std::abs(bb(i)) > floor ? std::arg(bb(i)) : 0.0;
    y(i) = std::polar(1.0, -0.5 * phi);
  }
  ModeBasis out;
  out.u = y.asDiagonal() * v.transpose();
  out.kind = BasisKind::mercer_wolf;
  return out;
}

ModeBasis mercer_wolf(const CorrelationPair& corr) {
  validate_correlations(corr);
  const linalg::HermitianEigen eig = linalg::eigh(corr.c1);
  return mercer_wolf_from_eigensystem(eig.vectors.rowwise().reverse(), eig.values.reverse(),
                                      corr.c2);
}

double symplectic_residual(const RMatrix& s) {
  const int n = static_cast<int>(s.rows() / 2);
  const RMatrix om = symplectic_form(n);
  return linalg::max_abs(RMatrix(s * om * s.transpose() - om));
}

WilliamsonDecomposition williamson(const CovarianceMatrix& cov) {
  require_covariance(cov, "williamson");
  const int n = cov.modes();
  const linalg::SymmetricEigen se = linalg::eigh(cov.sigma);
  if (!(se.values(0) > 0.0)) throw ValidationError("williamson: covariance is not positive definite");
  const RMatrix root =
      se.vectors * se.values.cwiseSqrt().asDiagonal() * se.vectors.transpose();
  const RMatrix om = symplectic_form(n);
  RMatrix a = root * om * root;
  a = (0.5 * (a - a.transpose())).eval();
  // -i A is Hermitian with eigenvalues +-nu; the positive half carries the
  // symplectic eigenvectors as u = (k1 + i k2) / sqrt(2).
  const CMatrix h = -kI * a.cast<cplx>();
  linalg::HermitianEigen top = linalg::eigh_top(h, n);
  RVector nu = top.values.reverse();
  CMatrix u = top.vectors.rowwise().reverse();

  RMatrix kmat(2 * n, 2 * n);
  kmat.leftCols(n) = std::sqrt(2.0) * u.real();
  kmat.rightCols(n) = std::sqrt(2.0) * u.imag();
  RVector scale(2 * n);
  scale << nu.cwiseSqrt().cwiseInverse(), nu.cwiseSqrt().cwiseInverse();
  RMatrix s = root * kmat * scale.asDiagonal();

  const auto groups =
      linalg::clusters(nu, [&](double v) { return 1e-10 * std::max(1.0, std::abs(v)); });
  for (const auto& [b, e] : groups) {
    const int k = e - b;
    if (k < 2) continue;
    // Candidates (e_j; i e_j)/sqrt(2), the positive eigenvectors of -i Omega,
    // so that sigma = c I gives S = I.
    CMatrix coeff(k, n);
    const double s2 = 1.0 / std::sqrt(2.0);
    for (int j = 0; j < n; ++j)
      coeff.col(j) = s2 * (u.block(j, b, 1, k).adjoint() +
                           kI * u.block(n + j, b, 1, k).adjoint());
    const CMatrix q = linalg::canonical_rotation(coeff);
    // Rotating u by q is the passive map below applied to the columns of S.
    // Applying it after the nu scaling keeps S symplectic even when the
    // cluster values differ in the last digits.
    RMatrix m(2 * k, 2 * k);
    m << q.real(), q.imag(), -q.imag(), q.real();
    RMatrix cols(2 * n, 2 * k);
    cols << s.middleCols(b, k), s.middleCols(n + b, k);
    cols = (cols * m).eval();
    s.middleCols(b, k) = cols.leftCols(k);
    s.middleCols(n + b, k) = cols.rightCols(k);
    nu.segment(b, k).setConstant(nu.segment(b, k).mean());
  }

  WilliamsonDecomposition out;
  out.s = s;
  out.nu = nu;

  const double sym = symplectic_residual(out.s);
  RVector d(2 * n);
  d << nu, nu;
  const double rec = linalg::max_abs(RMatrix(out.s * d.asDiagonal() * out.s.transpose() - cov.sigma));
  const double norm = std::max(1.0, linalg::max_abs(cov.sigma));
  if (!(sym <= 1e-6 * norm && rec <= 1e-6 * norm)) {
    std::ostringstream msg;
    msg << "williamson: residuals too large (symplectic " << sym << ", reconstruction " << rec
        << ")";
    throw NumericalError(msg.str());
  }
  return out;
}

EulerFactors euler(const RMatrix& s) {
  const auto d = s.rows();
  if (d == 0 || d != s.cols() || d % 2 != 0) throw ValidationError("euler: S must be 2N x 2N");
  const auto n = d / 2;
  const double norm = std::max(1.0, std::pow(linalg::max_abs(s), 2));
  if (!(symplectic_residual(s) <= 1e-6 * norm)) throw ValidationError("euler: S is not symplectic");

  // Quadrature map back to a Bogoliubov pair b = E a + F a^dag.
  const RMatrix qq = s.topLeftCorner(n, n), qp = s.topRightCorner(n, n);
  const RMatrix pq = s.bottomLeftCorner(n, n), pp = s.bottomRightCorner(n, n);
  BogoliubovPair pair;
  pair.e = 0.5 * ((qq + pp).cast<cplx>() + kI * (pq - qp).cast<cplx>());
  pair.f = 0.5 * ((qq - pp).cast<cplx>() + kI * (pq + qp).cast<cplx>());
  const SchmidtDecomposition bm = bloch_messiah(pair);

  EulerFactors out;
  out.o_left = symplectic_from_unitary(CMatrix(bm.u.adjoint()));
  out.o_right = symplectic_from_unitary(bm.w_e);
  out.r = bm.lambda_f.array().asinh();

  RVector lam(2 * n);
  lam << out.r.array().exp(), (-out.r.array()).exp();
  const double rec = linalg::max_abs(RMatrix(out.o_left * lam.asDiagonal() * out.o_right - s));
  if (!(rec <= 1e-6 * std::max(1.0, linalg::max_abs(s)))) {
    std::ostringstream msg;
    msg << "euler: reconstruction residual " << rec;
    throw NumericalError(msg.str());
  }
  return out;
}

ModeBasis williamson_euler_basis(const CovarianceMatrix& cov) {
  const WilliamsonDecomposition w = williamson(cov);
  const EulerFactors f = euler(w.s);
  const auto n = cov.modes();
  const RMatrix ot = f.o_left.transpose();
  // O_l^T must have the form [[Re U, -Im U], [Im U, Re U]].
  const double form =
      std::max(linalg::max_abs(RMatrix(ot.topLeftCorner(n, n) - ot.bottomRightCorner(n, n))),
               linalg::max_abs(RMatrix(ot.topRightCorner(n, n) + ot.bottomLeftCorner(n, n))));
  if (form > 1e-8) throw NumericalError("williamson_euler_basis: O_l is not a passive transformation");
  ModeBasis out;
  out.u = ot.topLeftCorner(n, n).cast<cplx>() + kI * ot.bottomLeftCorner(n, n).cast<cplx>();
  out.kind = BasisKind::williamson_euler;
  require_unitary(out.u, 1e-8, "williamson_euler_basis");
  return out;
}

ModeBasis msq_basis(const CovarianceMatrix& cov, RVector* stage_minima) {
  require_covariance(cov, "msq_basis");
  const int n = cov.modes();
  RMatrix sc = cov.sigma;
  // Rows: current complement modes in monochromatic coordinates.
  CMatrix phi = CMatrix::Identity(n, n);
  ModeBasis out;
  out.u.resize(n, n);
  out.kind = BasisKind::msq;
  RVector minima(n);

  for (int s = 0; s < n; ++s) {
    const int m = n - s;
    const double scale = std::max(1.0, linalg::max_abs(sc));
    const double tie = 1e-10 * scale;
    const linalg::SymmetricEigen low = linalg::eigh_lowest(sc, 2);
    const double lmin = low.values(0);
    RVector v = low.vectors.col(0);
    if (low.values(1) - lmin <= tie) {
      // Degenerate minimum: project unit vectors onto the eigenspace, p
      // components first so that the vacuum yields the identity.
      const linalg::SymmetricEigen space = linalg::eigh_window(sc, lmin - tie, lmin + tie);
      const RMatrix& w = space.vectors;
      int best = -1;
      double best_norm = 0.0;
      for (int c = 0; c < 2 * m; ++c) {
        const int idx = c < m ? m + c : c - m;
        const double norm = w.row(idx).norm();
        if (norm > 0.1) {
          best = idx;
          break;
        }
        if (norm > best_norm) {
          best_norm = norm;
          best = idx;
        }
      }
      if (best >= 0 && w.cols() > 0) {
        v = w * w.row(best).transpose();
        v.normalize();
      }
    }
    minima(s) = lmin;
    // P = c.q + d.p  <=>  A = sum (d + i c) A_k
    CVector wv(m);
    for (int k = 0; k < m; ++k) wv(k) = cplx(v(m + k), v(k));
    out.u.row(s) = wv.transpose() * phi;
    if (m == 1) break;

    // Householder reflector H with H conj(w) = e^{i theta} e_0; its rows 1..m-1
    // span the complement of the new mode.
    CVector u = wv.conjugate();
    const double a0 = std::abs(u(0));
    const cplx ph = a0 > 0.0 ? u(0) / a0 : cplx(1.0, 0.0);
    u(0) -= ph;
    const double un2 = u.squaredNorm();
    if (un2 > 1e-300) {
      const double beta = 2.0 / un2;
      phi -= beta * u * (u.adjoint() * phi);
      RMatrix vv(2 * m, 2);
      vv.col(0) << u.real(), u.imag();
      vv.col(1) << -u.imag(), u.real();
      const RMatrix sv = sc * vv;
      const RMatrix core = vv.transpose() * sv;
      sc -= beta * (vv * sv.transpose() + sv * vv.transpose());
      sc += (beta * beta) * (vv * core * vv.transpose());
    }
    // Drop q_0 and p_0.
    RMatrix next(2 * (m - 1), 2 * (m - 1));
    std::vector<int> keep;
    keep.reserve(2 * (m - 1));
    for (int k = 1; k < m; ++k) keep.push_back(k);
    for (int k = 1; k < m; ++k) keep.push_back(m + k);
    for (int b = 0; b < 2 * (m - 1); ++b)
      for (int a = 0; a < 2 * (m - 1); ++a) next(a, b) = sc(keep[a], keep[b]);
    sc = 0.5 * (next + next.transpose());
    phi = phi.bottomRows(m - 1).eval();
  }
  require_unitary(out.u, 1e-8, "msq_basis");
  if (stage_minima) *stage_minima = minima;
  return out;
}

RVector unwrap_phase(const CVector& row, int anchor) {
  const auto n = row.size();
  RVector out(n);
  if (n == 0) return out;
  if (anchor < 0 || anchor >= n) throw ValidationError("unwrap_phase: anchor out of range");
  for (Eigen::Index i = 0; i < n; ++i) out(i) = std::arg(row(i));
  auto fix = [&](Eigen::Index i, Eigen::Index prev) {
    const double d = out(i) - out(prev);
    out(i) -= 2.0 * kPi * std::round(d / (2.0 * kPi));
  };
  for (Eigen::Index i = anchor + 1; i < n; ++i) fix(i, i - 1);
  for (Eigen::Index i = anchor - 1; i >= 0; --i) fix(i, i + 1);
  return out;
}

BasisReport basis_report(const CorrelationPair& corr, const ModeBasis& basis,
                         int n_modes_for_purity, int n_shapes) {
  const int n = corr.size();
  if (basis.u.rows() != n) throw ValidationError("basis_report: basis size mismatch");
  BasisReport rep;
  rep.kind = basis.kind;
  const CorrelationPair in_basis = transform_correlations(corr, basis);
  rep.covariance = covariance_from_correlations(in_basis);
  rep.photons = in_basis.c1.diagonal().real();
  rep.quadratures = quadrature_report(rep.covariance);
  rep.pq_cross.resize(n);
  for (int m = 0; m < n; ++m) rep.pq_cross(m) = rep.covariance.sigma(n + m, m);
  const RVector clipped = rep.photons.cwiseMax(0.0);
  rep.k = clipped.sum() > 0.0 ? mode_count(clipped) : 0.0;
  const int depth = std::clamp(n_modes_for_purity, 0, n);
  std::vector<int> idx;
  for (int k = 0; k < depth; ++k) {
    idx.push_back(k);
    rep.purities.push_back(purity(reduced_covariance(rep.covariance, idx)));
  }
  rep.full_purity = purity(rep.covariance);
  const int shapes = std::clamp(n_shapes, 0, n);
  for (int k = 0; k < shapes; ++k) {
    const CVector row = basis.u.row(k).transpose();
    rep.shapes.push_back({row.cwiseAbs(), unwrap_phase(row, n / 2)});
  }
  return rep;
}

}  // namespace lossypdc
