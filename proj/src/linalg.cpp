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

// The LAPACK headers must see the C++ complex types before anything else
// pulls them in.
#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>

#include "lossypdc/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <lapacke.h>

#include <Eigen/Eigenvalues>

#include "lossypdc/errors.hpp"

namespace lossypdc::linalg {
namespace {

void check_info(lapack_int info, const char* routine) {
  if (info != 0) {
    throw NumericalError(std::string(routine) + " failed, info = " + std::to_string(info));
  }
}

void require_square(Eigen::Index rows, Eigen::Index cols, const char* what) {
  if (rows != cols) throw ValidationError(std::string(what) + ": matrix must be square");
}

}  // namespace

HermitianEigen eigh(const CMatrix& a) {
  require_square(a.rows(), a.cols(), "eigh");
  const lapack_int n = static_cast<lapack_int>(a.rows());
  HermitianEigen out;
  out.vectors = a;
  out.values.resize(n);
  if (n == 0) return out;
  check_info(LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'L', n, out.vectors.data(), n,
                            out.values.data()),
             "zheevd");
  return out;
}

SymmetricEigen eigh(const RMatrix& a) {
  require_square(a.rows(), a.cols(), "eigh");
  const lapack_int n = static_cast<lapack_int>(a.rows());
  SymmetricEigen out;
  out.vectors = a;
  out.values.resize(n);
  if (n == 0) return out;
  check_info(LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, out.vectors.data(), n,
                            out.values.data()),
             "dsyevd");
  return out;
}

namespace {

SymmetricEigen dsyevr_call(const RMatrix& a, char range, double vl, double vu, lapack_int il,
                           lapack_int iu) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  RMatrix work = a;
  RVector w(n);
  RMatrix z(n, std::max<lapack_int>(n, 1));
  std::vector<lapack_int> isuppz(2 * static_cast<size_t>(std::max<lapack_int>(n, 1)));
  lapack_int m = 0;
  check_info(LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', range, 'L', n, work.data(), n, vl, vu, il,
                            iu, 0.0, &m, w.data(), z.data(), n, isuppz.data()),
             "dsyevr");
  SymmetricEigen out;
  out.values = w.head(m);
  out.vectors = z.leftCols(m);
  return out;
}

}  // namespace

SymmetricEigen eigh_lowest(const RMatrix& a, int count) {
  require_square(a.rows(), a.cols(), "eigh_lowest");
  const int n = static_cast<int>(a.rows());
  if (count < 1 || count > n) throw ValidationError("eigh_lowest: bad count");
  return dsyevr_call(a, 'I', 0.0, 0.0, 1, count);
}

SymmetricEigen eigh_window(const RMatrix& a, double lo, double hi) {
  require_square(a.rows(), a.cols(), "eigh_window");
  if (!(hi > lo)) throw ValidationError("eigh_window: empty window");
  return dsyevr_call(a, 'V', lo, hi, 0, 0);
}

HermitianEigen eigh_top(const CMatrix& a, int count) {
  require_square(a.rows(), a.cols(), "eigh_top");
  const lapack_int n = static_cast<lapack_int>(a.rows());
  if (count < 1 || count > n) throw ValidationError("eigh_top: bad count");
  CMatrix work = a;
  RVector w(n);
  CMatrix z(n, count);
  std::vector<lapack_int> isuppz(2 * static_cast<size_t>(n));
  lapack_int m = 0;
  check_info(LAPACKE_zheevr(LAPACK_COL_MAJOR, 'V', 'I', 'L', n, work.data(), n, 0.0, 0.0,
                            n - count + 1, n, 0.0, &m, w.data(), z.data(), n, isuppz.data()),
             "zheevr");
  HermitianEigen out;
  out.values = w.head(m);
  out.vectors = z.leftCols(m);
  return out;
}

Svd svd(const CMatrix& a) {
  const lapack_int m = static_cast<lapack_int>(a.rows());
  const lapack_int n = static_cast<lapack_int>(a.cols());
  const lapack_int k = std::min(m, n);
  CMatrix work = a;
  Svd out;
  out.u.resize(m, m);
  out.vh.resize(n, n);
  out.s.resize(k);
  if (k == 0) return out;
  check_info(LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'A', m, n, work.data(), m, out.s.data(),
                            out.u.data(), m, out.vh.data(), n),
             "zgesdd");
  return out;
}

RVector singular_values(const CMatrix& a) {
  const lapack_int m = static_cast<lapack_int>(a.rows());
  const lapack_int n = static_cast<lapack_int>(a.cols());
  CMatrix work = a;
  RVector s(std::min(m, n));
  if (s.size() == 0) return s;
  check_info(LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'N', m, n, work.data(), m, s.data(), nullptr, 1,
                            nullptr, 1),
             "zgesdd");
  return s;
}

CMatrix sqrtm_normal(const CMatrix& a) {
  require_square(a.rows(), a.cols(), "sqrtm_normal");
  if (a.rows() == 0) return a;
  Eigen::ComplexSchur<CMatrix> schur(a);
  if (schur.info() != Eigen::Success) throw NumericalError("complex Schur failed");
  const CMatrix& t = schur.matrixT();
  const CMatrix& z = schur.matrixU();
  // For a normal matrix T is diagonal; anything left above the diagonal means
  // the input was not normal and the principal root below would be wrong.
  const double scale = std::max(1.0, t.cwiseAbs().maxCoeff());
  double upper = 0.0;
  for (Eigen::Index j = 0; j < t.cols(); ++j)
    for (Eigen::Index i = 0; i < j; ++i) upper = std::max(upper, std::abs(t(i, j)));
  if (upper > 1e-8 * scale) throw NumericalError("sqrtm_normal: matrix is not normal");
  CVector d(t.rows());
  for (Eigen::Index i = 0; i < t.rows(); ++i) d(i) = std::sqrt(t(i, i));
  return z * d.asDiagonal() * z.adjoint();
}

RMatrix sqrtm_spd(const RMatrix& a) {
  const SymmetricEigen e = eigh(a);
  if (e.values.size() > 0 && e.values(0) <= 0.0)
    throw ValidationError("sqrtm_spd: matrix is not positive definite");
  return e.vectors * e.values.cwiseSqrt().asDiagonal() * e.vectors.transpose();
}

double log_det_spd(const RMatrix& a) {
  require_square(a.rows(), a.cols(), "log_det_spd");
  Eigen::LLT<RMatrix> llt(a);
  if (llt.info() != Eigen::Success)
    throw ValidationError("matrix is not positive definite");
  const RMatrix& l = llt.matrixLLT();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < l.rows(); ++i) acc += std::log(l(i, i));
  return 2.0 * acc;
}

double max_abs(const CMatrix& a) { return a.size() ? a.cwiseAbs().maxCoeff() : 0.0; }
double max_abs(const RMatrix& a) { return a.size() ? a.cwiseAbs().maxCoeff() : 0.0; }

double unitarity_error(const CMatrix& u) {
  if (u.rows() != u.cols()) return std::numeric_limits<double>::infinity();
  return max_abs(CMatrix(u * u.adjoint() - CMatrix::Identity(u.rows(), u.cols())));
}

double hermiticity_error(const CMatrix& a) { return max_abs(CMatrix(a - a.adjoint())); }
double symmetry_error(const CMatrix& a) { return max_abs(CMatrix(a - a.transpose())); }
double symmetry_error(const RMatrix& a) { return max_abs(RMatrix(a - a.transpose())); }

CMatrix canonical_rotation(const CMatrix& coefficients) {
  const Eigen::Index k = coefficients.rows();
  CMatrix q(k, k);
  Eigen::Index found = 0;
  // Two passes: the first accepts only candidates with a substantial new
  // component so the choice is insensitive to rounding, the second fills up.
  for (double threshold : {0.1, 1e-10}) {
    for (Eigen::Index j = 0; j < coefficients.cols() && found < k; ++j) {
      CVector v = coefficients.col(j);
      for (Eigen::Index i = 0; i < found; ++i) v -= q.col(i) * q.col(i).dot(v);
      for (Eigen::Index i = 0; i < found; ++i) v -= q.col(i) * q.col(i).dot(v);
      const double nv = v.norm();
      if (nv > threshold) q.col(found++) = v / nv;
    }
    if (found == k) break;
  }
  // Candidates that fail to span the subspace fall back to unit vectors.
  for (Eigen::Index j = 0; j < k && found < k; ++j) {
    CVector v = CVector::Unit(k, j);
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index i = 0; i < found; ++i) v -= q.col(i) * q.col(i).dot(v);
    const double nv = v.norm();
    if (nv > 1e-8) q.col(found++) = v / nv;
  }
  return q;
}

std::vector<std::pair<int, int>> clusters(const RVector& sorted_values,
                                          const std::function<double(double)>& tol) {
  std::vector<std::pair<int, int>> out;
  const int n = static_cast<int>(sorted_values.size());
  int begin = 0;
  for (int i = 1; i <= n; ++i) {
    if (i == n ||
        std::abs(sorted_values(i) - sorted_values(i - 1)) > tol(sorted_values(i - 1))) {
      out.emplace_back(begin, i);
      begin = i;
    }
  }
  return out;
}

}  // namespace lossypdc::linalg
