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


// Random states and transformations for the unit tests. Everything is
// seeded so failures reproduce.

#pragma once

#include <cmath>
#include <random>

#include <Eigen/QR>

#include "lossypdc/gaussian.hpp"
#include "lossypdc/lossless.hpp"
#include "lossypdc/mode_bases.hpp"
#include "lossypdc/types.hpp"

namespace lossypdc::testing {

inline CMatrix random_unitary(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  CMatrix a(n, n);
  for (auto& x : a.reshaped()) x = {g(rng), g(rng)};
  Eigen::HouseholderQR<CMatrix> qr(a);
  CMatrix q = qr.householderQ();
  // Fix the phases of R's diagonal so q is Haar distributed.
  const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j) q.col(j) *= r(j, j) / std::abs(r(j, j));
  return q;
}

inline RVector random_uniform(int n, double lo, double hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(lo, hi);
  RVector v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

// Bogoliubov pair E = U^H cosh(r) W, F = U^H sinh(r) W^* with distinct r.
inline BogoliubovPair random_pair(int n, std::mt19937_64& rng, double rmax = 1.5) {
  const CMatrix u = random_unitary(n, rng);
  const CMatrix w = random_unitary(n, rng);
  RVector r = random_uniform(n, 0.05, rmax, rng);
  std::sort(r.begin(), r.end(), std::greater<>());
  BogoliubovPair p;
  p.e = u.adjoint() * r.array().cosh().matrix().cast<cplx>().asDiagonal() * w;
  p.f = u.adjoint() * r.array().sinh().matrix().cast<cplx>().asDiagonal() * w.conjugate();
  return p;
}

inline RMatrix pair_to_symplectic(const BogoliubovPair& p) {
  // q' = Re(E+F) q - Im(E-F) p ... written out from a' = E a + F a^dag.
  const int n = static_cast<int>(p.e.rows());
  const CMatrix sum = p.e + p.f;
  const CMatrix dif = p.e - p.f;
  RMatrix s(2 * n, 2 * n);
  s.topLeftCorner(n, n) = sum.real();
  s.topRightCorner(n, n) = -dif.imag();
  s.bottomLeftCorner(n, n) = sum.imag();
  s.bottomRightCorner(n, n) = dif.real();
  return s;
}

inline RMatrix random_symplectic(int n, std::mt19937_64& rng, double rmax = 1.5) {
  return pair_to_symplectic(random_pair(n, rng, rmax));
}

// sigma = S diag(nu; nu) S^T with nu in [1, numax].
inline CovarianceMatrix random_state(int n, std::mt19937_64& rng, double numax = 3.0,
                                     double rmax = 1.0) {
  const RMatrix s = random_symplectic(n, rng, rmax);
  RVector nu = random_uniform(n, 1.0, numax, rng);
  RVector d(2 * n);
  d << nu, nu;
  RMatrix sigma = s * d.asDiagonal() * s.transpose();
  sigma = (0.5 * (sigma + sigma.transpose())).eval();
  return {sigma};
}

template <class Derived>
double max_abs(const Eigen::MatrixBase<Derived>& a) {
  return a.cwiseAbs().maxCoeff();
}

}  // namespace lossypdc::testing
