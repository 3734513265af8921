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


#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "lossypdc/errors.hpp"
#include "lossypdc/linalg.hpp"
#include "lossypdc/lossless.hpp"
#include "lossypdc/mode_bases.hpp"

using namespace lossypdc;
using lossypdc::testing::max_abs;

namespace {

RMatrix omega(int n) { return symplectic_form(n); }

bool orthogonal_symplectic(const RMatrix& o, double tol) {
  const int d = static_cast<int>(o.rows());
  return max_abs(RMatrix(o * o.transpose() - RMatrix::Identity(d, d))) < tol &&
         max_abs(RMatrix(o * omega(d / 2) * o.transpose() - omega(d / 2))) < tol;
}

// Pure state with well separated squeezing parameters.
CorrelationPair pure_state(int n, std::mt19937_64& rng) {
  const auto p = lossypdc::testing::random_pair(n, rng, 1.2);
  return vacuum_correlations(p);
}

}  // namespace

TEST_CASE("Mercer-Wolf diagonalizes <a^dag a> and aligns the squeezing phases") {
  std::mt19937_64 rng(51);
  const int n = 8;
  const auto corr = correlations_from_covariance(lossypdc::testing::random_state(n, rng));
  const auto b = mercer_wolf(corr);
  CHECK(b.kind == BasisKind::mercer_wolf);
  CHECK(linalg::unitarity_error(b.u) < 1e-12);
  const auto t = transform_correlations(corr, b);
  RMatrix off = t.c1.cwiseAbs();
  off.diagonal().setZero();
  CHECK(off.maxCoeff() < 1e-10);
  for (int i = 1; i < n; ++i) CHECK(t.c1(i, i).real() <= t.c1(i - 1, i - 1).real() + 1e-12);
  for (int i = 0; i < n; ++i) {
    CHECK(std::abs(t.c2(i, i).imag()) < 1e-10);
    CHECK(t.c2(i, i).real() >= -1e-12);
  }
  // Minimal mode count against random bases.
  const double k_mw = mode_count(t.c1.diagonal().real());
  for (int trial = 0; trial < 20; ++trial) {
    const ModeBasis r{lossypdc::testing::random_unitary(n, rng), BasisKind::custom};
    CHECK(k_mw <= mode_count(transform_correlations(corr, r).c1.diagonal().real()) + 1e-12);
  }
}

TEST_CASE("Williamson decomposition") {
  std::mt19937_64 rng(52);
  for (int n : {1, 5, 12}) {
    const RMatrix s = lossypdc::testing::random_symplectic(n, rng, 1.0);
    RVector nu = lossypdc::testing::random_uniform(n, 1.0, 4.0, rng);
    std::sort(nu.begin(), nu.end(), std::greater<>());
    RVector d(2 * n);
    d << nu, nu;
    CovarianceMatrix cov{s * d.asDiagonal() * s.transpose()};
    cov.sigma = (0.5 * (cov.sigma + cov.sigma.transpose())).eval();
    const auto w = williamson(cov);
    CHECK(max_abs(RVector(w.nu - nu)) < 1e-9);
    CHECK(symplectic_residual(w.s) < 1e-9);
    CHECK(max_abs(RMatrix(w.s * d.asDiagonal() * w.s.transpose() - cov.sigma)) < 1e-9);
  }
  // Thermal state: S = I.
  const auto th = williamson(CovarianceMatrix{3.0 * RMatrix::Identity(8, 8)});
  CHECK(max_abs(RMatrix(th.s - RMatrix::Identity(8, 8))) < 1e-12);
  CHECK(max_abs(RVector(th.nu - RVector::Constant(4, 3.0))) < 1e-12);
  CHECK_THROWS_AS(williamson(CovarianceMatrix{RMatrix::Identity(3, 3)}), ValidationError);

  // Almost pure and strongly squeezed: nu = 1 up to ~1e-11. The cluster
  // canonicalization must not spoil the symplectic structure, which Euler
  // amplifies by 1/gap for nearly equal squeezing parameters.
  const RMatrix sq = lossypdc::testing::random_symplectic(7, rng, 2.0);
  RVector d(14);
  d << lossypdc::testing::random_uniform(7, 1.0, 1.0 + 2e-11, rng),
      RVector::Zero(7);
  d.tail(7) = d.head(7);
  CovarianceMatrix near{sq * d.asDiagonal() * sq.transpose()};
  near.sigma = (0.5 * (near.sigma + near.sigma.transpose())).eval();
  const auto wn = williamson(near);
  CHECK(symplectic_residual(wn.s) < 1e-12);
  CHECK(max_abs(RMatrix(wn.s * d.asDiagonal() * wn.s.transpose() - near.sigma)) < 1e-8);
}

TEST_CASE("Euler decomposition") {
  std::mt19937_64 rng(53);
  for (int n : {1, 6, 10}) {
    const RMatrix s = lossypdc::testing::random_symplectic(n, rng, 1.5);
    const auto f = euler(s);
    RVector lam(2 * n);
    lam << f.r.array().exp(), (-f.r.array()).exp();
    CHECK(max_abs(RMatrix(f.o_left * lam.asDiagonal() * f.o_right - s)) < 1e-9);
    CHECK(orthogonal_symplectic(f.o_left, 1e-10));
    CHECK(orthogonal_symplectic(f.o_right, 1e-10));
    for (int i = 1; i < n; ++i) CHECK(f.r(i) <= f.r(i - 1));
  }
  CHECK_THROWS_AS(euler(RMatrix::Constant(2, 2, 1.0)), ValidationError);
}

TEST_CASE("MSq: stage one is the global minimum variance") {
  std::mt19937_64 rng(54);
  const int n = 10;
  const auto cov = lossypdc::testing::random_state(n, rng, 2.0, 1.0);
  RVector minima;
  const auto b = msq_basis(cov, &minima);
  CHECK(b.kind == BasisKind::msq);
  CHECK(linalg::unitarity_error(b.u) < 1e-10);
  const auto in = transform_covariance(cov, b.u);
  const double lmin = linalg::eigh(cov.sigma).values(0);
  CHECK(std::abs(in.sigma(n, n) - lmin) < 1e-9);
  CHECK(minima(0) == doctest::Approx(lmin).epsilon(1e-12));
  for (int s = 0; s < n; ++s) {
    CHECK(in.sigma(n + s, n + s) == doctest::Approx(minima(s)).epsilon(1e-9));
    CHECK(std::abs(in.sigma(n + s, s)) < 1e-9);
    // Minimal within the complement of earlier modes.
    std::vector<int> rest;
    for (int k = s; k < n; ++k) rest.push_back(k);
    CHECK(in.sigma(n + s, n + s) <=
          linalg::eigh(reduced_covariance(in, rest).sigma).values(0) + 1e-9);
  }
}

TEST_CASE("for pure states every basis reduces to the Schmidt modes") {
  std::mt19937_64 rng(55);
  const int n = 7;
  const auto p = lossypdc::testing::random_pair(n, rng, 1.2);
  const auto corr = vacuum_correlations(p);
  const auto cov = covariance_from_correlations(corr);
  const ModeBasis schmidt = bloch_messiah(p).basis();
  for (const ModeBasis& b : {mercer_wolf(corr), williamson_euler_basis(cov), msq_basis(cov)}) {
    const CMatrix chi = overlap(schmidt, b);
    for (int k = 0; k < n; ++k) CHECK(std::abs(chi(k, k)) == doctest::Approx(1.0).epsilon(1e-8));
    const auto rep = basis_report(corr, b, 3);
    CHECK(rep.full_purity == doctest::Approx(1.0).epsilon(1e-8));
    for (double pu : rep.purities) CHECK(pu == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("vacuum gives the identity in every basis") {
  const int n = 5;
  const auto corr = CorrelationPair::vacuum(n);
  const auto cov = covariance_from_correlations(corr);
  const CMatrix id = CMatrix::Identity(n, n);
  CHECK(max_abs(CMatrix(mercer_wolf(corr).u - id)) < 1e-14);
  CHECK(max_abs(CMatrix(williamson_euler_basis(cov).u - id)) < 1e-12);
  CHECK(max_abs(CMatrix(msq_basis(cov).u - id)) < 1e-12);
  const auto rep = basis_report(corr, ModeBasis{id, BasisKind::custom}, 3);
  CHECK(rep.k == 0.0);
  CHECK(rep.full_purity == doctest::Approx(1.0));
  for (const auto& q : rep.quadratures) CHECK(q.dp2_db == doctest::Approx(0.0));
}

TEST_CASE("basis report") {
  std::mt19937_64 rng(56);
  const int n = 6;
  const auto corr = correlations_from_covariance(lossypdc::testing::random_state(n, rng));
  const auto b = mercer_wolf(corr);
  const auto rep = basis_report(corr, b, 2, 2);
  CHECK(rep.photons.sum() == doctest::Approx(corr.c1.trace().real()));
  CHECK(rep.k == doctest::Approx(mode_count(rep.photons)));
  REQUIRE(rep.purities.size() == 2);
  CHECK(rep.purities[0] == doctest::Approx(purity(reduced_covariance(rep.covariance, {0}))));
  CHECK(rep.full_purity ==
        doctest::Approx(purity(covariance_from_correlations(corr))).epsilon(1e-10));
  REQUIRE(rep.shapes.size() == 2);
  CHECK(rep.shapes[1].magnitude(3) == doctest::Approx(std::abs(b.u(1, 3))));
}

TEST_CASE("phase unwrapping from the anchor") {
  const int n = 41;
  CVector row(n);
  RVector truth(n);
  for (int i = 0; i < n; ++i) {
    truth(i) = 0.4 * (i - 20) + 0.01 * (i - 20) * (i - 20);
    row(i) = std::polar(1.0, truth(i));
  }
  const RVector ph = unwrap_phase(row, 20);
  CHECK(max_abs(RVector(ph - truth)) < 1e-12);
  CHECK_THROWS_AS(unwrap_phase(row, n), ValidationError);
}
