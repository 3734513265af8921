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

// Thin LAPACK-backed helpers. Eigen's own dense solvers are fine for small
// blocks but far slower than LAPACK at N ~ 500, so the heavy
// factorizations go through LAPACKE.

#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "lossypdc/types.hpp"

namespace lossypdc::linalg {

// Eigenvalues ascending, eigenvectors in columns.
struct HermitianEigen {
  RVector values;
  CMatrix vectors;
};
struct SymmetricEigen {
  RVector values;
  RMatrix vectors;
};

HermitianEigen eigh(const CMatrix& a);
SymmetricEigen eigh(const RMatrix& a);
// `count` smallest eigenpairs.
SymmetricEigen eigh_lowest(const RMatrix& a, int count);
// All eigenpairs with values in (lo, hi].
SymmetricEigen eigh_window(const RMatrix& a, double lo, double hi);
// `count` largest eigenpairs, still returned in ascending order.
HermitianEigen eigh_top(const CMatrix& a, int count);

// a = u diag(s) vh with s descending.
struct Svd {
  CMatrix u;
  RVector s;
  CMatrix vh;
};
Svd svd(const CMatrix& a);
RVector singular_values(const CMatrix& a);

// Principal square root of a normal matrix (unitary in practice) through the
// complex Schur form, which is diagonal for normal input.
CMatrix sqrtm_normal(const CMatrix& a);
RMatrix sqrtm_spd(const RMatrix& a);

// Throws ValidationError if `a` is not symmetric positive definite.
double log_det_spd(const RMatrix& a);

double max_abs(const CMatrix& a);
double max_abs(const RMatrix& a);
double unitarity_error(const CMatrix& u);
double hermiticity_error(const CMatrix& a);
double symmetry_error(const CMatrix& a);
double symmetry_error(const RMatrix& a);

// Picks a reproducible orthonormal basis of a degenerate subspace.
// `coefficients` is k x c: column j holds the coordinates (in the current
// k-dimensional subspace basis) of the projection of the j-th candidate
// vector. Candidates are accepted in order by modified Gram-Schmidt. Returns a
// k x k unitary whose columns are the new basis in subspace coordinates.
CMatrix canonical_rotation(const CMatrix& coefficients);

// Splits sorted values into [begin, end) runs; a run continues while the gap
// to the next value is at most tol(value).
std::vector<std::pair<int, int>> clusters(const RVector& sorted_values,
                                          const std::function<double(double)>& tol);

}  // namespace lossypdc::linalg
