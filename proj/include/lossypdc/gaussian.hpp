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

// Non-displaced Gaussian states: correlation matrices, covariance matrices,
// basis changes and the scalar diagnostics built on them.
//
// Conventions: q = a + a^dag, p = -i (a - a^dag), [q, p] = 2i, so the
// vacuum covariance is the identity. Quadrature vectors are ordered
// (q_1..q_N, p_1..p_N).

#pragma once

#include <string>
#include <vector>

#include "lossypdc/types.hpp"

namespace lossypdc {

struct CorrelationPair {
  CMatrix c1;  // <a_i^dag a_j>, Hermitian
  CMatrix c2;  // <a_i a_j>, symmetric
  std::string basis_tag = "monochromatic";

  int size() const { return static_cast<int>(c1.rows()); }
  static CorrelationPair vacuum(int n);
};

struct CovarianceMatrix {
  RMatrix sigma;
  int modes() const { return static_cast<int>(sigma.rows() / 2); }
};

enum class BasisKind { schmidt, mercer_wolf, williamson_euler, msq, custom };
std::string to_string(BasisKind kind);

// Rows of u are broadband modes: A_k = sum_n u_kn a_n.
struct ModeBasis {
  CMatrix u;
  BasisKind kind = BasisKind::custom;
};

// Throws ValidationError when Hermiticity/symmetry fail beyond
// tol * max(1, |C|_max).
void validate_correlations(const CorrelationPair& corr, double tol = 1e-10);
// Restores exact Hermiticity of c1 and symmetry of c2.
void symmetrize(CorrelationPair& corr);

CovarianceMatrix covariance_from_correlations(const CorrelationPair& corr);
CorrelationPair correlations_from_covariance(const CovarianceMatrix& cov);

CorrelationPair transform_correlations(const CorrelationPair& corr, const ModeBasis& basis);

RMatrix symplectic_form(int n);
// O(U) = [[Re U, -Im U], [Im U, Re U]]
RMatrix symplectic_from_unitary(const CMatrix& u);
RMatrix symplectic_from_unitary(const ModeBasis& basis);
CovarianceMatrix transform_covariance(const CovarianceMatrix& cov, const CMatrix& u);

double to_db(double variance);

struct QuadratureEntry {
  double dq2 = 1.0;
  double dp2 = 1.0;
  double dq2_db = 0.0;
  double dp2_db = 0.0;
  bool squeezed = false;
};
std::vector<QuadratureEntry> quadrature_report(const CovarianceMatrix& cov);

double purity(const CovarianceMatrix& cov);
CovarianceMatrix reduced_covariance(const CovarianceMatrix& cov, const std::vector<int>& modes);
double mode_count(const RVector& photons);
CMatrix overlap(const ModeBasis& u, const ModeBasis& v);

// Smallest eigenvalue of sigma + i Omega; non-negative for physical states.
double physicality_margin(const CovarianceMatrix& cov);

void require_unitary(const CMatrix& u, double tol, const char* what);

}  // namespace lossypdc
