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

// Broadband mode bases for mixed (lossy) states and per-basis reports.

#pragma once

#include <vector>

#include "lossypdc/gaussian.hpp"

namespace lossypdc {

// Eigenbasis of <a^dag a>, phases chosen so every <A_i A_i> is real and
// non-negative.
ModeBasis mercer_wolf(const CorrelationPair& corr);
// Same rule starting from eigenvectors of <a^dag a> (columns, eigenvalues
// descending). Degenerate eigenspaces are canonicalized here.
ModeBasis mercer_wolf_from_eigensystem(CMatrix vectors, const RVector& values, const CMatrix& c2);

// sigma = S diag(nu; nu) S^T
struct WilliamsonDecomposition {
  RMatrix s;
  RVector nu;  // descending
};
WilliamsonDecomposition williamson(const CovarianceMatrix& cov);

// S = O_l diag(e^r; e^-r) O_r
struct EulerFactors {
  RMatrix o_left;
  RMatrix o_right;
  RVector r;  // descending
};
EulerFactors euler(const RMatrix& s);

double symplectic_residual(const RMatrix& s);

ModeBasis williamson_euler_basis(const CovarianceMatrix& cov);

// Stage-by-stage minimal variance basis. `stage_minima`, when given, receives
// the smallest eigenvalue found at each stage.
ModeBasis msq_basis(const CovarianceMatrix& cov, RVector* stage_minima = nullptr);

struct ModeShape {
  RVector magnitude;
  RVector phase;  // unwrapped, anchored at the grid centre
};

RVector unwrap_phase(const CVector& row, int anchor);

struct BasisReport {
  BasisKind kind = BasisKind::custom;
  CovarianceMatrix covariance;  // in the basis
  RVector photons;
  std::vector<QuadratureEntry> quadratures;
  RVector pq_cross;             // symmetrized <P_m Q_m> per mode
  double k = 0.0;
  std::vector<double> purities;  // first 1, 2, ... modes
  double full_purity = 1.0;
  std::vector<ModeShape> shapes;
};

BasisReport basis_report(const CorrelationPair& corr, const ModeBasis& basis,
                         int n_modes_for_purity, int n_shapes = 3);

}  // namespace lossypdc
