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

// Moment (master) equations for <a^dag a> and <a a> under gain and
// Markovian loss.

#pragma once

#include "lossypdc/dispersion.hpp"
#include "lossypdc/gaussian.hpp"

namespace lossypdc {

enum class EnvironmentKind { vacuum, thermal, custom };

struct EnvironmentSpec {
  EnvironmentKind kind = EnvironmentKind::vacuum;
  RVector nbar;        // thermal occupation per frequency
  CMatrix custom_c1;   // <f^dag f>, custom only
  CMatrix custom_c2;   // <f f>, custom only

  static EnvironmentSpec vacuum();
  static EnvironmentSpec thermal(RVector nbar);
  static EnvironmentSpec custom(CMatrix c1, CMatrix c2);
  // <f^dag f> and <f f> as N x N matrices.
  CMatrix moment1(int n) const;
  CMatrix moment2(int n) const;
};

enum class InputKind { vacuum, thermal };

struct InputState {
  InputKind kind = InputKind::vacuum;
  RVector nbar;

  static InputState vacuum();
  static InputState thermal(RVector nbar);
  CorrelationPair correlations(int n) const;
};

struct MasterDerivative {
  CMatrix dc1;
  CMatrix dc2;
};

// Lab-frame right-hand side, including the fast k_i rotation.
MasterDerivative master_rhs(double z, const CMatrix& c1, const CMatrix& c2, double gamma,
                            const PropagationTables& tables, const LossProfile& loss,
                            const EnvironmentSpec& env);

struct MasterDiagnostics {
  double max_step_drift = 0.0;   // asymmetry before each symmetrization
  double physicality = 0.0;      // min eig(sigma + i Omega) at the output
};

struct MasterOptions {
  int steps = 1000;
  bool check_physicality = true;
};

CorrelationPair integrate_master(double gamma, const PropagationTables& tables,
                                 const LossProfile& loss, const InputState& input,
                                 const EnvironmentSpec& env, double length,
                                 const MasterOptions& options = {},
                                 MasterDiagnostics* diagnostics = nullptr);

// Minimal quadrature variance of a single degenerate lossy squeezer with
// amplitude gain gamma and intensity loss alpha after length L.
double single_mode_oracle(double gamma, double alpha, double length);

}  // namespace lossypdc
