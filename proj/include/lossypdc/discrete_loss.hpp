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

// Loss as a chain of lossless segments, each followed by a beamsplitter that
// couples in a fresh environment mode.

#pragma once

#include <vector>

#include "lossypdc/continuous_loss.hpp"
#include "lossypdc/lossless.hpp"

namespace lossypdc {

struct SegmentChain {
  int segments = 0;
  double dz = 0.0;
  std::vector<BogoliubovPair> pairs;  // segment m at index m - 1
  std::vector<RVector> t;             // amplitude transmission after segment m
  std::vector<RVector> r;             // sqrt(1 - t^2)
};

SegmentChain build_chain(double gamma, const PropagationTables& tables, const LossProfile& loss,
                         double length, int segments, int steps_per_segment);

// a(L) = sum_m E~^m c_m + F~^m c_m^dag with c_0 = a(0) and c_m = f_m.
struct PartialBogoliubov {
  std::vector<CMatrix> e;  // M + 1 entries
  std::vector<CMatrix> f;
};

PartialBogoliubov assemble_partial(const SegmentChain& chain);

// max of |sum E~E~^H - F~F~^H - I| and the asymmetry of sum E~F~^T.
double partial_residual(const PartialBogoliubov& partial);

CorrelationPair correlations_from_partial(const PartialBogoliubov& partial,
                                          const EnvironmentSpec& env,
                                          const InputState& input = InputState::vacuum());

struct PartialMercer {
  ModeBasis basis;
  RVector lambda_e;
  RVector lambda_f;
  double commutator = 0.0;  // |[G_E, G_F]| of the two Gram matrices
};

PartialMercer mercer_from_partial(const PartialBogoliubov& partial);

}  // namespace lossypdc
