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

#include "lossypdc/discrete_loss.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lossypdc/errors.hpp"
#include "lossypdc/linalg.hpp"
#include "lossypdc/mode_bases.hpp"

namespace lossypdc {

SegmentChain build_chain(double gamma, const PropagationTables& tables, const LossProfile& loss,
                         double length, int segments, int steps_per_segment) {
  if (segments < 1) throw ValidationError("build_chain: need at least one segment");
  if (!(length > 0.0)) throw ValidationError("build_chain: length must be positive");
  const int n = tables.size();
  if (loss.alpha.size() != n) throw ValidationError("build_chain: loss profile has wrong length");
  if (n && loss.alpha.minCoeff() < 0.0) throw ValidationError("build_chain: negative loss");

  SegmentChain chain;
  chain.segments = segments;
  chain.dz = length / segments;
  RVector t(n), r(n);
  for (int i = 0; i < n; ++i) {
    t(i) = std::exp(-0.5 * loss.alpha(i) * chain.dz);
    r(i) = std::sqrt(-std::expm1(-loss.alpha(i) * chain.dz));
  }
  BogoliubovOptions opt;
  opt.steps = steps_per_segment;
  for (int m = 1; m <= segments; ++m) {
    const double z0 = (m - 1) * chain.dz;
    const double z1 = m == segments ? length : m * chain.dz;
    chain.pairs.push_back(integrate_bogoliubov(gamma, tables, z0, z1, opt));
    chain.t.push_back(t);
    chain.r.push_back(r);
  }
  return chain;
}

PartialBogoliubov assemble_partial(const SegmentChain& chain) {
  const int m_count = chain.segments;
  if (m_count < 1 || static_cast<int>(chain.pairs.size()) != m_count ||
      static_cast<int>(chain.t.size()) != m_count || static_cast<int>(chain.r.size()) != m_count)
    throw ValidationError("assemble_partial: inconsistent chain");
  const auto n = chain.pairs.front().e.rows();

  PartialBogoliubov out;
  out.e.resize(m_count + 1);
  out.f.resize(m_count + 1);
  // Y maps the field right after beamsplitter m onto the output.
  CMatrix ye = CMatrix::Identity(n, n);
  CMatrix yf = CMatrix::Zero(n, n);
  for (int m = m_count; m >= 1; --m) {
    const auto& pair = chain.pairs[m - 1];
    const RVector& t = chain.t[m - 1];
    const RVector& r = chain.r[m - 1];
    out.e[m] = ye * r.asDiagonal();
    out.f[m] = yf * r.asDiagonal();
    const CMatrix te = t.asDiagonal() * pair.e;
    const CMatrix tf = t.asDiagonal() * pair.f;
    CMatrix ye_next = ye * te + yf * tf.conjugate();
    CMatrix yf_next = ye * tf + yf * te.conjugate();
    ye.swap(ye_next);
    yf.swap(yf_next);
  }
  out.e[0] = ye;
  out.f[0] = yf;

  const double res = partial_residual(out);
  const double scale = std::max(1.0, std::pow(linalg::max_abs(out.e[0]), 2));
  if (!(res <= 1e-6 * scale)) {
    std::ostringstream msg;
    msg << "assemble_partial: partial commutation residual " << res;
    throw NumericalError(msg.str());
  }
  return out;
}

double partial_residual(const PartialBogoliubov& partial) {
  const auto n = partial.e.front().rows();
  CMatrix a = -CMatrix::Identity(n, n);
  CMatrix b = CMatrix::Zero(n, n);
  for (size_t m = 0; m < partial.e.size(); ++m) {
    a += partial.e[m] * partial.e[m].adjoint() - partial.f[m] * partial.f[m].adjoint();
    b += partial.e[m] * partial.f[m].transpose();
  }
  return std::max(linalg::max_abs(a), linalg::symmetry_error(b));
}

CorrelationPair correlations_from_partial(const PartialBogoliubov& partial,
                                          const EnvironmentSpec& env, const InputState& input) {
  if (env.kind == EnvironmentKind::custom)
    throw ValidationError("correlations_from_partial: only vacuum or thermal environments");
  const auto n = partial.e.front().rows();
  const RVector zero = RVector::Zero(n);
  const RVector n_in = input.kind == InputKind::thermal ? input.nbar : zero;
  const RVector n_env = env.kind == EnvironmentKind::thermal ? env.nbar : zero;
  if (n_in.size() != n || n_env.size() != n)
    throw ValidationError("correlations_from_partial: occupation vector has wrong length");

  CorrelationPair out = CorrelationPair::vacuum(static_cast<int>(n));
  for (size_t m = 0; m < partial.e.size(); ++m) {
    const RVector& occ = m == 0 ? n_in : n_env;
    const RVector occ1 = occ.array() + 1.0;
    const CMatrix& e = partial.e[m];
    const CMatrix& f = partial.f[m];
    // <c^dag c> = diag(occ), <c c^dag> = diag(1 + occ)
    out.c1 += f.conjugate() * occ1.asDiagonal() * f.transpose();
    out.c2 += e * occ1.asDiagonal() * f.transpose();
    if (occ.cwiseAbs().maxCoeff() > 0.0) {
      out.c1 += e.conjugate() * occ.asDiagonal() * e.transpose();
      out.c2 += f * occ.asDiagonal() * e.transpose();
    }
  }
  symmetrize(out);
  return out;
}

PartialMercer mercer_from_partial(const PartialBogoliubov& partial) {
  const auto n = partial.e.front().rows();
  CMatrix ge = CMatrix::Zero(n, n), gf = CMatrix::Zero(n, n), c2 = CMatrix::Zero(n, n);
  for (size_t m = 0; m < partial.e.size(); ++m) {
    ge += partial.e[m] * partial.e[m].adjoint();
    gf += partial.f[m] * partial.f[m].adjoint();
    c2 += partial.e[m] * partial.f[m].transpose();
  }
  ge = (0.5 * (ge + ge.adjoint())).eval();
  gf = (0.5 * (gf + gf.adjoint())).eval();
  c2 = (0.5 * (c2 + c2.transpose())).eval();

  PartialMercer out;
  out.commutator = linalg::max_abs(CMatrix(ge * gf - gf * ge));
  const double scale = std::max(1.0, std::pow(linalg::max_abs(ge), 2));
  if (!(out.commutator <= 1e-6 * scale)) {
    std::ostringstream msg;
    msg << "mercer_from_partial: Gram matrices do not commute (" << out.commutator << ")";
    throw NumericalError(msg.str());
  }

  // The common eigenvectors of the Gram matrices are the conjugates of the
  // eigenvectors of <a^dag a> = conj(G_F); hand them to the shared Mercer
  // routine in that form so both routes pick identical phases.
  linalg::HermitianEigen eig = linalg::eigh(gf);
  const RVector lf2 = eig.values.reverse();
  const CMatrix v = eig.vectors.rowwise().reverse();
  out.basis = mercer_wolf_from_eigensystem(v.conjugate(), lf2, c2);

  const CMatrix w = out.basis.u.adjoint();
  out.lambda_f = lf2.cwiseMax(0.0).cwiseSqrt();
  out.lambda_e = (w.adjoint() * ge * w).diagonal().real().cwiseMax(0.0).cwiseSqrt();
  return out;
}

}  // namespace lossypdc
