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

#include "doctest.h"
#include "helpers.hpp"
#include "lossypdc/continuous_loss.hpp"
#include "lossypdc/discrete_loss.hpp"
#include "lossypdc/errors.hpp"
#include "lossypdc/lossless.hpp"
#include "lossypdc/mode_bases.hpp"

using namespace lossypdc;
using lossypdc::testing::max_abs;

namespace {

const PumpSpec kPump;

FrequencyGrid grid(int n) { return FrequencyGrid::for_pump(kPump, kDefaultHalfWidth, n); }

PropagationTables tables(int n) { return PropagationTables::build(grid(n), kPump, OpticalModel{}); }

}  // namespace

TEST_CASE("segment transmissions") {
  const int n = 5;
  const auto loss = loss_profile_constant(3.0, grid(n));
  const auto chain = build_chain(1e-5, tables(n), loss, 1e4, 8, 10);
  REQUIRE(chain.pairs.size() == 8);
  CHECK(chain.dz == doctest::Approx(1250.0));
  const double t = std::exp(-0.5 * loss.alpha(0) * 1250.0);
  CHECK(chain.t[3](2) == doctest::Approx(t));
  CHECK(chain.t[3](2) * chain.t[3](2) + chain.r[3](2) * chain.r[3](2) == doctest::Approx(1.0));
  CHECK_THROWS_AS(build_chain(1e-5, tables(n), loss, 1e4, 0, 10), ValidationError);
  CHECK_THROWS_AS(build_chain(1e-5, tables(n), loss_profile_none(4), 1e4, 2, 10), ValidationError);
}

TEST_CASE("without loss the chain is the lossless propagator") {
  const int n = 15;
  const auto t = tables(n);
  const double gamma = 3e-5;
  const auto partial = assemble_partial(build_chain(gamma, t, loss_profile_none(n), 1e4, 4, 50));
  REQUIRE(partial.e.size() == 5);
  BogoliubovOptions opt;
  opt.steps = 200;
  const auto pair = integrate_bogoliubov(gamma, t, 0.0, 1e4, opt);
  CHECK(max_abs(CMatrix(partial.e[0] - pair.e)) < 1e-9);
  CHECK(max_abs(CMatrix(partial.f[0] - pair.f)) < 1e-9);
  for (int m = 1; m <= 4; ++m) CHECK(max_abs(partial.e[m]) == 0.0);
  const auto c = correlations_from_partial(partial, EnvironmentSpec::vacuum());
  const auto want = vacuum_correlations(pair);
  CHECK(max_abs(CMatrix(c.c1 - want.c1)) < 1e-8);
  CHECK(max_abs(CMatrix(c.c2 - want.c2)) < 1e-8);
}

TEST_CASE("without gain the chain is an exact beamsplitter cascade") {
  const int n = 4;
  RVector alpha(n);
  alpha << 1e-4, 5e-5, 2e-4, 0.0;
  const LossProfile loss{alpha, "test"};
  RVector nb(n);
  nb << 1.0, 0.5, 3.0, 2.0;
  const double length = 7000.0;
  const auto partial = assemble_partial(build_chain(0.0, tables(n), loss, length, 16, 4));
  const auto decay = correlations_from_partial(partial, EnvironmentSpec::vacuum(),
                                               InputState::thermal(nb));
  const auto heat = correlations_from_partial(partial, EnvironmentSpec::thermal(nb));
  for (int i = 0; i < n; ++i) {
    const double tr = std::exp(-alpha(i) * length);
    CHECK(decay.c1(i, i).real() == doctest::Approx(nb(i) * tr).epsilon(1e-12));
    CHECK(std::abs(heat.c1(i, i).real() - nb(i) * (1 - tr)) <= 1e-12 * nb(i));
  }
  CHECK_THROWS_AS(correlations_from_partial(partial, EnvironmentSpec::custom(CMatrix::Zero(n, n),
                                                                             CMatrix::Zero(n, n))),
                  ValidationError);
}

TEST_CASE("lossy chain keeps the output commutators") {
  const int n = 15;
  const auto loss = loss_profile_constant(3.0, grid(n));
  const auto partial = assemble_partial(build_chain(3e-5, tables(n), loss, 1e4, 16, 12));
  CHECK(partial_residual(partial) < 1e-10);
}

TEST_CASE("discrete model converges to the continuous one at first order") {
  const int n = 15;
  const auto t = tables(n);
  const auto loss = loss_profile_constant(3.0, grid(n));
  const double gamma = 3e-5;
  MasterOptions mo;
  mo.steps = 400;
  const auto ref = integrate_master(gamma, t, loss, InputState::vacuum(), EnvironmentSpec::vacuum(),
                                    1e4, mo);
  double prev = 0.0;
  for (int m : {4, 8, 16}) {
    const auto c = correlations_from_partial(
        assemble_partial(build_chain(gamma, t, loss, 1e4, m, 400 / m)), EnvironmentSpec::vacuum());
    const double err = std::max(max_abs(CMatrix(c.c1 - ref.c1)), max_abs(CMatrix(c.c2 - ref.c2)));
    if (prev > 0.0) {
      CHECK(prev / err > 1.5);
      CHECK(prev / err < 2.5);
    }
    prev = err;
  }
}

TEST_CASE("Mercer basis from the partial transformation matches the correlation route") {
  const int n = 15;
  const auto loss = loss_profile_constant(3.0, grid(n));
  const auto partial = assemble_partial(build_chain(3e-5, tables(n), loss, 1e4, 8, 25));
  const auto pm = mercer_from_partial(partial);
  const auto corr = correlations_from_partial(partial, EnvironmentSpec::vacuum());
  const auto mw = mercer_wolf(corr);
  const RVector photons = transform_correlations(corr, mw).c1.diagonal().real();
  CHECK(pm.commutator < 1e-10);
  for (int k = 0; k < 5; ++k) {
    CHECK(pm.lambda_f(k) * pm.lambda_f(k) == doctest::Approx(photons(k)).epsilon(1e-9));
    CHECK(std::abs(pm.basis.u.row(k).dot(mw.u.row(k))) == doctest::Approx(1.0).epsilon(1e-8));
  }
  // Same phase convention on both routes.
  CHECK(max_abs(CMatrix(pm.basis.u.topRows(5) - mw.u.topRows(5))) < 1e-6);
}
