// Copyright 2026 The otafl Authors
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
#include <limits>

#include "doctest.h"
#include "oracles.hpp"
#include "otafl/moments.hpp"

using namespace otafl;

TEST_CASE("relative error and checks") {
  CHECK(relative_error(0.0, 0.0) == 0.0);
  CHECK(std::isinf(relative_error(1.0, 0.0)));
  CHECK(relative_error(1.02, 1.0) == doctest::Approx(0.02));
  const MomentCheck c = make_check("x", 0.99, 1.0, 0.02);
  CHECK(c.passed);
  CHECK(c.name == "x");
  CHECK_FALSE(make_check("y", 1.1, 1.0, 0.02).passed);
  CHECK_FALSE(make_check("z", std::numeric_limits<double>::quiet_NaN(), 1.0,
                         0.02)
                  .passed);
}

TEST_CASE("noise term closed form, identity R and one AP") {
  MomentInstance inst;
  inst.correlations = CorrelationSet(10, 1, 4);
  for (int n = 0; n < 10; ++n) {
    inst.correlations.r(n, 0) = CMat::Identity(4, 4);
    inst.correlations.c(n, 0) = CMat::Zero(4, 4);
  }
  inst.association =
      make_association(std::vector<std::vector<int>>(10, {0}),
                       inst.correlations);
  inst.updates.assign(10, Vec::Ones(2));
  inst.alpha = 1.0;
  inst.noise_std = 1.0;
  const ClosedForms cf = closed_form_moments(inst);
  CHECK(cf.noise_entry == doctest::Approx(0.0125));
  CHECK(cf.interf2_sum == 0.0);
}

TEST_CASE("closed forms agree with the dense oracle") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    InstanceSpec spec;
    spec.seed = seed;
    spec.dimension = 3;
    spec.csi = {CsiMode::kMmse, 1.0 + seed, 0.0};
    spec.alpha = 0.7;
    spec.noise_std = 0.4;
    const MomentInstance inst = make_random_instance(spec);
    const ClosedForms cf = closed_form_moments(inst);
    const oracle::Moments o =
        oracle::moments(inst.correlations, inst.association, inst.updates,
                        inst.alpha, inst.noise_std);
    CHECK((cf.signal_entry - o.signal_entry).norm() <=
          1e-12 * o.signal_entry.norm());
    CHECK(cf.interf1_sum == doctest::Approx(o.interf1_sum).epsilon(1e-12));
    CHECK(cf.interf2_sum == doctest::Approx(o.interf2_sum).epsilon(1e-12));
    CHECK(cf.noise_entry == doctest::Approx(o.noise_entry).epsilon(1e-12));
  }
}

TEST_CASE("measured moments approach the closed forms") {
  InstanceSpec spec;
  spec.seed = 3;
  const MomentInstance inst = make_random_instance(spec);
  const ClosedForms cf = closed_form_moments(inst);
  const MeasuredMoments m = measure_moments(inst, 40000);
  CHECK(m.frames == 40000);
  CHECK(relative_error(m.interf1_sum, cf.interf1_sum) < 0.1);
  CHECK(relative_error(m.interf2_sum, cf.interf2_sum) < 0.1);
  for (int i = 0; i < m.noise_entry.size(); ++i) {
    CHECK(relative_error(m.noise_entry(i), cf.noise_entry) < 0.1);
    CHECK(relative_error(m.signal_entry(i), cf.signal_entry(i)) < 0.1);
  }
  // The two interference terms are uncorrelated, so their variances add.
  CHECK(relative_error(m.interference_sum, m.interf1_sum + m.interf2_sum) <
        0.05);
  // Unbiased: the sample mean sits near the average update.
  Vec target = Vec::Zero(inst.updates.front().size());
  for (const Vec& u : inst.updates) target += u;
  target /= static_cast<double>(inst.updates.size());
  for (int i = 0; i < target.size(); ++i) {
    const double se = std::sqrt(m.var_delta(i) / 40000.0);
    CHECK(std::abs(m.mean_delta(i) - target(i)) <= 4.0 * se);
  }
}

TEST_CASE("instances are reproducible") {
  InstanceSpec spec;
  const MomentInstance a = make_random_instance(spec);
  const MomentInstance b = make_random_instance(spec);
  CHECK(a.association.serving_aps == b.association.serving_aps);
  CHECK(a.updates.front() == b.updates.front());
  CHECK(a.correlations.r(1, 2) == b.correlations.r(1, 2));
  for (const auto& k : a.association.serving_aps) CHECK(k.size() == 3);
}

TEST_CASE("quadratic form helper") {
  CMat r = CMat::Zero(2, 2);
  r(0, 0) = 2.0;
  r(1, 1) = 1.0;
  const QuadraticFormMoments q =
      quadratic_form_moments(r, r, CMat::Identity(2, 2), 200000, 7);
  CHECK(q.cross_expected == doctest::Approx(5.0));
  CHECK(q.self_expected == doctest::Approx(5.0));
  CHECK(relative_error(q.cross_measured, 5.0) < 0.05);
  CHECK(relative_error(q.self_measured, 5.0) < 0.05);
}
