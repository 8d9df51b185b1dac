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
#include <vector>

#include "doctest.h"
#include "otafl/channel.hpp"
#include "otafl/fl_engine.hpp"
#include "otafl/tasks.hpp"

using namespace otafl;

namespace {

Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

QuadraticClient unit_client(const Vec& b) {
  QuadraticClient c;
  c.q_diag = Vec::Ones(b.size());
  c.center = b;
  return c;
}

std::unique_ptr<QuadraticTask> identity_task(std::vector<Vec> centers,
                                             Vec start) {
  std::vector<QuadraticClient> cs;
  for (const Vec& b : centers) cs.push_back(unit_client(b));
  auto task = std::make_unique<QuadraticTask>(std::move(cs), 10.0);
  task->set_initial_point(std::move(start));
  return task;
}

}  // namespace

TEST_CASE("local SGD on a unit quadratic") {
  auto task = identity_task({vec({2, 0})}, Vec::Zero(2));
  Rng rng(1);
  const Vec theta = Vec::Zero(2);
  CHECK(local_sgd(theta, *task, 0, 0.5, 1, 0, rng) == vec({1, 0}));
  CHECK(local_sgd(theta, *task, 0, 0.5, 2, 0, rng) == vec({1.5, 0}));
  CHECK(local_sgd(theta, *task, 0, 0.0, 3, 0, rng) == vec({0, 0}));
  double g2 = 0.0;
  local_sgd(theta, *task, 0, 0.5, 2, 0, rng, &g2);
  CHECK(g2 == 4.0);
}

TEST_CASE("scheduling policies") {
  const std::vector<Vec> updates{vec({3}), vec({1}), vec({-2})};
  Rng rng(1);
  CHECK(schedule(SchedulingPolicy::kSignificance, updates, 2, rng) ==
        std::vector<int>{0, 2});
  for (auto p : {SchedulingPolicy::kRandom, SchedulingPolicy::kSignificance}) {
    CHECK(schedule(p, updates, 3, rng) == std::vector<int>{0, 1, 2});
  }
  Rng a(42), b(42);
  const std::vector<Vec> many(10, vec({1}));
  const auto first = schedule(SchedulingPolicy::kRandom, many, 4, a);
  CHECK(first == schedule(SchedulingPolicy::kRandom, many, 4, b));
  CHECK(first.size() == 4);
  CHECK(std::is_sorted(first.begin(), first.end()));
  // Scaling all updates does not change the significance ranking.
  std::vector<Vec> scaled = updates;
  for (Vec& u : scaled) u *= 1e-3;
  CHECK(schedule(SchedulingPolicy::kSignificance, scaled, 2, rng) ==
        std::vector<int>{0, 2});
  CHECK_THROWS_AS(schedule(SchedulingPolicy::kRandom, updates, 4, rng),
                  std::invalid_argument);
}

TEST_CASE("random scheduling is uniform") {
  const std::vector<Vec> many(5, vec({1}));
  std::vector<int> hits(5, 0);
  const int draws = 50000;
  for (int i = 0; i < draws; ++i) {
    Rng rng = Rng::stream(9, Purpose::kSchedule, i);
    for (int n : schedule(SchedulingPolicy::kRandom, many, 2, rng)) ++hits[n];
  }
  for (int h : hits) CHECK(h / double(draws) == doctest::Approx(0.4).epsilon(0.03));
}

TEST_CASE("single-client ideal FL is centralized SGD") {
  QuadraticSpec spec;
  spec.dimension = 3;
  spec.num_clients = 1;
  spec.initial_distance = 2.0;
  auto task = make_quadratic_task(spec, 5);
  FlConfig cfg;
  cfg.rounds = 20;
  cfg.local_steps = 3;
  cfg.batch_size = 5;
  cfg.eta = {0.2, 0.1};
  cfg.seed = 17;
  const RunResult r = run(cfg, *task, nullptr);
  Vec theta = task->initial_point();
  for (int t = 0; t < cfg.rounds; ++t) {
    Rng rng = Rng::stream(17, Purpose::kLocalSgd, t, 0);
    for (int i = 0; i < 3; ++i) {
      theta -= cfg.eta.at(t) * task->stochastic_gradient(0, theta, 5, rng);
    }
    // The engine applies theta + (theta_tau - theta), which may differ
    // from theta_tau in the last bit.
    CHECK(r.rounds[t + 1].loss ==
          doctest::Approx(task->loss(theta)).epsilon(1e-13));
  }
}

TEST_CASE("deterministic ideal FL contracts at rate (1 - eta)^2") {
  auto task = identity_task({vec({1, 0}), vec({-1, 2}), vec({0, 1})},
                            vec({5, 5}));
  FlConfig cfg;
  cfg.rounds = 10;
  cfg.eta = {0.3, 0.0};
  const RunResult r = run(cfg, *task, nullptr);
  REQUIRE(r.rounds.size() == 11);
  for (int t = 0; t < 10; ++t) {
    CHECK(r.rounds[t + 1].dist_sq ==
          doctest::Approx(0.49 * r.rounds[t].dist_sq).epsilon(1e-12));
    CHECK(r.rounds[t + 1].round == t + 1);
  }
  CHECK(std::isnan(r.rounds[3].power_dbm));
  CHECK(r.slots_drawn == 0);
}

TEST_CASE("partial ideal aggregation averages the scheduled clients") {
  auto task = identity_task({vec({10}), vec({0}), vec({-4})}, vec({0}));
  FlConfig cfg;
  cfg.rounds = 1;
  cfg.eta = {1.0, 0.0};
  cfg.participation = Participation::kPartial;
  cfg.selected = 2;
  cfg.policy = SchedulingPolicy::kSignificance;
  const RunResult r = run(cfg, *task, nullptr);
  // Updates are b_n; US keeps 10 and -4.
  const Vec theta = vec({3});
  CHECK(r.rounds[1].loss == task->loss(theta));
}

TEST_CASE("OTA through the unit-gain surrogate equals ideal aggregation") {
  QuadraticSpec spec;
  spec.dimension = 7;
  spec.num_clients = 3;
  spec.initial_distance = 4.0;
  auto task = make_quadratic_task(spec, 3);
  CorrelationSet cs(3, 2, 2);
  for (int n = 0; n < 3; ++n) {
    for (int l = 0; l < 2; ++l) cs.r(n, l) = CMat::Identity(2, 2);
  }
  const AssociationMap a = make_association({{0}, {0, 1}, {1}}, cs);
  const UnitGainSurrogate s = make_unit_gain_surrogate(a, 2, 2);
  NetworkBundle net;
  net.link = {s.channel.get(), &s.association, 0.0, 0};
  net.subcarriers = 2;

  FlConfig cfg;
  cfg.rounds = 15;
  cfg.local_steps = 2;
  cfg.batch_size = 3;
  cfg.eta = {0.3, 0.05};
  for (auto part : {Participation::kFull, Participation::kPartial}) {
    cfg.participation = part;
    cfg.selected = 2;
    cfg.aggregation = Aggregation::kIdeal;
    const RunResult ideal = run(cfg, *task, nullptr);
    cfg.aggregation = Aggregation::kOta;
    const RunResult ota = run(cfg, *task, &net);
    for (size_t t = 0; t < ideal.rounds.size(); ++t) {
      CHECK(ota.rounds[t].loss == ideal.rounds[t].loss);
      CHECK(ota.rounds[t].dist_sq == ideal.rounds[t].dist_sq);
    }
    CHECK(ota.slots_drawn == 15u * 2u * 2u);
    CHECK(std::isfinite(ota.rounds.back().power_dbm));
  }
}

TEST_CASE("step-size guard for bound comparison") {
  FlConfig cfg;
  cfg.compare_bound = true;
  cfg.local_steps = 4;
  cfg.eta = {0.3, 0.0};
  CHECK_THROWS_AS(cfg.validate(5, 1.0), ConfigError);
  cfg.eta = {0.25, 0.0};
  CHECK_NOTHROW(cfg.validate(5, 1.0));
  cfg.eta = {0.0, 0.0};
  CHECK_THROWS_AS(cfg.validate(5, 1.0), ConfigError);
  cfg.compare_bound = false;
  cfg.participation = Participation::kPartial;
  cfg.selected = 6;
  CHECK_THROWS_AS(cfg.validate(5, 1.0), ConfigError);
}

TEST_CASE("divergence is reported with the partial trajectory") {
  auto task = identity_task({vec({1})}, vec({2}));
  FlConfig cfg;
  cfg.rounds = 100;
  cfg.eta = {40.0, 0.0};
  try {
    run(cfg, *task, nullptr);
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.round() > 1);
    CHECK(e.partial().rounds.size() == static_cast<size_t>(e.round()) + 1);
  }
}
