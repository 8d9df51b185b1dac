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
#include <sstream>

#include "doctest.h"
#include "otafl/config.hpp"
#include "otafl/harness.hpp"
#include "otafl/output.hpp"

using namespace otafl;

namespace {

const char* kSmall = R"({
  "seed": 5, "repetitions": 3,
  "network": {"num_uts": 6, "num_aps": 4, "antennas_per_ap": 2,
              "area_side": 300, "association": {"policy": "top_q", "q": 2}},
  "channel": {"csi": {"mode": "mmse", "pilot_snr": 1e13},
              "alpha": {"initial": 0.5}},
  "task": {"quadratic": {"dimension": 4, "initial_distance": 2}},
  "fl": {"rounds": 8, "eta": {"initial": 0.05}, "aggregation": "ota",
         "compare_bound": true}
})";

}  // namespace

TEST_CASE("repetitions are distinct and reproducible") {
  const ExperimentSpec spec = parse_spec(kSmall);
  const ResultBundle a = run_experiment(spec);
  const ResultBundle b = run_experiment(spec);
  REQUIRE(a.repetitions.size() == 3);
  CHECK(a.repetitions[0].seed != a.repetitions[1].seed);
  CHECK(a.repetitions[0].rounds.back().loss !=
        a.repetitions[1].rounds.back().loss);
  for (int i = 0; i < 3; ++i) {
    CHECK(a.repetitions[i].rounds.back().loss ==
          b.repetitions[i].rounds.back().loss);
  }
  CHECK(a.mean.size() == 9);
  CHECK(a.slots_drawn == 3u * 8u * 2u);
  CHECK(a.constants.has_value());
  CHECK(a.a1.has_value());
  REQUIRE(a.bound.size() == 9);
  CHECK(a.mean[4].bound == a.bound[4].e);
  // Mean of the three repetitions.
  double m = 0.0;
  for (const auto& r : a.repetitions) m += r.rounds[8].dist_sq / 3.0;
  CHECK(a.mean[8].dist_sq == doctest::Approx(m));
  CHECK(a.passed());

  std::ostringstream x, y;
  write_repetitions_csv(x, a);
  write_repetitions_csv(y, b);
  CHECK(x.str() == y.str());
}

TEST_CASE("bound mode draws no channels") {
  const ExperimentSpec spec = parse_spec(kSmall, {"mode=\"bound\""});
  const ResultBundle r = run_experiment(spec);
  CHECK(r.slots_drawn == 0);
  CHECK(r.repetitions.empty());
  CHECK(r.bound.size() == 9);
  CHECK(r.bound.front().e == doctest::Approx(4.0));
}

TEST_CASE("cellular counterpart keeps the antenna budget") {
  const ExperimentSpec spec = parse_spec(kSmall);
  const NetworkConfig cell = cellular_counterpart(spec);
  CHECK(cell.layout == Layout::kCellular);
  CHECK(cell.num_aps == 1);
  CHECK(cell.antennas_per_ap == 8);
  const BuiltNetwork net = build_network(cell, spec.csi);
  CHECK(net.topology.ap_positions[0].x == 150.0);
  for (const auto& k : net.association.serving_aps) CHECK(k.size() == 1);
}

TEST_CASE("sweep points") {
  const ExperimentSpec spec = parse_spec(
      kSmall, {"repetitions=1", "sweep.axis=\"alpha\"", "sweep.values=[0.25]"});
  const std::vector<ResultBundle> pts = sweep(spec);
  REQUIRE(pts.size() == 1);
  CHECK(*pts[0].sweep_value == 0.25);
  const ExperimentSpec direct =
      parse_spec(kSmall, {"repetitions=1", "channel.alpha.initial=0.25"});
  const ResultBundle d = run_experiment(direct);
  CHECK(pts[0].mean.back().loss == d.mean.back().loss);

  const ExperimentSpec n_point = sweep_point(
      parse_spec(kSmall, {"sweep.axis=\"N\""}), 3.0);
  CHECK(n_point.network.num_uts == 3);
  CHECK(n_point.quadratic.num_clients == 3);
}

TEST_CASE("moment verification on a small instance") {
  const ExperimentSpec spec = parse_spec(
      R"({"mode": "verify_moments",
          "moments": {"frames": 30000, "quadratic_samples": 30000,
                      "tolerance": 0.1,
                      "csi": {"mode": "perfect"}}})");
  const MomentsReport rep = verify_moments(spec);
  CHECK(rep.passed());
  bool saw = false;
  for (const auto& c : rep.checks) {
    if (c.name == "kappa_tilde") {
      saw = true;
      CHECK(c.measured == 0.0);
    }
  }
  CHECK(saw);
}
