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

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "oracles.hpp"
#include "otafl/topology.hpp"

using namespace otafl;

namespace {

NetworkConfig small_config() {
  NetworkConfig c;
  c.num_uts = 6;
  c.num_aps = 5;
  c.antennas_per_ap = 3;
  c.area_side = 400.0;
  c.seed = 11;
  return c;
}

// Topology with hand-picked gains for association tests.
Topology with_beta_db(const std::vector<std::vector<double>>& db, int m) {
  Topology t;
  t.antennas_per_ap = m;
  const int n = static_cast<int>(db.size());
  const int l = static_cast<int>(db.front().size());
  t.ut_positions.assign(n, {});
  t.ap_positions.assign(l, {});
  t.beta.resize(n, l);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < l; ++j) t.beta(i, j) = std::pow(10.0, db[i][j] / 10.0);
  }
  return t;
}

}  // namespace

TEST_CASE("config validation names the field") {
  NetworkConfig c = small_config();
  c.num_uts = 0;
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("network.num_uts"),
                       ConfigError);
  c = small_config();
  c.correlation = {CorrelationKind::kExponential, 1.0};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config();
  c.area_side = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config();
  c.association = TopQ{0};
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("cellular layout puts the single AP in the centre") {
  NetworkConfig c = small_config();
  c.layout = Layout::kCellular;
  c.num_aps = 1;
  const Topology t = place_network(c);
  REQUIRE(t.num_aps() == 1);
  CHECK(t.ap_positions[0].x == 200.0);
  CHECK(t.ap_positions[0].y == 200.0);
}

TEST_CASE("positions lie in the square and beta is positive") {
  const Topology t = place_network(small_config());
  CHECK(t.num_uts() == 6);
  CHECK(t.num_aps() == 5);
  for (const auto& p : t.ut_positions) {
    CHECK(p.x >= 0.0);
    CHECK(p.x <= 400.0);
    CHECK(p.y >= 0.0);
    CHECK(p.y <= 400.0);
  }
  CHECK((t.beta.array() > 0.0).all());
}

TEST_CASE("pathloss follows the log-distance law with a clamp") {
  NetworkConfig c;
  CHECK(pathloss_db(100.0, c) == doctest::Approx(-30.5 - 37.6 * 2.0));
  CHECK(pathloss_db(1.0, c) == pathloss_db(10.0, c));
  CHECK(pathloss_db(10.0, c) == doctest::Approx(-68.1));
}

TEST_CASE("equal distance without shadowing gives equal beta") {
  NetworkConfig c;
  c.shadowing_std_db = 0.0;
  const std::vector<Point> aps{{0.0, 0.0}};
  const std::vector<Point> uts{{30.0, 40.0}, {-50.0, 0.0}};
  const Mat beta = compute_beta(aps, uts, c);
  CHECK(beta(0, 0) == beta(1, 0));
}

TEST_CASE("same seed reproduces the whole network bit for bit") {
  NetworkConfig c = small_config();
  c.correlation = {CorrelationKind::kExponential, 0.6};
  const Topology a = place_network(c);
  const Topology b = place_network(c);
  CHECK(a.beta == b.beta);
  const CorrelationSet ra = build_correlations(a, c);
  const CorrelationSet rb = build_correlations(b, c);
  for (int n = 0; n < c.num_uts; ++n) {
    for (int l = 0; l < c.num_aps; ++l) CHECK(ra.r(n, l) == rb.r(n, l));
  }
  const auto ma = associate(a, ra, c.association);
  const auto mb = associate(b, rb, c.association);
  CHECK(ma.serving_aps == mb.serving_aps);
  CHECK(ma.c == mb.c);
}

TEST_CASE("cell-free and cellular variants of a seed share UT positions") {
  NetworkConfig c = small_config();
  NetworkConfig cell = c;
  cell.layout = Layout::kCellular;
  cell.num_aps = 1;
  const Topology a = place_network(c);
  const Topology b = place_network(cell);
  for (int n = 0; n < c.num_uts; ++n) {
    CHECK(a.ut_positions[n].x == b.ut_positions[n].x);
    CHECK(a.ut_positions[n].y == b.ut_positions[n].y);
  }
}

TEST_CASE("identity correlation") {
  Topology t = with_beta_db({{10.0 * std::log10(2.0)}}, 3);
  NetworkConfig c;
  const CorrelationSet r = build_correlations(t, c);
  CHECK(r.r(0, 0).isApprox(CMat::Identity(3, 3) * 2.0, 1e-14));
  CHECK(r.r(0, 0).trace().real() == doctest::Approx(6.0));
}

TEST_CASE("exponential correlation") {
  Topology t = with_beta_db({{0.0, 3.0}}, 2);
  NetworkConfig c;
  SUBCASE("rho = 0 reduces to identity") {
    c.correlation = {CorrelationKind::kExponential, 0.0};
    const CorrelationSet r = build_correlations(t, c);
    CHECK(r.r(0, 0).isApprox(CMat::Identity(2, 2), 1e-14));
  }
  SUBCASE("rho = 0.5, beta = 1 has eigenvalues 1.5 and 0.5") {
    c.correlation = {CorrelationKind::kExponential, 0.5};
    const CorrelationSet r = build_correlations(t, c);
    const CMat& m = r.r(0, 0);
    CHECK((m - m.adjoint()).norm() < 1e-12);
    Eigen::SelfAdjointEigenSolver<CMat> es(m);
    CHECK(es.eigenvalues()(0) == doctest::Approx(0.5));
    CHECK(es.eigenvalues()(1) == doctest::Approx(1.5));
    CHECK(r.r(0, 1).trace().real() == doctest::Approx(2.0 * std::pow(10.0, 0.3)));
  }
  SUBCASE("rho >= 1 is rejected") {
    c.correlation = {CorrelationKind::kExponential, 1.0};
    CHECK_THROWS_AS(build_correlations(t, c), ConfigError);
  }
}

TEST_CASE("top-q association picks the strongest APs") {
  Topology t = with_beta_db({{-80.0, -90.0, -120.0}}, 4);
  NetworkConfig c;
  const CorrelationSet r = build_correlations(t, c);
  const auto a = associate(t, r, TopQ{2});
  CHECK(a.serving_aps[0] == std::vector<int>{0, 1});
  CHECK(a.served_uts[2].empty());
}

TEST_CASE("ties go to the lower AP index") {
  Topology t = with_beta_db({{-90.0, -80.0, -80.0, -80.0}}, 1);
  NetworkConfig c;
  const CorrelationSet r = build_correlations(t, c);
  CHECK(associate(t, r, TopQ{2}).serving_aps[0] == std::vector<int>{1, 2});
}

TEST_CASE("top-q larger than L is capped") {
  Topology t = with_beta_db({{-80.0, -70.0}}, 1);
  NetworkConfig c;
  const CorrelationSet r = build_correlations(t, c);
  CHECK(associate(t, r, TopQ{5}).serving_aps[0] == std::vector<int>{0, 1});
}

TEST_CASE("threshold association") {
  Topology t = with_beta_db({{-80.0, -85.0, -95.0, -89.0}}, 1);
  NetworkConfig c;
  const CorrelationSet r = build_correlations(t, c);
  CHECK(associate(t, r, Threshold{10.0, 4}).serving_aps[0] ==
        std::vector<int>{0, 1, 3});
  CHECK(associate(t, r, Threshold{10.0, 2}).serving_aps[0] ==
        std::vector<int>{0, 1});
  CHECK(associate(t, r, Threshold{0.0, 4}).serving_aps[0] ==
        std::vector<int>{0});
}

TEST_CASE("c_n is the serving-set trace sum") {
  SUBCASE("top-1 with identity R, beta 1, M 4") {
    Topology t = with_beta_db({{0.0, -10.0}}, 4);
    NetworkConfig c;
    const CorrelationSet r = build_correlations(t, c);
    CHECK(associate(t, r, TopQ{1}).c[0] == doctest::Approx(4.0));
  }
  SUBCASE("traces 2.5 and 1.5 add to 4") {
    CorrelationSet r(1, 2, 1);
    r.r(0, 0) = CMat::Constant(1, 1, 2.5);
    r.r(0, 1) = CMat::Constant(1, 1, 1.5);
    CHECK(make_association({{0, 1}}, r).c[0] == doctest::Approx(4.0));
  }
}

TEST_CASE("make_association rejects empty clusters and zero gain") {
  CorrelationSet r(1, 2, 1);
  CHECK_THROWS_AS(make_association({{}}, r), ConfigError);
  CHECK_THROWS_AS(make_association({{0}}, r), ConfigError);
}

TEST_CASE("association is bidirectional and c_n matches the masked trace") {
  NetworkConfig c = small_config();
  c.num_uts = 9;
  c.correlation = {CorrelationKind::kExponential, 0.4};
  c.association = Threshold{12.0, 3};
  const Topology t = place_network(c);
  const CorrelationSet r = build_correlations(t, c);
  const auto a = associate(t, r, c.association);
  for (int n = 0; n < c.num_uts; ++n) {
    CHECK(!a.serving_aps[n].empty());
    for (int l = 0; l < c.num_aps; ++l) {
      const bool in_k = std::count(a.serving_aps[n].begin(),
                                   a.serving_aps[n].end(), l) > 0;
      const bool in_s = std::count(a.served_uts[l].begin(),
                                   a.served_uts[l].end(), n) > 0;
      CHECK(in_k == in_s);
      CHECK(a.serves(l, n) == in_k);
    }
    const double dense = oracle::gain(r, a, n);
    CHECK(std::abs(a.c[n] - dense) <= 1e-10 * dense);
  }
}

TEST_CASE("far-AP gain per UT shrinks as the network grows at fixed density") {
  // Mean over UTs of sum_{l not serving} tr R_{n,l} / (M N).
  auto far_ratio = [](int n_ut, int reps) {
    double total = 0.0;
    for (int s = 0; s < reps; ++s) {
      NetworkConfig c;
      c.num_uts = n_ut;
      c.num_aps = n_ut / 2;
      c.area_side = 1000.0 * std::sqrt(n_ut / 10.0);
      c.shadowing_std_db = 0.0;
      c.seed = 100 + s;
      const Topology t = place_network(c);
      const CorrelationSet r = build_correlations(t, c);
      const auto a = associate(t, r, TopQ{4});
      for (int n = 0; n < n_ut; ++n) {
        double far = 0.0;
        for (int l = 0; l < c.num_aps; ++l) {
          if (!a.serves(l, n)) far += r.r(n, l).trace().real();
        }
        total += far / (c.antennas_per_ap * n_ut) / n_ut / reps;
      }
    }
    return total;
  };
  const double small = far_ratio(20, 30);
  const double large = far_ratio(80, 30);
  CHECK(large < small);
}

TEST_CASE("topology dump lists positions, clusters and gains") {
  NetworkConfig c = small_config();
  const Topology t = place_network(c);
  const CorrelationSet r = build_correlations(t, c);
  const auto a = associate(t, r, c.association);
  std::ostringstream out;
  write_topology(out, t, a);
  const std::string s = out.str();
  CHECK(s.find("ap 4 ") != std::string::npos);
  CHECK(s.find("ut 5 ") != std::string::npos);
  CHECK(s.find("beta 0 ") != std::string::npos);
}
