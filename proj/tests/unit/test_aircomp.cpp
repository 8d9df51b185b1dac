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
#include "oracles.hpp"
#include "otafl/aircomp.hpp"
#include "otafl/channel.hpp"
#include "otafl/random.hpp"

using namespace otafl;

namespace {

Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

CMat exp_corr(int m, double beta, double rho, double phi) {
  CMat r(m, m);
  for (int j = 0; j < m; ++j) {
    for (int k = 0; k < m; ++k) {
      r(j, k) = std::polar(beta * std::pow(rho, std::abs(j - k)), phi * (j - k));
    }
  }
  return r;
}

// Three UTs, three APs with M = 2 and overlapping clusters.
struct Net {
  CorrelationSet cs{3, 3, 2};
  AssociationMap assoc;

  explicit Net(const CsiConfig& csi) {
    for (int n = 0; n < 3; ++n) {
      for (int l = 0; l < 3; ++l) {
        cs.r(n, l) = exp_corr(2, 0.3 + 0.4 * ((n + 2 * l) % 3), 0.5,
                              0.2 * (n - l));
      }
    }
    fill_error_covariances(cs, csi);
    assoc = make_association({{0, 1}, {1}, {1, 2}}, cs);
  }
};

}  // namespace

TEST_CASE("update to symbol mapping") {
  SUBCASE("d = 4, S = 2") {
    const SymbolFrame f = map_to_symbols(vec({1, 2, 3, 4}), 2);
    CHECK(f.transmissions == 1);
    CHECK(f.pad_len == 0);
    CHECK(f.at(0, 0, 0) == cd(1, 2));
    CHECK(f.at(0, 0, 1) == cd(3, 4));
  }
  SUBCASE("d = 2, S = 2 pads with zeros") {
    const SymbolFrame f = map_to_symbols(vec({5, 6}), 2);
    CHECK(f.pad_len == 2);
    CHECK(f.at(0, 0, 0) == cd(5, 6));
    CHECK(f.at(0, 0, 1) == cd(0, 0));
  }
  SUBCASE("d = 6, S = 1") {
    const SymbolFrame f = map_to_symbols(vec({1, 2, 3, 4, 5, 6}), 1);
    CHECK(f.transmissions == 3);
    CHECK(f.at(0, 0, 0) == cd(1, 2));
    CHECK(f.at(0, 1, 0) == cd(3, 4));
    CHECK(f.at(0, 2, 0) == cd(5, 6));
  }
  SUBCASE("d = 8, S = 2 spreads subcarriers over the second half") {
    const SymbolFrame f = map_to_symbols(vec({1, 2, 3, 4, 5, 6, 7, 8}), 2);
    CHECK(f.transmissions == 2);
    CHECK(f.at(0, 0, 0) == cd(1, 2));
    CHECK(f.at(0, 1, 0) == cd(3, 4));
    CHECK(f.at(0, 0, 1) == cd(5, 6));
    CHECK(f.at(0, 1, 1) == cd(7, 8));
  }
  CHECK_THROWS_AS(map_to_symbols(vec({1}), 0), std::invalid_argument);
}

TEST_CASE("demap inverts the mapping") {
  const Vec u = vec({1, 2, 3, 4});
  const SymbolFrame f = map_to_symbols(u, 2);
  CHECK(demap(f.client(0), 1.0, 4, 0, 2) == u);

  std::vector<cd> scaled(f.client(0).begin(), f.client(0).end());
  for (cd& s : scaled) s *= 2.0;
  CHECK(demap(scaled, 2.0, 4, 0, 2) == u);

  for (int d = 1; d <= 9; ++d) {
    for (int s = 1; s <= 3; ++s) {
      Vec x(d);
      for (int i = 0; i < d; ++i) x(i) = 0.5 * i - 1.0;
      const SymbolFrame g = map_to_symbols(x, s);
      CHECK(demap(g.client(0), 1.0, d, g.pad_len, s) == x);
    }
  }
  CHECK_THROWS_AS(demap(f.client(0), 0.0, 4, 0, 2), std::invalid_argument);
  CHECK_THROWS_AS(demap(f.client(0), 1.0, 4, 1, 2), std::invalid_argument);
  CHECK_THROWS_AS(demap(f.client(0), 1.0, 5, 0, 2), std::invalid_argument);
}

TEST_CASE("combiner") {
  SUBCASE("single UT, single AP") {
    CorrelationSet cs(1, 2, 2);
    cs.r(0, 0) = CMat::Identity(2, 2);
    cs.r(0, 1) = CMat::Identity(2, 2);
    const AssociationMap a = make_association({{1}}, cs);
    ChannelDraw d;
    d.resize(1, 2, 2);
    d.h.setZero();
    d.h_hat.setZero();
    d.h_err.setZero();
    d.h_hat.col(d.index(0, 1)) << cd(1, 1), cd(0, 2);
    const CMat v = build_combiner(d, a, std::vector<int>{0});
    CHECK(v.col(0).norm() == 0.0);
    CHECK(v(0, 1) == cd(0.5, 0.5));
    CHECK(v(1, 1) == cd(0.0, 1.0));
  }
  SUBCASE("two UTs sharing an AP with the same estimate") {
    CorrelationSet cs(2, 1, 2);
    cs.r(0, 0) = CMat::Identity(2, 2);
    cs.r(1, 0) = CMat::Identity(2, 2);
    const AssociationMap a = make_association({{0}, {0}}, cs);
    ChannelDraw d;
    d.resize(2, 1, 2);
    d.h.setZero();
    d.h_hat.setZero();
    d.h_err.setZero();
    d.h_hat.col(0) << cd(1, 0), cd(0, 3);
    d.h_hat.col(1) = d.h_hat.col(0);
    const CMat v = build_combiner(d, a, std::vector<int>{0, 1});
    CHECK((v.col(0) - d.h_hat.col(0) / 2.0).norm() < 1e-15);
  }
  SUBCASE("matches the dense form") {
    Net net({CsiConfig{CsiMode::kMmse, 2.0, 0.0}});
    RayleighChannel ch(net.cs, net.assoc, 4);
    const ChannelDraw d = ch.draw(0);
    const std::vector<int> active{0, 2};
    const CMat v = build_combiner(d, net.assoc, active);
    const CVec dense = oracle::combiner(d, net.cs, net.assoc, active);
    const CVec flat = v.reshaped();
    CHECK((flat - dense).norm() < 1e-14 * dense.norm());
  }
}

TEST_CASE("the four terms sum to the received combiner output") {
  Net net({CsiConfig{CsiMode::kMmse, 1.0, 0.0}});
  RayleighChannel ch(net.cs, net.assoc, 11, true);
  for (int slot = 0; slot < 20; ++slot) {
    const ChannelDraw d = ch.draw(slot);
    const CMat z = draw_noise(5, slot, 2, 3, 0.7);
    Rng rng(slot + 100);
    std::vector<cd> x(3);
    for (cd& v : x) v = rng.complex_normal();
    for (const std::vector<int>& active :
         {std::vector<int>{0, 1, 2}, std::vector<int>{1, 2},
          std::vector<int>{0}}) {
      const TermSet t = combine_symbol(x, active, 0.8, d, net.assoc, z);
      const cd ref = oracle::combined_output(d, net.cs, net.assoc, active, x,
                                             0.8, z);
      CHECK(std::abs(t.total() - ref) <= 1e-10 * std::max(1.0, std::abs(ref)));
    }
  }
}

TEST_CASE("perfect CSI leaves no estimation-error term") {
  Net net({CsiConfig{CsiMode::kPerfect, 1.0, 0.0}});
  RayleighChannel ch(net.cs, net.assoc, 3);
  const std::vector<Vec> updates{vec({1, -2, 3}), vec({0.5, 0, 1}),
                                 vec({-1, 1, 2})};
  const SymbolFrame f = make_frame(updates, 1);
  const OtaLink link{&ch, &net.assoc, 0.3, 9};
  const std::vector<int> active{0, 1, 2};
  const AggregateResult r = transmit_and_combine(f, 0.5, link, 0, active);
  for (const TermSet& t : r.terms) CHECK(t.interf2 == cd(0.0));
  CHECK(r.delta_hat.size() == 3);
}

TEST_CASE("unit-gain surrogate with one UT returns the update") {
  CorrelationSet cs(1, 1, 2);
  cs.r(0, 0) = CMat::Identity(2, 2);
  const AssociationMap a = make_association({{0}}, cs);
  const UnitGainSurrogate s = make_unit_gain_surrogate(a, 1, 2);
  const Vec u = vec({0.3, -1.7, 2.5, 1e-3, 7.0});
  const SymbolFrame f = map_to_symbols(u, 2);
  const OtaLink link{s.channel.get(), &s.association, 0.0, 0};
  const std::vector<int> active{0};
  for (double alpha : {1.0, 0.25, 4.0}) {
    CHECK(transmit_and_combine(f, alpha, link, 0, active).delta_hat == u);
  }
}

TEST_CASE("transmit_and_combine is reproducible and slot-addressed") {
  Net net({CsiConfig{CsiMode::kExplicitCov, 1.0, 0.1}});
  RayleighChannel ch(net.cs, net.assoc, 6);
  const std::vector<Vec> updates{vec({1, 2, 3, 4}), vec({0, 1, 0, 1}),
                                 vec({2, 2, -2, 2})};
  const SymbolFrame f = make_frame(updates, 1);
  const OtaLink link{&ch, &net.assoc, 0.1, 4};
  const std::vector<int> active{0, 1, 2};
  const Vec a = transmit_and_combine(f, 1.0, link, 10, active).delta_hat;
  CHECK(transmit_and_combine(f, 1.0, link, 10, active).delta_hat == a);
  CHECK(transmit_and_combine(f, 1.0, link, 12, active).delta_hat != a);
  const OtaLink bad{&ch, nullptr, 0.1, 4};
  CHECK_THROWS_AS(transmit_and_combine(f, 1.0, bad, 0, active),
                  std::invalid_argument);
}

TEST_CASE("noise draws have the requested variance") {
  double p = 0.0;
  const int slots = 20000;
  for (int s = 0; s < slots; ++s) p += draw_noise(1, s, 2, 3, 0.5).squaredNorm();
  CHECK(p / (slots * 6) == doctest::Approx(0.25).epsilon(0.02));
  CHECK(draw_noise(1, 0, 2, 3, 0.0).norm() == 0.0);
}

TEST_CASE("power ledger") {
  SUBCASE("one transmission with energy 2") {
    PowerLedger l;
    CHECK(account_power(l, map_to_symbols(vec({1, 1}), 1), 1.0) ==
          doctest::Approx(2.0));
  }
  SUBCASE("doubling alpha quadruples power") {
    PowerLedger a, b;
    const SymbolFrame f = map_to_symbols(vec({1, -2, 0.5}), 1);
    CHECK(account_power(b, f, 2.0) ==
          doctest::Approx(4.0 * account_power(a, f, 1.0)));
  }
  SUBCASE("zero updates use no power") {
    PowerLedger l;
    CHECK(account_power(l, map_to_symbols(Vec::Zero(4), 2), 3.0) == 0.0);
    CHECK(std::isinf(l.max_average_dbm()));
  }
  SUBCASE("averages over rounds and transmissions, max over clients") {
    PowerLedger l(2);
    const std::vector<Vec> r1{vec({1, 0, 0, 0}), vec({2, 0, 0, 0})};
    const std::vector<Vec> r2{vec({3, 0, 0, 0}), vec({0, 0, 0, 0})};
    l.account(make_frame(r1, 1), 1.0);
    l.account(make_frame(r2, 1), 1.0);
    CHECK(l.transmissions() == 4);
    CHECK(l.average(0) == doctest::Approx(10.0 / 4));
    CHECK(l.average(1) == doctest::Approx(4.0 / 4));
    CHECK(l.max_average() == doctest::Approx(2.5));
  }
}

TEST_CASE("unit conversions") {
  CHECK(thermal_noise_dbm(15e3, 7.0) == doctest::Approx(-125.239).epsilon(1e-5));
  CHECK(dbm_to_mw(0.0) == 1.0);
  CHECK(mw_to_dbm(100.0) == doctest::Approx(20.0));
  CHECK(mw_to_dbm(dbm_to_mw(-93.5)) == doctest::Approx(-93.5));
}
