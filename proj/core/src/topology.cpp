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

#include "otafl/topology.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>

#include "otafl/random.hpp"

namespace otafl {

void NetworkConfig::validate() const {
  if (num_uts < 1) throw ConfigError("must be >= 1", "network.num_uts");
  if (num_aps < 1) throw ConfigError("must be >= 1", "network.num_aps");
  if (antennas_per_ap < 1) {
    throw ConfigError("must be >= 1", "network.antennas_per_ap");
  }
  if (!(area_side > 0.0)) throw ConfigError("must be > 0", "network.area_side");
  if (!(min_distance > 0.0)) {
    throw ConfigError("must be > 0", "network.min_distance");
  }
  if (shadowing_std_db < 0.0) {
    throw ConfigError("must be >= 0", "network.shadowing_std_db");
  }
  if (layout == Layout::kCellular && num_aps != 1) {
    throw ConfigError("cellular layout has exactly one AP", "network.num_aps");
  }
  if (correlation.kind == CorrelationKind::kExponential &&
      !(correlation.rho >= 0.0 && correlation.rho < 1.0)) {
    throw ConfigError("rho must satisfy 0 <= rho < 1",
                      "network.correlation.rho");
  }
  if (const auto* top = std::get_if<TopQ>(&association); top && top->q < 1) {
    throw ConfigError("q must be >= 1", "network.association.q");
  }
  if (const auto* th = std::get_if<Threshold>(&association)) {
    if (th->q_max < 1) {
      throw ConfigError("q_max must be >= 1", "network.association.q_max");
    }
    if (th->delta_db < 0.0) {
      throw ConfigError("delta_db must be >= 0",
                        "network.association.delta_db");
    }
  }
}

double distance(const Point& a, const Point& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

CorrelationSet::CorrelationSet(int num_uts, int num_aps, int antennas)
    : num_uts_(num_uts),
      num_aps_(num_aps),
      antennas_(antennas),
      r_(static_cast<size_t>(num_uts) * num_aps,
         CMat::Zero(antennas, antennas)),
      c_(static_cast<size_t>(num_uts) * num_aps,
         CMat::Zero(antennas, antennas)) {}

bool AssociationMap::serves(int ap, int ut) const {
  const auto& k = serving_aps[ut];
  return std::binary_search(k.begin(), k.end(), ap);
}

double pathloss_db(double meters, const NetworkConfig& config) {
  const double d = std::max(meters, config.min_distance);
  return config.pathloss_offset_db -
         10.0 * config.pathloss_exponent * std::log10(d);
}

Mat compute_beta(const std::vector<Point>& aps, const std::vector<Point>& uts,
                 const NetworkConfig& config) {
  Mat beta(uts.size(), aps.size());
  for (size_t n = 0; n < uts.size(); ++n) {
    for (size_t l = 0; l < aps.size(); ++l) {
      double db = pathloss_db(distance(uts[n], aps[l]), config);
      if (config.shadowing_std_db > 0.0) {
        Rng rng = Rng::stream(config.seed, Purpose::kShadowing, n, l);
        db += config.shadowing_std_db * rng.normal();
      }
      beta(n, l) = std::pow(10.0, db / 10.0);
    }
  }
  return beta;
}

Topology place_network(const NetworkConfig& config) {
  config.validate();
  Topology topo;
  topo.antennas_per_ap = config.antennas_per_ap;
  const double side = config.area_side;

  // UT positions use their own substream so the cell-free and cellular
  // variants of one seed share user locations.
  topo.ut_positions.reserve(config.num_uts);
  for (int n = 0; n < config.num_uts; ++n) {
    Rng rng = Rng::stream(config.seed, Purpose::kPlacement, 0, n);
    const double x = rng.uniform(0.0, side);
    const double y = rng.uniform(0.0, side);
    topo.ut_positions.push_back({x, y});
  }
  if (config.layout == Layout::kCellular) {
    topo.ap_positions.push_back({side / 2.0, side / 2.0});
  } else {
    topo.ap_positions.reserve(config.num_aps);
    for (int l = 0; l < config.num_aps; ++l) {
      Rng rng = Rng::stream(config.seed, Purpose::kPlacement, 1, l);
      const double x = rng.uniform(0.0, side);
      const double y = rng.uniform(0.0, side);
      topo.ap_positions.push_back({x, y});
    }
  }
  topo.beta = compute_beta(topo.ap_positions, topo.ut_positions, config);
  return topo;
}

CorrelationSet build_correlations(const Topology& topology,
                                  const NetworkConfig& config) {
  const auto& model = config.correlation;
  if (model.kind == CorrelationKind::kExponential &&
      !(model.rho >= 0.0 && model.rho < 1.0)) {
    throw ConfigError("rho must satisfy 0 <= rho < 1",
                      "network.correlation.rho");
  }
  const int n_ut = topology.num_uts();
  const int n_ap = topology.num_aps();
  const int m = topology.antennas_per_ap;
  CorrelationSet set(n_ut, n_ap, m);
  for (int n = 0; n < n_ut; ++n) {
    for (int l = 0; l < n_ap; ++l) {
      const double b = topology.beta(n, l);
      CMat& r = set.r(n, l);
      if (model.kind == CorrelationKind::kIdentity || model.rho == 0.0) {
        r = CMat::Identity(m, m) * b;
        continue;
      }
      // rho^{|j-k|} Toeplitz rotated by a per-link phase ramp; the rotation
      // is a unitary similarity so eigenvalues and trace are unchanged.
      Rng rng = Rng::stream(config.seed, Purpose::kPhase, n, l);
      const double phi = rng.uniform(-std::numbers::pi, std::numbers::pi);
      for (int j = 0; j < m; ++j) {
        for (int k = 0; k < m; ++k) {
          const double mag = b * std::pow(model.rho, std::abs(j - k));
          r(j, k) = std::polar(mag, phi * (j - k));
        }
      }
    }
  }
  return set;
}

AssociationMap make_association(std::vector<std::vector<int>> serving_aps,
                                const CorrelationSet& correlations) {
  AssociationMap map;
  const int n_ut = static_cast<int>(serving_aps.size());
  map.served_uts.assign(correlations.num_aps(), {});
  map.c.assign(n_ut, 0.0);
  for (int n = 0; n < n_ut; ++n) {
    auto& k = serving_aps[n];
    std::sort(k.begin(), k.end());
    k.erase(std::unique(k.begin(), k.end()), k.end());
    if (k.empty()) {
      throw ConfigError("UT " + std::to_string(n) + " has no serving AP");
    }
    double c = 0.0;
    for (int l : k) {
      map.served_uts[l].push_back(n);
      c += correlations.r(n, l).trace().real();
    }
    if (!(c > 0.0)) {
      throw ConfigError("UT " + std::to_string(n) + " has zero cluster gain");
    }
    map.c[n] = c;
  }
  map.serving_aps = std::move(serving_aps);
  return map;
}

AssociationMap associate(const Topology& topology,
                         const CorrelationSet& correlations,
                         const AssociationPolicy& policy) {
  const int n_ut = topology.num_uts();
  const int n_ap = topology.num_aps();
  std::vector<std::vector<int>> serving(n_ut);
  std::vector<int> order(n_ap);
  for (int n = 0; n < n_ut; ++n) {
    std::iota(order.begin(), order.end(), 0);
    // Strongest first; equal gains fall back to the lower AP index.
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return topology.beta(n, a) > topology.beta(n, b);
    });
    int take = 0;
    if (const auto* top = std::get_if<TopQ>(&policy)) {
      take = std::min(top->q, n_ap);
    } else {
      const auto& th = std::get<Threshold>(policy);
      const double floor_db =
          10.0 * std::log10(topology.beta(n, order[0])) - th.delta_db;
      const int cap = std::min(th.q_max, n_ap);
      while (take < cap &&
             10.0 * std::log10(topology.beta(n, order[take])) >= floor_db) {
        ++take;
      }
      take = std::max(take, 1);
    }
    serving[n].assign(order.begin(), order.begin() + take);
  }
  return make_association(std::move(serving), correlations);
}

void write_topology(std::ostream& out, const Topology& topology,
                    const AssociationMap& association) {
  out << "# aps: index x_m y_m\n";
  for (int l = 0; l < topology.num_aps(); ++l) {
    out << "ap " << l << ' ' << topology.ap_positions[l].x << ' '
        << topology.ap_positions[l].y << '\n';
  }
  out << "# uts: index x_m y_m c_n serving_aps...\n";
  for (int n = 0; n < topology.num_uts(); ++n) {
    out << "ut " << n << ' ' << topology.ut_positions[n].x << ' '
        << topology.ut_positions[n].y << ' ' << association.c[n];
    for (int l : association.serving_aps[n]) out << ' ' << l;
    out << '\n';
  }
  out << "# beta_db: ut followed by one value per ap\n";
  for (int n = 0; n < topology.num_uts(); ++n) {
    out << "beta " << n;
    for (int l = 0; l < topology.num_aps(); ++l) {
      out << ' ' << 10.0 * std::log10(topology.beta(n, l));
    }
    out << '\n';
  }
}

}  // namespace otafl
