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

#ifndef OTAFL_TOPOLOGY_HPP_
#define OTAFL_TOPOLOGY_HPP_

#include <cstdint>
#include <iosfwd>
#include <variant>
#include <vector>

#include "otafl/types.hpp"

namespace otafl {

enum class Layout {
  kCellFree,  // APs uniform in the square
  kCellular,  // one AP at the centre
};

enum class CorrelationKind { kIdentity, kExponential };

struct CorrelationModel {
  CorrelationKind kind = CorrelationKind::kIdentity;
  double rho = 0.0;  // exponential model only, 0 <= rho < 1
};

// UT served by its `q` strongest APs.
struct TopQ {
  int q = 4;
};

// UT served by every AP within `delta_db` of its strongest, at most `q_max`.
struct Threshold {
  double delta_db = 10.0;
  int q_max = 4;
};

using AssociationPolicy = std::variant<TopQ, Threshold>;

struct NetworkConfig {
  Layout layout = Layout::kCellFree;
  int num_uts = 20;
  int num_aps = 10;
  int antennas_per_ap = 4;
  double area_side = 2000.0;  // meters
  double pathloss_exponent = 3.76;
  double shadowing_std_db = 10.0;
  double pathloss_offset_db = -30.5;  // gain at 1 m
  double min_distance = 10.0;         // meters
  CorrelationModel correlation;
  AssociationPolicy association = TopQ{};
  std::uint64_t seed = 1;

  // Throws ConfigError naming the field.
  void validate() const;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

double distance(const Point& a, const Point& b);

struct Topology {
  std::vector<Point> ap_positions;
  std::vector<Point> ut_positions;
  Mat beta;  // num_uts x num_aps, linear power gain
  int antennas_per_ap = 1;

  int num_uts() const { return static_cast<int>(ut_positions.size()); }
  int num_aps() const { return static_cast<int>(ap_positions.size()); }
};

// Spatial correlation R and CSI-error covariance C per (UT, AP) link. C is
// left zero here and filled by the channel module.
class CorrelationSet {
 public:
  CorrelationSet() = default;
  CorrelationSet(int num_uts, int num_aps, int antennas);

  int num_uts() const { return num_uts_; }
  int num_aps() const { return num_aps_; }
  int antennas() const { return antennas_; }

  const CMat& r(int ut, int ap) const { return r_[index(ut, ap)]; }
  CMat& r(int ut, int ap) { return r_[index(ut, ap)]; }
  const CMat& c(int ut, int ap) const { return c_[index(ut, ap)]; }
  CMat& c(int ut, int ap) { return c_[index(ut, ap)]; }

  // Flat (ut, ap) -> slot index used by per-link storage elsewhere.
  int index(int ut, int ap) const { return ut * num_aps_ + ap; }

 private:
  int num_uts_ = 0;
  int num_aps_ = 0;
  int antennas_ = 0;
  std::vector<CMat> r_;
  std::vector<CMat> c_;
};

struct AssociationMap {
  std::vector<std::vector<int>> serving_aps;  // K_n, ascending AP index
  std::vector<std::vector<int>> served_uts;   // S_l, ascending UT index
  std::vector<double> c;                      // c_n = sum_{l in K_n} tr R_{n,l}

  int num_uts() const { return static_cast<int>(serving_aps.size()); }
  int num_aps() const { return static_cast<int>(served_uts.size()); }
  bool serves(int ap, int ut) const;
};

// Large-scale gain in dB for a link at `meters`, without shadowing.
double pathloss_db(double meters, const NetworkConfig& config);

Topology place_network(const NetworkConfig& config);

// Recomputes beta for given positions (shadowing drawn from the config seed).
Mat compute_beta(const std::vector<Point>& aps, const std::vector<Point>& uts,
                 const NetworkConfig& config);

CorrelationSet build_correlations(const Topology& topology,
                                  const NetworkConfig& config);

AssociationMap associate(const Topology& topology,
                         const CorrelationSet& correlations,
                         const AssociationPolicy& policy);

// Rebuilds S_l and c_n from the serving sets. Exposed for callers that build
// serving sets by hand (tests, surrogate channels).
AssociationMap make_association(std::vector<std::vector<int>> serving_aps,
                                const CorrelationSet& correlations);

// Positions in meters, beta in dB, serving sets as index lists.
void write_topology(std::ostream& out, const Topology& topology,
                    const AssociationMap& association);

}  // namespace otafl

#endif  // OTAFL_TOPOLOGY_HPP_
