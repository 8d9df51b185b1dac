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

#ifndef OTAFL_CHANNEL_HPP_
#define OTAFL_CHANNEL_HPP_

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <vector>

#include "otafl/random.hpp"
#include "otafl/topology.hpp"
#include "otafl/types.hpp"

namespace otafl {

enum class CsiMode {
  kPerfect,      // C = 0
  kMmse,         // C = R - R (R + I/pilot_snr)^-1 R
  kExplicitCov,  // C = scale * R
};

struct CsiConfig {
  CsiMode mode = CsiMode::kPerfect;
  // Pilot energy over noise power, in the same linear units as beta.
  double pilot_snr = 1e12;
  double scale = 0.0;

  void validate() const;
};

// Hermitian square root with negative eigenvalues clamped to zero. Eigenvalues
// below -1e-10 * trace mean the input is not PSD and are rejected.
CMat psd_sqrt(const CMat& r);

// R^{1/2} w with w ~ CN(0, I).
CVec sample_gaussian(const CMat& r, Rng& rng);

CMat mmse_error_covariance(const CMat& r, double pilot_snr);

// Fills C_{n,l} for every link according to the CSI mode.
void fill_error_covariances(CorrelationSet& correlations, const CsiConfig& csi);

// One realisation of all channels for one (round, transmission, subcarrier).
// Columns are links in CorrelationSet::index order.
struct ChannelDraw {
  int num_uts = 0;
  int num_aps = 0;
  int antennas = 0;
  std::uint64_t slot_id = 0;
  CMat h;      // antennas x (num_uts * num_aps), true channels
  CMat h_err;  // realised estimation error; zero where not drawn
  CMat h_hat;  // h + h_err on drawn links, zero elsewhere

  void resize(int uts, int aps, int m);
  int index(int ut, int ap) const { return ut * num_aps + ap; }
  auto true_channel(int ut, int ap) const { return h.col(index(ut, ap)); }
  auto estimate(int ut, int ap) const { return h_hat.col(index(ut, ap)); }
  auto error(int ut, int ap) const { return h_err.col(index(ut, ap)); }
};

// Anything that can produce a ChannelDraw for a slot. Implementations are
// pure functions of (construction state, slot_id).
class ChannelSource {
 public:
  virtual ~ChannelSource() = default;
  virtual void draw_into(std::uint64_t slot_id, ChannelDraw& draw) const = 0;

  ChannelDraw draw(std::uint64_t slot_id) const {
    ChannelDraw d;
    draw_into(slot_id, d);
    return d;
  }
};

// Correlated Rayleigh channels with covariance-injected CSI error.
class RayleighChannel final : public ChannelSource {
 public:
  // `estimate_all` also draws estimates for links outside the serving sets.
  RayleighChannel(const CorrelationSet& correlations,
                  const AssociationMap& association, std::uint64_t seed,
                  bool estimate_all = false);

  void draw_into(std::uint64_t slot_id, ChannelDraw& draw) const override;

 private:
  int num_uts_;
  int num_aps_;
  int antennas_;
  std::uint64_t seed_;
  std::vector<CMat> r_sqrt_;
  std::vector<CMat> c_sqrt_;
  std::vector<char> has_error_;
  std::vector<char> estimated_;
};

inline ChannelDraw draw_slot(const RayleighChannel& channel,
                             std::uint64_t slot_id) {
  return channel.draw(slot_id);
}

// Deterministic stand-in with h_n^H D_n h_n' = c_n for n = n' and 0 otherwise:
// every UT gets a private antenna inside its own cluster carrying an exact
// unit entry, and the matching rank-one R makes c_n = 1.
struct UnitGainSurrogate {
  CorrelationSet correlations;
  AssociationMap association;
  std::shared_ptr<const ChannelSource> channel;
};

// Throws if no assignment of distinct antennas within the clusters exists.
UnitGainSurrogate make_unit_gain_surrogate(const AssociationMap& association,
                                           int num_aps, int antennas);

void write_draw(std::ostream& out, const ChannelDraw& draw);

}  // namespace otafl

#endif  // OTAFL_CHANNEL_HPP_
