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

#ifndef OTAFL_AIRCOMP_HPP_
#define OTAFL_AIRCOMP_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "otafl/channel.hpp"
#include "otafl/topology.hpp"
#include "otafl/types.hpp"

namespace otafl {

// Model updates of every client laid out as complex symbols x_n^{k,s}.
// Entry pairs are interleaved per transmission: symbol (k, s) carries
// entries 2k + 2sK (real) and 2k + 1 + 2sK (imaginary), 0-based.
struct SymbolFrame {
  int num_clients = 0;
  int d = 0;
  int subcarriers = 0;     // S
  int transmissions = 0;   // K = ceil(d / 2S)
  int pad_len = 0;         // 2KS - d
  std::vector<cd> symbols;  // [client][k][s]

  cd& at(int n, int k, int s) {
    return symbols[(static_cast<size_t>(n) * transmissions + k) * subcarriers +
                   s];
  }
  cd at(int n, int k, int s) const {
    return symbols[(static_cast<size_t>(n) * transmissions + k) * subcarriers +
                   s];
  }
  // The K*S symbols of one client, [k][s].
  std::span<const cd> client(int n) const {
    const size_t per = static_cast<size_t>(transmissions) * subcarriers;
    return {symbols.data() + n * per, per};
  }
};

int transmissions_for(int d, int subcarriers);

SymbolFrame map_to_symbols(const Vec& delta, int subcarriers);
SymbolFrame make_frame(std::span<const Vec> updates, int subcarriers);

// Inverse of the mapping followed by division by alpha; padding dropped.
// S is needed because (d, pad_len) alone do not fix the K x S layout.
Vec demap(std::span<const cd> symbols, double alpha, int d, int pad_len,
          int subcarriers);

// The four parts of the combined output v^H y for one (k, s).
struct TermSet {
  cd signal;
  cd interf1;
  cd interf2;
  cd noise;

  cd total() const { return signal + interf1 + interf2 + noise; }
};

// Clients taking part in a round, ascending. The combiner averages over
// exactly these, so 1/N becomes 1/|active|.
using ActiveSet = std::span<const int>;

// v = (1/|A|) sum_{n in A} D_n h_hat_n / c_n, as an (antennas x num_aps)
// matrix whose column l is AP block l. Blocks of APs serving no active UT
// are zero.
CMat build_combiner(const ChannelDraw& draw, const AssociationMap& association,
                    ActiveSet active);

// Combines one symbol. `x` holds one symbol per UT (entries outside `active`
// are ignored); `noise` is z as an (antennas x num_aps) matrix.
TermSet combine_symbol(std::span<const cd> x, ActiveSet active, double alpha,
                       const ChannelDraw& draw,
                       const AssociationMap& association, const CMat& noise);

struct AggregateResult {
  Vec delta_hat;
  std::vector<TermSet> terms;  // [k][s]
  double alpha = 1.0;
  std::vector<double> symbol_energy;  // per client, mean_k ||x~_n^k||^2
};

// Everything transmit_and_combine needs besides the frame.
struct OtaLink {
  const ChannelSource* channel = nullptr;
  const AssociationMap* association = nullptr;
  double noise_std = 0.0;
  std::uint64_t noise_seed = 0;
};

// Draws one channel per (k, s) at slot first_slot + k*S + s, combines, and
// reconstructs delta_hat from the term sums.
AggregateResult transmit_and_combine(const SymbolFrame& frame, double alpha,
                                     const OtaLink& link,
                                     std::uint64_t first_slot,
                                     ActiveSet active);

// z ~ CN(0, noise_std^2 I) for one slot, shaped antennas x num_aps.
CMat draw_noise(std::uint64_t seed, std::uint64_t slot_id, int antennas,
                int num_aps, double noise_std);

// Running energy accounting: per client the sum over rounds
// and transmissions of ||alpha x_n^k||^2.
class PowerLedger {
 public:
  PowerLedger() = default;
  explicit PowerLedger(int num_clients) : sums_(num_clients, 0.0) {}

  // Adds one round of transmissions for every client in the frame.
  void account(const SymbolFrame& frame, double alpha);

  int rounds() const { return rounds_; }
  int transmissions() const { return transmissions_; }
  // (1 / (T K)) sum of energies for client n.
  double average(int n) const;
  double max_average() const;
  // max_average() read as milliwatts, in dBm. -inf when zero.
  double max_average_dbm() const;

 private:
  std::vector<double> sums_;
  int rounds_ = 0;
  int transmissions_ = 0;
};

double account_power(PowerLedger& ledger, const SymbolFrame& frame,
                     double alpha);

// sigma_z^2 in dBm for thermal noise over `bandwidth_hz` with a receiver
// noise figure.
double thermal_noise_dbm(double bandwidth_hz, double noise_figure_db);
double dbm_to_mw(double dbm);
double mw_to_dbm(double mw);

}  // namespace otafl

#endif  // OTAFL_AIRCOMP_HPP_
