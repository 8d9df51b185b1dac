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

#include "otafl/aircomp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "otafl/random.hpp"

namespace otafl {

int transmissions_for(int d, int subcarriers) {
  return (d + 2 * subcarriers - 1) / (2 * subcarriers);
}

SymbolFrame make_frame(std::span<const Vec> updates, int subcarriers) {
  if (subcarriers < 1) throw std::invalid_argument("subcarriers must be >= 1");
  if (updates.empty()) throw std::invalid_argument("no updates to map");
  const int d = static_cast<int>(updates.front().size());
  if (d == 0) throw std::invalid_argument("update dimension must be >= 1");

  SymbolFrame frame;
  frame.num_clients = static_cast<int>(updates.size());
  frame.d = d;
  frame.subcarriers = subcarriers;
  frame.transmissions = transmissions_for(d, subcarriers);
  frame.pad_len = 2 * frame.transmissions * subcarriers - d;
  frame.symbols.assign(static_cast<size_t>(frame.num_clients) *
                           frame.transmissions * subcarriers,
                       cd{});
  const int big_k = frame.transmissions;
  for (int n = 0; n < frame.num_clients; ++n) {
    const Vec& u = updates[n];
    if (u.size() != d) throw std::invalid_argument("ragged update sizes");
    auto entry = [&](int i) { return i < d ? u(i) : 0.0; };
    for (int k = 0; k < big_k; ++k) {
      for (int s = 0; s < subcarriers; ++s) {
        const int base = 2 * k + 2 * s * big_k;
        frame.at(n, k, s) = {entry(base), entry(base + 1)};
      }
    }
  }
  return frame;
}

SymbolFrame map_to_symbols(const Vec& delta, int subcarriers) {
  return make_frame(std::span<const Vec>(&delta, 1), subcarriers);
}

Vec demap(std::span<const cd> symbols, double alpha, int d, int pad_len,
          int subcarriers) {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");
  if (subcarriers < 1) throw std::invalid_argument("subcarriers must be >= 1");
  const int big_k = transmissions_for(d, subcarriers);
  if (pad_len != 2 * big_k * subcarriers - d ||
      static_cast<int>(symbols.size()) != big_k * subcarriers) {
    throw std::invalid_argument("symbol layout does not match d and S");
  }
  Vec out(d);
  for (int k = 0; k < big_k; ++k) {
    for (int s = 0; s < subcarriers; ++s) {
      const cd y = symbols[static_cast<size_t>(k) * subcarriers + s];
      const int base = 2 * k + 2 * s * big_k;
      if (base < d) out(base) = y.real() / alpha;
      if (base + 1 < d) out(base + 1) = y.imag() / alpha;
    }
  }
  return out;
}

CMat build_combiner(const ChannelDraw& draw, const AssociationMap& association,
                    ActiveSet active) {
  CMat v = CMat::Zero(draw.antennas, draw.num_aps);
  if (active.empty()) return v;
  const double inv = 1.0 / static_cast<double>(active.size());
  for (int n : active) {
    const double c = association.c[n];
    if (!(c > 0.0)) throw std::invalid_argument("c_n must be > 0");
    for (int l : association.serving_aps[n]) {
      v.col(l) += draw.estimate(n, l) / c;
    }
  }
  return v * inv;
}

TermSet combine_symbol(std::span<const cd> x, ActiveSet active, double alpha,
                       const ChannelDraw& draw,
                       const AssociationMap& association, const CMat& noise) {
  TermSet out{};
  if (active.empty()) return out;
  const int m = draw.antennas;
  const double count = static_cast<double>(active.size());

  // u_l = sum_{n' active} h_{n',l} x_{n'}: the noiseless AP-l receive vector.
  CMat u = CMat::Zero(m, draw.num_aps);
  for (int np : active) {
    for (int l = 0; l < draw.num_aps; ++l) {
      u.col(l) += draw.true_channel(np, l) * x[np];
    }
  }

  cd sig{}, i1{}, i2{}, nz{};
  for (int n : active) {
    const double c = association.c[n];
    double gain = 0.0;
    cd cross{}, err{}, noisy{};
    for (int l : association.serving_aps[n]) {
      const auto hn = draw.true_channel(n, l);
      gain += hn.squaredNorm();
      // Cross terms summed directly, not as u_l minus the self term, so a
      // small interference value keeps its relative accuracy.
      for (int np : active) {
        if (np == n) continue;
        cross += hn.dot(draw.true_channel(np, l)) * x[np];
      }
      err += draw.error(n, l).dot(u.col(l));
      noisy += draw.estimate(n, l).dot(noise.col(l));
    }
    sig += (gain / c) * x[n];
    i1 += cross / c;
    i2 += err / c;
    nz += noisy / c;
  }
  out.signal = alpha * (sig / count);
  out.interf1 = alpha * (i1 / count);
  out.interf2 = alpha * (i2 / count);
  out.noise = nz / count;
  return out;
}

CMat draw_noise(std::uint64_t seed, std::uint64_t slot_id, int antennas,
                int num_aps, double noise_std) {
  CMat z(antennas, num_aps);
  if (noise_std == 0.0) {
    z.setZero();
    return z;
  }
  for (int l = 0; l < num_aps; ++l) {
    Rng rng = Rng::stream(seed, Purpose::kNoise, slot_id, l);
    for (int i = 0; i < antennas; ++i) z(i, l) = noise_std * rng.complex_normal();
  }
  return z;
}

AggregateResult transmit_and_combine(const SymbolFrame& frame, double alpha,
                                     const OtaLink& link,
                                     std::uint64_t first_slot,
                                     ActiveSet active) {
  if (link.noise_std < 0.0) throw std::invalid_argument("sigma_z must be >= 0");
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");
  if (link.channel == nullptr || link.association == nullptr) {
    throw std::invalid_argument("OTA link needs a channel and association");
  }
  if (link.association->num_uts() != frame.num_clients) {
    throw std::invalid_argument("frame clients do not match the UT count");
  }
  const int big_k = frame.transmissions;
  const int big_s = frame.subcarriers;

  AggregateResult result;
  result.alpha = alpha;
  result.terms.resize(static_cast<size_t>(big_k) * big_s);
  std::vector<cd> totals(result.terms.size());
  std::vector<cd> x(frame.num_clients);
  ChannelDraw draw;
  for (int k = 0; k < big_k; ++k) {
    for (int s = 0; s < big_s; ++s) {
      const std::uint64_t slot =
          first_slot + static_cast<std::uint64_t>(k) * big_s + s;
      link.channel->draw_into(slot, draw);
      if (draw.num_uts != frame.num_clients) {
        throw std::invalid_argument("channel draw does not match the frame");
      }
      const CMat z = draw_noise(link.noise_seed, slot, draw.antennas,
                                draw.num_aps, link.noise_std);
      for (int n = 0; n < frame.num_clients; ++n) x[n] = frame.at(n, k, s);
      const size_t idx = static_cast<size_t>(k) * big_s + s;
      result.terms[idx] =
          combine_symbol(x, active, alpha, draw, *link.association, z);
      totals[idx] = result.terms[idx].total();
    }
  }
  result.delta_hat = demap(totals, alpha, frame.d, frame.pad_len, big_s);

  result.symbol_energy.assign(frame.num_clients, 0.0);
  for (int n = 0; n < frame.num_clients; ++n) {
    double e = 0.0;
    for (cd v : frame.client(n)) e += std::norm(alpha * v);
    result.symbol_energy[n] = e / big_k;
  }
  return result;
}

void PowerLedger::account(const SymbolFrame& frame, double alpha) {
  if (sums_.empty()) sums_.assign(frame.num_clients, 0.0);
  if (static_cast<int>(sums_.size()) != frame.num_clients) {
    throw std::invalid_argument("ledger client count mismatch");
  }
  for (int n = 0; n < frame.num_clients; ++n) {
    double e = 0.0;
    for (cd v : frame.client(n)) e += std::norm(v);
    sums_[n] += alpha * alpha * e;
  }
  ++rounds_;
  transmissions_ += frame.transmissions;
}

double PowerLedger::average(int n) const {
  if (transmissions_ == 0) return 0.0;
  return sums_[n] / transmissions_;
}

double PowerLedger::max_average() const {
  double best = 0.0;
  for (size_t n = 0; n < sums_.size(); ++n) {
    best = std::max(best, average(static_cast<int>(n)));
  }
  return best;
}

double PowerLedger::max_average_dbm() const { return mw_to_dbm(max_average()); }

double account_power(PowerLedger& ledger, const SymbolFrame& frame,
                     double alpha) {
  ledger.account(frame, alpha);
  return ledger.max_average();
}

double thermal_noise_dbm(double bandwidth_hz, double noise_figure_db) {
  return -174.0 + 10.0 * std::log10(bandwidth_hz) + noise_figure_db;
}

double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }

double mw_to_dbm(double mw) {
  if (mw <= 0.0) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(mw);
}

}  // namespace otafl
