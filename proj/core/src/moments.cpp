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

#include "otafl/moments.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <numeric>

#include "otafl/aircomp.hpp"
#include "otafl/random.hpp"

namespace otafl {

double relative_error(double measured, double expected) {
  if (expected == 0.0) {
    return measured == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return std::abs(measured - expected) / std::abs(expected);
}

MomentCheck make_check(std::string name, double measured, double expected,
                       double tolerance) {
  MomentCheck c;
  c.name = std::move(name);
  c.measured = measured;
  c.expected = expected;
  c.rel_error = relative_error(measured, expected);
  c.tolerance = tolerance;
  c.passed = c.rel_error <= tolerance;
  return c;
}

MomentInstance make_random_instance(const InstanceSpec& spec) {
  if (spec.num_uts < 1 || spec.num_aps < 1 || spec.antennas < 1 ||
      spec.dimension < 1) {
    throw ConfigError("instance sizes must be >= 1", "moments");
  }
  if (spec.cluster_size < 1 || spec.cluster_size > spec.num_aps) {
    throw ConfigError("must be in [1, num_aps]", "moments.cluster_size");
  }
  spec.csi.validate();
  const int n_ut = spec.num_uts;
  const int n_ap = spec.num_aps;
  const int m = spec.antennas;

  MomentInstance inst;
  inst.correlations = CorrelationSet(n_ut, n_ap, m);
  Rng rng = Rng::stream(spec.seed, Purpose::kTask, 1);
  for (int n = 0; n < n_ut; ++n) {
    for (int l = 0; l < n_ap; ++l) {
      const double beta = 0.2 * std::pow(10.0, rng.uniform());
      const double rho = rng.uniform(0.2, 0.9);
      const double phi = rng.uniform(-std::numbers::pi, std::numbers::pi);
      CMat& r = inst.correlations.r(n, l);
      r.resize(m, m);
      for (int j = 0; j < m; ++j) {
        for (int k = 0; k < m; ++k) {
          r(j, k) = beta * std::pow(rho, std::abs(j - k)) *
                    std::polar(1.0, phi * (j - k));
        }
      }
    }
  }
  fill_error_covariances(inst.correlations, spec.csi);

  std::vector<std::vector<int>> serving(n_ut);
  for (int n = 0; n < n_ut; ++n) {
    std::vector<int> aps(n_ap);
    std::iota(aps.begin(), aps.end(), 0);
    for (int i = 0; i < spec.cluster_size; ++i) {
      std::uniform_int_distribution<int> pick(i, n_ap - 1);
      std::swap(aps[i], aps[pick(rng)]);
    }
    serving[n].assign(aps.begin(), aps.begin() + spec.cluster_size);
  }
  inst.association = make_association(std::move(serving), inst.correlations);

  Rng urng = Rng::stream(spec.seed, Purpose::kUpdates);
  inst.updates.resize(n_ut);
  for (auto& u : inst.updates) {
    u.resize(spec.dimension);
    for (int i = 0; i < spec.dimension; ++i) u[i] = urng.normal();
  }
  inst.alpha = spec.alpha;
  inst.noise_std = spec.noise_std;
  inst.seed = spec.seed;
  return inst;
}

namespace {

// tr(A D B D) where D keeps the antenna blocks of `aps`; block-diagonal
// masking reduces it to a sum over those blocks.
double masked_trace(const CorrelationSet& cs, bool first_is_error, int n,
                    int np, const std::vector<int>& aps) {
  double t = 0.0;
  for (int l : aps) {
    const CMat& a = first_is_error ? cs.c(n, l) : cs.r(n, l);
    t += (a.array() * cs.r(np, l).transpose().array()).sum().real();
  }
  return t;
}

}  // namespace

ClosedForms closed_form_moments(const MomentInstance& inst) {
  const int n_ut = static_cast<int>(inst.updates.size());
  const int d = static_cast<int>(inst.updates.front().size());
  const auto& assoc = inst.association;
  const auto& cs = inst.correlations;
  const double nn = static_cast<double>(n_ut) * n_ut;

  ClosedForms out;
  out.signal_entry = Vec::Zero(d);
  double kappa = 0.0;
  double kappa_tilde = 0.0;
  for (int n = 0; n < n_ut; ++n) {
    const auto& k_n = assoc.serving_aps[n];
    const double c2 = assoc.c[n] * assoc.c[n];
    const double self = masked_trace(cs, false, n, n, k_n) / c2;
    out.signal_entry += self * inst.updates[n].cwiseAbs2() / nn;
    for (int np = 0; np < n_ut; ++np) {
      const double w = inst.updates[np].squaredNorm() / nn;
      if (np != n) out.interf1_sum += masked_trace(cs, false, np, n, k_n) / c2 * w;
      out.interf2_sum += masked_trace(cs, true, n, np, k_n) / c2 * w;
    }
    double err_trace = 0.0;
    for (int l : k_n) err_trace += cs.c(n, l).trace().real();
    kappa += 1.0 / assoc.c[n];
    kappa_tilde += err_trace / c2;
  }
  kappa /= n_ut;
  kappa_tilde /= n_ut;
  out.noise_entry = (kappa + kappa_tilde) * inst.noise_std * inst.noise_std /
                    (2.0 * n_ut * inst.alpha * inst.alpha);
  return out;
}

MeasuredMoments measure_moments(const MomentInstance& inst,
                                std::uint64_t frames) {
  const int n_ut = static_cast<int>(inst.updates.size());
  const int d = static_cast<int>(inst.updates.front().size());
  const SymbolFrame frame = make_frame(inst.updates, inst.subcarriers);
  const std::uint64_t slots =
      static_cast<std::uint64_t>(frame.transmissions) * frame.subcarriers;

  RayleighChannel channel(inst.correlations, inst.association, inst.seed);
  OtaLink link{&channel, &inst.association, inst.noise_std,
               derive_seed(inst.seed, Purpose::kNoise)};
  std::vector<int> active(n_ut);
  std::iota(active.begin(), active.end(), 0);

  Vec mean_update = Vec::Zero(d);
  for (const auto& u : inst.updates) mean_update += u;
  mean_update /= n_ut;

  MeasuredMoments mm;
  mm.frames = frames;
  mm.signal_entry = Vec::Zero(d);
  mm.noise_entry = Vec::Zero(d);
  Vec sum = Vec::Zero(d);
  Vec sum_sq = Vec::Zero(d);
  std::vector<cd> part(slots);
  auto reconstruct = [&](const AggregateResult& agg, auto member) {
    for (std::uint64_t i = 0; i < slots; ++i) part[i] = agg.terms[i].*member;
    return demap(part, inst.alpha, d, frame.pad_len, frame.subcarriers);
  };
  for (std::uint64_t f = 0; f < frames; ++f) {
    const AggregateResult agg =
        transmit_and_combine(frame, inst.alpha, link, f * slots, active);
    mm.signal_entry +=
        (reconstruct(agg, &TermSet::signal) - mean_update).cwiseAbs2();
    const Vec i1 = reconstruct(agg, &TermSet::interf1);
    const Vec i2 = reconstruct(agg, &TermSet::interf2);
    mm.interf1_sum += i1.squaredNorm();
    mm.interf2_sum += i2.squaredNorm();
    mm.interference_sum += (i1 + i2).squaredNorm();
    mm.noise_entry += reconstruct(agg, &TermSet::noise).cwiseAbs2();
    sum += agg.delta_hat;
    sum_sq += agg.delta_hat.cwiseAbs2();
  }
  const double f = static_cast<double>(frames);
  mm.signal_entry /= f;
  mm.interf1_sum /= f;
  mm.interf2_sum /= f;
  mm.interference_sum /= f;
  mm.noise_entry /= f;
  mm.mean_delta = sum / f;
  mm.var_delta = (sum_sq - f * mm.mean_delta.cwiseAbs2()) / (f - 1.0);
  return mm;
}

QuadraticFormMoments quadratic_form_moments(const CMat& r, const CMat& r2,
                                            const CMat& mask,
                                            std::uint64_t samples,
                                            std::uint64_t seed) {
  const CMat s1 = psd_sqrt(r);
  const CMat s2 = psd_sqrt(r2);
  const cd self_mean = (r * mask).trace();
  QuadraticFormMoments q;
  for (std::uint64_t i = 0; i < samples; ++i) {
    Rng a = Rng::stream(seed, Purpose::kChannel, i, 0);
    Rng b = Rng::stream(seed, Purpose::kChannel, i, 1);
    CVec w1(r.rows());
    CVec w2(r2.rows());
    for (auto& v : w1) v = a.complex_normal();
    for (auto& v : w2) v = b.complex_normal();
    const CVec h = s1 * w1;
    const CVec h2 = s2 * w2;
    q.cross_measured += std::norm(h.dot(mask * h2));
    q.self_measured += std::norm(h.dot(mask * h) - self_mean);
  }
  q.cross_measured /= static_cast<double>(samples);
  q.self_measured /= static_cast<double>(samples);
  q.cross_expected = (r * mask * r2 * mask).trace().real();
  q.self_expected = (r * mask * r * mask).trace().real();
  return q;
}

}  // namespace otafl
