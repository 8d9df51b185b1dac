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

#include "otafl/bounds.hpp"

#include <algorithm>
#include <string>

namespace otafl {

void BoundInputs::validate(int rounds) const {
  if (!(mu > 0.0)) throw ConfigError("must be > 0", "bound.mu");
  if (smoothness < mu) throw ConfigError("must be >= mu", "bound.smoothness");
  if (local_steps < 1) throw ConfigError("must be >= 1", "bound.local_steps");
  if (num_clients < 1) throw ConfigError("must be >= 1", "bound.num_clients");
  const double cap = std::min(1.0, 1.0 / (mu * local_steps));
  for (int t = 0; t < std::max(rounds, 1); ++t) {
    const double e = eta.at(t);
    if (!(e > 0.0) || e > cap) {
      throw ConfigError("eta_t = " + std::to_string(e) + " outside (0, " +
                            std::to_string(cap) + "]",
                        "bound.eta");
    }
  }
}

namespace {

// tr(A B) without forming the product.
double trace_product(const CMat& a, const CMat& b) {
  return (a.array() * b.transpose().array()).sum().real();
}

}  // namespace

BoundConstants compute_constants(const CorrelationSet& correlations,
                                 const AssociationMap& association) {
  BoundConstants k;
  const int n_ut = association.num_uts();
  for (int n = 0; n < n_ut; ++n) {
    const double c = association.c[n];
    if (!(c > 0.0)) {
      throw ConfigError("c_n must be > 0 (UT " + std::to_string(n) + ")");
    }
    const double c2 = c * c;
    double err_trace = 0.0;
    for (int l : association.serving_aps[n]) {
      err_trace += correlations.c(n, l).trace().real();
    }
    k.kappa += 1.0 / c;
    k.kappa_tilde += err_trace / c2;
    for (int np = 0; np < n_ut; ++np) {
      double g = 0.0;
      double gt = 0.0;
      for (int l : association.serving_aps[n]) {
        const CMat& r_other = correlations.r(np, l);
        g += trace_product(correlations.r(n, l), r_other);
        gt += trace_product(correlations.c(n, l), r_other);
      }
      k.gamma = std::max(k.gamma, g / c2);
      k.gamma_tilde = std::max(k.gamma_tilde, gt / c2);
    }
  }
  k.kappa /= n_ut;
  k.kappa_tilde /= n_ut;
  return k;
}

double a_coeff(double eta, double mu, int local_steps) {
  const double tau = local_steps;
  return 1.0 - mu * eta * (tau - eta * (tau - 1.0));
}

double b_coeff(const BoundInputs& in, const BoundConstants& k, int t) {
  const double eta = in.eta.at(t);
  const double alpha = in.alpha.at(t);
  const double tau = in.local_steps;
  const double n = in.num_clients;
  const double g2 = in.gradient_bound * in.gradient_bound;
  const double eta2 = eta * eta;

  const double drift = 2.0 * eta * (tau - 1.0) * in.heterogeneity;
  const double local = (1.0 + in.mu * (1.0 - eta)) * eta2 * g2 * tau *
                       (tau - 1.0) * (2.0 * tau - 1.0) / 6.0;
  const double sgd = eta2 * (tau * tau + tau - 1.0) * g2;
  const double interference =
      (2.0 / n + (k.gamma_tilde + k.gamma) / (2.0 * n) -
       k.gamma / (2.0 * n * n)) *
      eta2 * tau * tau * g2;
  const double noise = in.dimension / (2.0 * n * alpha * alpha) *
                       (k.kappa + k.kappa_tilde) * in.noise_std *
                       in.noise_std;
  return drift + local + sgd + interference + noise;
}

std::vector<double> bound_trajectory(const BoundInputs& in,
                                     const BoundConstants& k, int rounds) {
  std::vector<double> e;
  e.reserve(static_cast<size_t>(rounds) + 1);
  e.push_back(in.initial_dist_sq);
  for (int t = 0; t < rounds; ++t) {
    e.push_back(a_coeff(in.eta.at(t), in.mu, in.local_steps) * e.back() +
                b_coeff(in, k, t));
  }
  return e;
}

std::vector<double> loss_gap_bound(const std::vector<double>& trajectory,
                                   double smoothness) {
  std::vector<double> gap(trajectory.size());
  std::transform(trajectory.begin(), trajectory.end(), gap.begin(),
                 [&](double e) { return 0.5 * smoothness * e; });
  return gap;
}

double corollary_a1(const BoundInputs& in, const BoundConstants& k) {
  if (in.local_steps != 1) {
    throw ConfigError("the plateau form needs tau = 1", "fl.local_steps");
  }
  if (!in.eta.is_constant() || !in.alpha.is_constant()) {
    throw ConfigError("the plateau form needs constant eta and alpha",
                      "fl.eta");
  }
  const double eta = in.eta.initial;
  const double alpha = in.alpha.initial;
  const double n = in.num_clients;
  const double g2 = in.gradient_bound * in.gradient_bound;
  const double inner =
      eta * eta * g2 +
      (2.0 / n + (k.gamma_tilde + k.gamma) / (2.0 * n) -
       k.gamma / (2.0 * n * n)) *
          eta * eta * g2 +
      in.dimension * (k.kappa + k.kappa_tilde) /
          (2.0 * n * alpha * alpha) * in.noise_std * in.noise_std;
  return inner / (in.mu * eta);
}

}  // namespace otafl
