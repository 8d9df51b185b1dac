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

#ifndef OTAFL_BOUNDS_HPP_
#define OTAFL_BOUNDS_HPP_

#include <vector>

#include "otafl/fl_engine.hpp"
#include "otafl/topology.hpp"

namespace otafl {

// Channel statistics entering the convergence bound.
struct BoundConstants {
  double gamma = 0.0;        // max_{n,n'} tr(R_n D_n R_n' D_n) / c_n^2
  double gamma_tilde = 0.0;  // max_{n,n'} tr(C_n D_n R_n' D_n) / c_n^2
  double kappa = 0.0;        // (1/N) sum 1/c_n
  double kappa_tilde = 0.0;  // (1/N) sum tr(C_n D_n) / c_n^2
};

struct BoundInputs {
  double mu = 1.0;
  double smoothness = 1.0;
  double gradient_bound = 0.0;  // G
  double heterogeneity = 0.0;   // Gamma
  int local_steps = 1;          // tau
  int dimension = 1;            // d
  int num_clients = 1;          // N
  double noise_std = 0.0;       // sigma_z
  Schedule eta;
  Schedule alpha{1.0, 0.0};
  double initial_dist_sq = 0.0;

  // Throws ConfigError unless mu > 0, smoothness >= mu, tau >= 1 and
  // eta_t <= min(1, 1/(mu tau)) for t < rounds.
  void validate(int rounds) const;
};

BoundConstants compute_constants(const CorrelationSet& correlations,
                                 const AssociationMap& association);

double a_coeff(double eta, double mu, int local_steps);
double b_coeff(const BoundInputs& in, const BoundConstants& k, int t);

// e(0..T) from e(t+1) = A(t) e(t) + B(t), e(0) = initial distance.
std::vector<double> bound_trajectory(const BoundInputs& in,
                                     const BoundConstants& k, int rounds);

// (L/2) e(t).
std::vector<double> loss_gap_bound(const std::vector<double>& trajectory,
                                   double smoothness);

// Plateau of the tau = 1, constant-step bound. Throws ConfigError when tau
// != 1 or either schedule varies.
double corollary_a1(const BoundInputs& in, const BoundConstants& k);

}  // namespace otafl

#endif  // OTAFL_BOUNDS_HPP_
