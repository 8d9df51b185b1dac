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

#ifndef OTAFL_MOMENTS_HPP_
#define OTAFL_MOMENTS_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "otafl/channel.hpp"
#include "otafl/topology.hpp"
#include "otafl/types.hpp"

namespace otafl {

// Measured-versus-closed-form comparison of one statistic.
struct MomentCheck {
  std::string name;
  double measured = 0.0;
  double expected = 0.0;
  double rel_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

// Relative error, with 0/0 counted as exact and x/0 as infinite.
double relative_error(double measured, double expected);
MomentCheck make_check(std::string name, double measured, double expected,
                       double tolerance);

// A fixed network with fixed client updates, for Monte Carlo checks of the
// combined output.
struct MomentInstance {
  CorrelationSet correlations;
  AssociationMap association;
  std::vector<Vec> updates;
  int subcarriers = 1;
  double alpha = 1.0;
  double noise_std = 1.0;
  std::uint64_t seed = 1;
};

struct InstanceSpec {
  int num_uts = 4;
  int num_aps = 6;
  int antennas = 2;
  int cluster_size = 3;
  int dimension = 2;
  CsiConfig csi{CsiMode::kExplicitCov, 1e12, 0.2};
  double alpha = 1.0;
  double noise_std = 1.0;
  std::uint64_t seed = 1;
};

// Random correlated instance: log-uniform beta in [0.2, 2], exponential
// correlation with rho in [0.2, 0.9] and random phase, random clusters.
MomentInstance make_random_instance(const InstanceSpec& spec);

// Expected second moments of the reconstructed terms (all divided by alpha).
struct ClosedForms {
  Vec signal_entry;        // per entry, E(signal - mean update)^2
  double interf1_sum = 0;  // summed over entries
  double interf2_sum = 0;
  double noise_entry = 0;  // per entry, identical for all entries
};

ClosedForms closed_form_moments(const MomentInstance& instance);

struct MeasuredMoments {
  std::uint64_t frames = 0;
  Vec signal_entry;
  double interf1_sum = 0;
  double interf2_sum = 0;
  double interference_sum = 0;  // (interf1 + interf2), summed over entries
  Vec noise_entry;
  Vec mean_delta;  // sample mean of delta_hat
  Vec var_delta;   // unbiased per-entry sample variance of delta_hat
};

// Transmits the instance's updates `frames` times over fresh channels.
MeasuredMoments measure_moments(const MomentInstance& instance,
                                std::uint64_t frames);

// Monte Carlo estimates of E|h^H D h'|^2 (h, h' independent) and
// E(h^H D h - tr(R D))^2, with their trace closed forms.
struct QuadraticFormMoments {
  double cross_measured = 0;
  double cross_expected = 0;  // tr(R D R' D)
  double self_measured = 0;
  double self_expected = 0;  // tr(R D R D)
};

QuadraticFormMoments quadratic_form_moments(const CMat& r, const CMat& r2,
                                            const CMat& mask,
                                            std::uint64_t samples,
                                            std::uint64_t seed);

}  // namespace otafl

#endif  // OTAFL_MOMENTS_HPP_
