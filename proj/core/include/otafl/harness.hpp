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

#ifndef OTAFL_HARNESS_HPP_
#define OTAFL_HARNESS_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "otafl/bounds.hpp"
#include "otafl/config.hpp"
#include "otafl/fl_engine.hpp"
#include "otafl/moments.hpp"
#include "otafl/tasks.hpp"
#include "otafl/topology.hpp"

namespace otafl {

// A pass/fail verification carried into summary.json and the exit status.
struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct RepetitionResult {
  std::uint64_t seed = 0;
  std::vector<RoundRecord> rounds;
  double max_power_mw = 0.0;  // max over clients of the running average
  double max_gradient_sq = 0.0;
  std::uint64_t slots_drawn = 0;
  std::vector<TermStats> term_stats;
  // Round at which ||theta|| passed 1e12, or 0. Later rounds are recorded
  // with infinite loss and distance.
  int diverged_at = 0;
};

struct BoundRow {
  int t = 0;
  double a = 0.0;
  double b = 0.0;
  double e = 0.0;
  double loss_gap = 0.0;
};

struct ResultBundle {
  std::string label;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::vector<RepetitionResult> repetitions;
  std::vector<RoundRecord> mean;    // per-round mean over repetitions
  std::vector<RoundRecord> stddev;  // per-round sample std (0 for one rep)

  TaskConstants task_constants;
  std::optional<double> gradient_bound;  // G used by the bound
  std::optional<BoundConstants> constants;
  std::vector<BoundRow> bound;
  std::optional<double> a1;

  double noise_dbm = 0.0;
  double noise_std = 0.0;
  double power_mw = 0.0;  // mean over repetitions of max_power_mw
  std::uint64_t slots_drawn = 0;
  int diverged = 0;  // repetitions that hit the divergence guard
  std::vector<Check> checks;
  std::optional<double> sweep_value;

  bool passed() const;
};

struct BuiltNetwork {
  Topology topology;
  CorrelationSet correlations;
  AssociationMap association;
};

BuiltNetwork build_network(const NetworkConfig& network, const CsiConfig& csi);
std::unique_ptr<Task> build_task(const ExperimentSpec& spec);

// Single-AP cellular network with the cell-free total antenna count and the
// same UT placement.
NetworkConfig cellular_counterpart(const ExperimentSpec& spec);

// Repetition i runs with seed derive_seed(spec.seed, kRepetition, i); the
// network and the task are shared by all repetitions. In bound mode only
// the analytical trajectory is produced and no channel is sampled.
ResultBundle run_experiment(const ExperimentSpec& spec);

struct CellularComparison {
  ResultBundle cell_free;
  ResultBundle cellular;
  // Per repetition, cell-free terminal loss < cellular terminal loss.
  std::vector<bool> cell_free_wins;
};

CellularComparison compare_cellular(const ExperimentSpec& spec);

struct MomentsReport {
  std::vector<MomentCheck> checks;
  bool passed() const;
};

MomentsReport verify_moments(const ExperimentSpec& spec);

// One bundle per sweep value; every point shares the master seed.
std::vector<ResultBundle> sweep(const ExperimentSpec& spec);

// The spec with one sweep axis set to `value`, in simulate mode.
ExperimentSpec sweep_point(const ExperimentSpec& spec, double value);

}  // namespace otafl

#endif  // OTAFL_HARNESS_HPP_
