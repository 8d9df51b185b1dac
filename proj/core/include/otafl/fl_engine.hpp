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

#ifndef OTAFL_FL_ENGINE_HPP_
#define OTAFL_FL_ENGINE_HPP_

#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "otafl/aircomp.hpp"
#include "otafl/channel.hpp"
#include "otafl/random.hpp"
#include "otafl/tasks.hpp"
#include "otafl/types.hpp"

namespace otafl {

// value(t) = initial / (1 + decay * t); constant when decay == 0.
struct Schedule {
  double initial = 0.1;
  double decay = 0.0;

  double at(int t) const { return initial / (1.0 + decay * t); }
  bool is_constant() const { return decay == 0.0; }
};

enum class Participation { kFull, kPartial };
enum class SchedulingPolicy {
  kRandom,        // RS: uniform without replacement
  kSignificance,  // US: largest update norms
};
enum class Aggregation { kIdeal, kOta };

struct FlConfig {
  int rounds = 100;
  int local_steps = 1;
  Schedule eta;
  int batch_size = 0;  // <= 0: full local batch
  Participation participation = Participation::kFull;
  int selected = 0;  // r, partial participation only
  SchedulingPolicy policy = SchedulingPolicy::kRandom;
  Aggregation aggregation = Aggregation::kIdeal;
  std::uint64_t seed = 1;
  // Enforces eta_t <= min(1, 1/(mu tau)) so the analytical bound applies.
  bool compare_bound = false;

  void validate(int num_clients, double mu) const;
};

struct RoundRecord {
  static constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

  int round = 0;
  double loss = kMissing;
  double dist_sq = kMissing;
  double test_acc = kMissing;
  double power_dbm = kMissing;
  double bound = kMissing;
};

// Everything the OTA path needs: the physical link and its schedule.
struct NetworkBundle {
  OtaLink link;
  Schedule alpha{1.0, 0.0};
  int subcarriers = 1;
};

// Mean and variance across the K*S symbols of one round, per term
// (signal, interf1, interf2, noise).
struct TermStats {
  int round = 0;
  cd mean[4];
  double var[4] = {0, 0, 0, 0};
};

struct RunResult {
  std::vector<RoundRecord> rounds;
  PowerLedger ledger;
  double max_gradient_sq = 0.0;
  std::uint64_t slots_drawn = 0;
  std::vector<TermStats> term_stats;
};

// tau steps of minibatch SGD from theta; returns theta_tau - theta.
// `max_gradient_sq`, when given, is raised to the largest ||g||^2 seen.
// Raised when ||theta|| exceeds 1e12. Carries the records up to and
// including the offending round.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(int round, RunResult partial);

  int round() const { return round_; }
  const RunResult& partial() const { return partial_; }

 private:
  int round_;
  RunResult partial_;
};

Vec local_sgd(const Vec& theta, const Task& task, int client, double eta,
              int local_steps, int batch_size, Rng& rng,
              double* max_gradient_sq = nullptr);

// r clients out of the candidates, ascending indices.
std::vector<int> schedule(SchedulingPolicy policy,
                          std::span<const Vec> candidate_updates, int r,
                          Rng& rng);

struct RunOptions {
  bool collect_term_stats = false;
};

// One FL trajectory. `network` is required for OTA aggregation and ignored
// otherwise. Throws std::runtime_error if ||theta|| exceeds 1e12.
RunResult run(const FlConfig& config, const Task& task,
              const NetworkBundle* network, RunOptions options = {});

}  // namespace otafl

#endif  // OTAFL_FL_ENGINE_HPP_
