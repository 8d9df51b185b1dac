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

#ifndef OTAFL_CONFIG_HPP_
#define OTAFL_CONFIG_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "otafl/channel.hpp"
#include "otafl/fl_engine.hpp"
#include "otafl/moments.hpp"
#include "otafl/tasks.hpp"
#include "otafl/topology.hpp"

namespace otafl {

enum class Mode { kSimulate, kBound, kCompareCellular, kVerifyMoments, kSweep };
enum class TaskKind { kQuadratic, kLogistic };
enum class SweepAxis { kAlpha, kNumUts, kEta, kClusterSize };

// Receiver noise. `sigma_z` (linear std, sqrt of mW) takes precedence over
// `sigma_z_dbm` (noise power), which takes precedence over the thermal
// formula.
struct NoiseConfig {
  double bandwidth_hz = 15e3;
  double noise_figure_db = 7.0;
  std::optional<double> sigma_z_dbm;
  std::optional<double> sigma_z;

  double std_dev() const;
  double power_dbm() const;
};

struct MomentsConfig {
  InstanceSpec instance;
  std::uint64_t frames = 1000000;
  std::uint64_t quadratic_samples = 1000000;
  double tolerance = 0.02;
  double z_limit = 4.0;  // unbiasedness band, in standard errors
};

struct ExperimentSpec {
  Mode mode = Mode::kSimulate;
  std::uint64_t seed = 1;
  int repetitions = 1;
  std::string output_dir = "out";

  NetworkConfig network;
  int cellular_antennas = 0;  // 0: num_aps * antennas_per_ap
  CsiConfig csi;
  int subcarriers = 1;
  NoiseConfig noise;
  Schedule alpha{0.5, 0.0};

  TaskKind task = TaskKind::kQuadratic;
  QuadraticSpec quadratic;
  LogisticSpec logistic;
  FlConfig fl;

  MomentsConfig moments;
  SweepAxis sweep_axis = SweepAxis::kAlpha;
  std::vector<double> sweep_values;

  bool term_stats = false;
  bool dump_topology = false;

  // Normalised JSON of the spec after overrides; hashed for reproducibility.
  std::string canonical;

  void validate() const;
};

// Parses a JSON document, applies `key.path=value` overrides and validates.
// Unknown keys and bad values raise ConfigError naming the field path.
ExperimentSpec parse_spec(const std::string& text,
                          const std::vector<std::string>& overrides = {});
ExperimentSpec load_spec(const std::string& path,
                         const std::vector<std::string>& overrides = {});

// FNV-1a over the canonical text, as 16 hex digits.
std::string config_hash(const ExperimentSpec& spec);

const char* to_string(Mode mode);
const char* to_string(SweepAxis axis);

}  // namespace otafl

#endif  // OTAFL_CONFIG_HPP_
