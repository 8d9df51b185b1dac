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

#ifndef OTAFL_OUTPUT_HPP_
#define OTAFL_OUTPUT_HPP_

#include <ostream>
#include <string>
#include <vector>

#include "otafl/harness.hpp"

namespace otafl {

// round,loss,dist_sq,test_acc,power_dbm,bound. Missing values are empty.
void write_rounds_csv(std::ostream& out, const std::vector<RoundRecord>& rows);
// rep,seed,round,... for every repetition.
void write_repetitions_csv(std::ostream& out, const ResultBundle& bundle);
// t,A,B,e,loss_gap.
void write_bound_csv(std::ostream& out, const std::vector<BoundRow>& rows);
// round,term,mean_re,mean_im,var.
void write_terms_csv(std::ostream& out, const std::vector<TermStats>& stats);
// value,round,loss,dist_sq,test_acc,power_dbm,bound across sweep points.
void write_sweep_csv(std::ostream& out, const std::vector<ResultBundle>& points);

std::string summary_json(const ExperimentSpec& spec, const ResultBundle& bundle);
std::string comparison_json(const ExperimentSpec& spec,
                            const CellularComparison& cmp);
std::string moments_json(const ExperimentSpec& spec,
                         const MomentsReport& report);
std::string sweep_json(const ExperimentSpec& spec,
                       const std::vector<ResultBundle>& points);

// rounds.csv, rounds_std.csv, repetitions.csv, bound.csv (when present),
// terms.csv (when collected) and summary.json under `dir`.
void write_bundle(const std::string& dir, const ExperimentSpec& spec,
                  const ResultBundle& bundle);
void write_text(const std::string& path, const std::string& text);

}  // namespace otafl

#endif  // OTAFL_OUTPUT_HPP_
